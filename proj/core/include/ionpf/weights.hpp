#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "ionpf/random.hpp"

namespace ionpf {

/// Raised when a weight vector cannot be normalized (every entry is -inf).
class DegenerateWeightsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// log(sum(exp(xs))), evaluated with the max shifted out. Throws
/// std::invalid_argument on empty input. Returns -inf if every entry is -inf.
double log_sum_exp(std::span<const double> xs);

/// log(mean(exp(xs))).
double log_mean_exp(std::span<const double> xs);

/// Unnormalized log-weights of a particle population.
class LogWeights {
 public:
  LogWeights() = default;
  explicit LogWeights(std::vector<double> log_values);

  static LogWeights uniform(std::size_t k);

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  std::span<const double> log_values() const noexcept { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  /// log of the total mass. Throws DegenerateWeightsError when all entries
  /// are -inf, std::domain_error on NaN or +inf entries.
  double log_total() const;
  /// Normalized probabilities; sum to one within rounding.
  std::vector<double> normalized() const;
  /// Normalized log-probabilities.
  std::vector<double> normalized_log() const;
  /// 1 / sum(w_i^2) over the normalized weights; lies in [1, size()].
  double effective_sample_size() const;

 private:
  std::vector<double> values_;
};

/// Draws `count` i.i.d. categorical indices with probabilities given by `w`.
std::vector<std::size_t> multinomial_resample(const LogWeights& w, std::size_t count, RngStream& rng);

/// Single categorical draw.
std::size_t sample_index(const LogWeights& w, RngStream& rng);

double effective_sample_size(const LogWeights& w);

}  // namespace ionpf
