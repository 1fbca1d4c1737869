#include "ionpf/weights.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace ionpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_entries(std::span<const double> xs) {
  for (double x : xs) {
    if (std::isnan(x) || x == std::numeric_limits<double>::infinity()) {
      throw std::domain_error("log-weights must be finite or -inf");
    }
  }
}

}  // namespace

double log_sum_exp(std::span<const double> xs) {
  if (xs.empty()) throw std::invalid_argument("log_sum_exp of an empty sequence");
  const double m = *std::max_element(xs.begin(), xs.end());
  if (m == kNegInf) return kNegInf;
  if (!std::isfinite(m)) return m;
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - m);
  return m + std::log(acc);
}

double log_mean_exp(std::span<const double> xs) {
  return log_sum_exp(xs) - std::log(static_cast<double>(xs.size()));
}

LogWeights::LogWeights(std::vector<double> log_values) : values_(std::move(log_values)) {}

LogWeights LogWeights::uniform(std::size_t k) { return LogWeights(std::vector<double>(k, 0.0)); }

double LogWeights::log_total() const {
  check_entries(values_);
  const double total = log_sum_exp(values_);
  if (total == kNegInf) throw DegenerateWeightsError("all log-weights are -inf");
  return total;
}

std::vector<double> LogWeights::normalized_log() const {
  const double total = log_total();
  std::vector<double> out(values_.size());
  std::transform(values_.begin(), values_.end(), out.begin(), [&](double v) { return v - total; });
  return out;
}

std::vector<double> LogWeights::normalized() const {
  std::vector<double> out = normalized_log();
  for (double& v : out) v = std::exp(v);
  return out;
}

double LogWeights::effective_sample_size() const {
  double sq = 0.0;
  for (double w : normalized()) sq += w * w;
  return 1.0 / sq;
}

double effective_sample_size(const LogWeights& w) { return w.effective_sample_size(); }

std::vector<std::size_t> multinomial_resample(const LogWeights& w, std::size_t count, RngStream& rng) {
  if (count == 0) throw std::invalid_argument("multinomial_resample: count must be >= 1");
  const std::vector<double> probs = w.normalized();
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  std::vector<std::size_t> out(count);
  for (auto& i : out) i = dist(rng.engine());
  return out;
}

std::size_t sample_index(const LogWeights& w, RngStream& rng) {
  return multinomial_resample(w, 1, rng).front();
}

}  // namespace ionpf
