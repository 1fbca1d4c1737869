#pragma once

#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ionpf/model.hpp"
#include "ionpf/random.hpp"
#include "ionpf/weights.hpp"

namespace ionpf {

/// Every theta particle assigns zero likelihood to the observed transition.
class DegenerateCloudError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Weighted theta particles attached to one outer trajectory.
///
/// `log_weights` are the reweighting weights W_theta that the particles were
/// resampled from (uniform for a fresh cloud) and `ancestors` the resampling
/// indices B into the previous cloud (identity for a fresh cloud). The cloud
/// itself is equally weighted.
struct ThetaCloud {
  std::vector<Theta> particles;
  LogWeights log_weights;
  std::vector<std::size_t> ancestors;

  std::size_t size() const noexcept { return particles.size(); }
  Theta mean() const;
  ThetaMatrix covariance() const;
  bool operator==(const ThetaCloud& other) const;
};

/// Additive Gaussian jitter with per-dimension std base_scale / sqrt(M).
struct JitterConfig {
  Theta base_scale = Theta::Zero();
  std::size_t M = 1;
  /// Optional box the jittered particles are clamped into.
  std::optional<std::pair<Theta, Theta>> clamp;

  /// base_scale = factor * prior standard deviation.
  static JitterConfig from_prior(const GaussianBelief& prior, std::size_t M, double factor = 0.5);

  Theta std_dev() const;
  void validate() const;
  bool operator==(const JitterConfig&) const = default;
};

ThetaCloud cloud_init(const GaussianBelief& prior, std::size_t M, RngStream& rng);

/// log f(x_next | x_prev, xi, theta^m) for every particle. Throws
/// DegenerateCloudError if every entry is -inf.
LogWeights cloud_reweight(const ThetaCloud& cloud, const StateSpaceModel& model, const State& x_prev, double xi,
                          const State& x_next);

Theta jitter_kernel(const Theta& theta, const JitterConfig& jc, RngStream& rng);

/// log kappa_M(to | from). Dimensions with zero jitter scale are treated as
/// point masses: they contribute 0 when equal and -inf otherwise.
double jitter_logpdf(const Theta& to, const Theta& from, const JitterConfig& jc);

/// Reweight, multinomial resample and jitter. The returned cloud records the
/// reweighting weights and the resampling indices.
ThetaCloud cloud_step_npf(const ThetaCloud& cloud, const LogWeights& reweight, const JitterConfig& jc, RngStream& rng);
ThetaCloud cloud_step_npf(const ThetaCloud& cloud, const StateSpaceModel& model, const State& x_prev, double xi,
                          const State& x_next, const JitterConfig& jc, RngStream& rng);

/// Log posterior target up to a constant: prior plus every transition of `history`.
double history_log_target(const StateSpaceModel& model, std::span<const AugmentedState> history, const Theta& theta);

struct RwmhStats {
  std::size_t proposed = 0;
  std::size_t accepted = 0;
};

/// `moves` random-walk Metropolis-Hastings steps per particle with
/// proposal N(theta, proposal_cov). `log_target` holds the current target
/// values and is updated in place.
RwmhStats rwmh_moves(std::vector<Theta>& particles, std::vector<double>& log_target,
                     const std::function<double(const Theta&)>& target, const ThetaMatrix& proposal_cov,
                     std::size_t moves, RngStream& rng);

struct IbisConfig {
  std::size_t moves = 3;
  /// Added to the empirical covariance as a fraction of the prior covariance.
  double ridge = 1e-6;

  bool operator==(const IbisConfig&) const = default;
};

/// Reweight with the last transition of `history`, resample, then rejuvenate
/// with RWMH targeting p(theta | history). Proposal covariance
/// (2.38^2 / 3) * (cloud covariance + ridge * prior covariance).
ThetaCloud cloud_step_ibis(const ThetaCloud& cloud, const LogWeights& reweight, const StateSpaceModel& model,
                           std::span<const AugmentedState> history, const IbisConfig& cfg, RngStream& rng,
                           RwmhStats* stats = nullptr);
ThetaCloud cloud_step_ibis(const ThetaCloud& cloud, const StateSpaceModel& model,
                           std::span<const AugmentedState> history, const IbisConfig& cfg, RngStream& rng,
                           RwmhStats* stats = nullptr);

/// sum_m log sum_k W^k kappa_M(next^m | prev^k), W the normalized `prev_weights`.
double rb_transition_logpdf(std::span<const Theta> prev, const LogWeights& prev_weights, std::span<const Theta> next,
                            const JitterConfig& jc);

/// `prev_reweight` is the reweighting of `prev` that `next` is scored against.
double cloud_transition_logpdf_rb(const ThetaCloud& prev, const LogWeights& prev_reweight, const ThetaCloud& next,
                                  const JitterConfig& jc);

}  // namespace ionpf
