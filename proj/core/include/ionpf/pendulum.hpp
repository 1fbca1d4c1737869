#pragma once

#include "ionpf/model.hpp"

namespace ionpf::pendulum {

inline constexpr double kGravity = 9.81;
inline constexpr double kDamping = 0.1;
/// Tolerance on the deterministic angle update q' = q + q_dot * dt.
inline constexpr double kPositionTolerance = 1e-9;

/// Gaussian prior with mean [14.7, 0, 3.0] and covariance diag(0.1, 0.01, 0.1).
GaussianBelief prior_default();

/// Pendulum discretization and prior. Defaults follow the benchmark setup:
/// dt = 0.05, 50 experiments, velocity diffusion 0.1, x0 = [0, 0].
struct PendulumConfig {
  double dt = 0.05;
  std::size_t horizon = 50;
  double diffusion = 0.1;
  State x0 = State::Zero();
  GaussianBelief prior = prior_default();

  void validate() const;
  /// Variance of the velocity increment, diffusion^2 * dt.
  double noise_variance() const { return diffusion * diffusion * dt; }
};

/// theta = [3g/(2l), 3d/(ml^2), 3/(ml^2)] for mass m and length l.
Theta theta_from_physical(double mass, double length);

/// Drift regressor h(x, xi) = [-sin(q), -q_dot, xi].
Theta drift_features(const State& x, double xi);

/// Euler-Maruyama transition. The angle moves deterministically; only the
/// angular velocity is noisy, so this is the Gaussian log-density of the
/// velocity increment, or -inf when the angle of x_next is inconsistent.
double transition_logpdf(const State& x_next, const State& x, double xi, const Theta& theta,
                         const PendulumConfig& cfg);

State sample_transition(const State& x, double xi, const Theta& theta, const PendulumConfig& cfg,
                        RngStream& rng);

/// Bayesian linear-regression update with observation y = q_dot' - q_dot,
/// regressor h(x, xi) * dt and noise variance diffusion^2 * dt.
GaussianBelief conjugate_update(const GaussianBelief& belief, const State& x, double xi,
                                const State& x_next, const PendulumConfig& cfg);

/// Predictive log-density of x_next with theta integrated against the belief.
double conjugate_marginal_loglik(const GaussianBelief& belief, const State& x, double xi,
                                 const State& x_next, const PendulumConfig& cfg);

class PendulumModel final : public StateSpaceModel, public ConjugateOracle {
 public:
  explicit PendulumModel(PendulumConfig cfg = {});

  const PendulumConfig& config() const noexcept { return cfg_; }

  std::size_t horizon() const override { return cfg_.horizon; }
  State initial_state() const override { return cfg_.x0; }
  const GaussianBelief& prior() const override { return cfg_.prior; }

  double transition_logpdf(const State& x_next, const State& x, double xi,
                           const Theta& theta) const override;
  State sample_transition(const State& x, double xi, const Theta& theta,
                          RngStream& rng) const override;
  std::optional<double> transition_entropy() const override;
  const ConjugateOracle* conjugate() const override { return this; }

  GaussianBelief update(const GaussianBelief& belief, const State& x, double xi,
                        const State& x_next) const override;
  double marginal_loglik(const GaussianBelief& belief, const State& x, double xi,
                         const State& x_next) const override;

 private:
  PendulumConfig cfg_;
};

}  // namespace ionpf::pendulum
