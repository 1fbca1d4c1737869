#pragma once

#include "ionpf/model.hpp"
#include "ionpf/pendulum.hpp"

namespace ionpf::oracle {

/// Binary outcome x[0] in {0, 1} with P(x' = 1) = sigmoid(theta0 + theta1 x + theta2 xi).
/// x[1] is always 0. Densities are with respect to counting measure.
class BernoulliModel final : public StateSpaceModel {
 public:
  explicit BernoulliModel(std::size_t horizon, GaussianBelief prior);

  std::size_t horizon() const override { return horizon_; }
  State initial_state() const override { return State::Zero(); }
  const GaussianBelief& prior() const override { return prior_; }

  double transition_logpdf(const State& x_next, const State& x, double xi, const Theta& theta) const override;
  State sample_transition(const State& x, double xi, const Theta& theta, RngStream& rng) const override;

  static double prob_one(const State& x, double xi, const Theta& theta);

 private:
  std::size_t horizon_;
  GaussianBelief prior_;
};

/// Pendulum with Gaussian noise on the angle as well, so every transition has
/// full support and backward proposals are never ruled out by the angle update.
class NoisyPendulumModel final : public StateSpaceModel {
 public:
  NoisyPendulumModel(pendulum::PendulumConfig cfg, double angle_std);

  std::size_t horizon() const override { return cfg_.horizon; }
  State initial_state() const override { return cfg_.x0; }
  const GaussianBelief& prior() const override { return cfg_.prior; }

  double transition_logpdf(const State& x_next, const State& x, double xi, const Theta& theta) const override;
  State sample_transition(const State& x, double xi, const Theta& theta, RngStream& rng) const override;

 private:
  pendulum::PendulumConfig cfg_;
  double angle_std_;
};

}  // namespace ionpf::oracle
