#pragma once

#include <optional>

#include <Eigen/Core>

#include "ionpf/random.hpp"

namespace ionpf {

/// Outcome vector x_t. Two components for the shipped pendulum (angle, angular velocity).
using State = Eigen::Vector2d;
/// Parameter vector of interest.
using Theta = Eigen::Vector3d;
using ThetaMatrix = Eigen::Matrix3d;

/// z_t = {x_t, xi_{t-1}}; the design is absent at t = 0.
struct AugmentedState {
  State x = State::Zero();
  std::optional<double> xi_prev;

  double design_or_zero() const noexcept { return xi_prev.value_or(0.0); }
  bool operator==(const AugmentedState&) const = default;
};

/// Gaussian distribution over Theta.
struct GaussianBelief {
  Theta mean = Theta::Zero();
  ThetaMatrix cov = ThetaMatrix::Identity();

  /// Throws std::domain_error if cov is not symmetric (1e-12) or not positive definite.
  void validate() const;
  double log_det() const;
  /// Differential entropy in nats.
  double entropy() const;
  double logpdf(const Theta& theta) const;
  Theta sample(RngStream& rng) const;
  /// Lower Cholesky factor; throws std::domain_error if the factorization fails.
  ThetaMatrix cholesky() const;
};

/// Closed-form parameter posterior for conditionally linear-Gaussian transitions.
class ConjugateOracle {
 public:
  virtual ~ConjugateOracle() = default;
  virtual GaussianBelief update(const GaussianBelief& belief, const State& x, double xi,
                                const State& x_next) const = 0;
  /// log of the transition density integrated against the belief.
  virtual double marginal_loglik(const GaussianBelief& belief, const State& x, double xi,
                                 const State& x_next) const = 0;
};

/// Markovian outcome model f(x_t | x_{t-1}, xi_{t-1}, theta) with a Gaussian prior on theta.
class StateSpaceModel {
 public:
  virtual ~StateSpaceModel() = default;

  virtual std::size_t horizon() const = 0;
  virtual State initial_state() const = 0;
  virtual const GaussianBelief& prior() const = 0;

  virtual double transition_logpdf(const State& x_next, const State& x, double xi,
                                   const Theta& theta) const = 0;
  virtual State sample_transition(const State& x, double xi, const Theta& theta,
                                  RngStream& rng) const = 0;

  /// Entropy of one transition given theta, when the noise is static.
  virtual std::optional<double> transition_entropy() const { return std::nullopt; }
  virtual const ConjugateOracle* conjugate() const { return nullptr; }

  Theta sample_prior(RngStream& rng) const { return prior().sample(rng); }
};

}  // namespace ionpf
