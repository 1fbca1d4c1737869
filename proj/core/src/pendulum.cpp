#include "ionpf/pendulum.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ionpf::pendulum {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;  // log(2 pi)

void require_finite(const State& x_next, const State& x, double xi, const Theta& theta) {
  if (!x_next.allFinite() || !x.allFinite() || !std::isfinite(xi) || !theta.allFinite()) {
    throw std::domain_error("pendulum transition: non-finite input");
  }
}

double gaussian_logpdf(double residual, double variance) {
  return -0.5 * residual * residual / variance - 0.5 * (kLog2Pi + std::log(variance));
}

}  // namespace

GaussianBelief prior_default() {
  GaussianBelief prior;
  prior.mean << 14.7, 0.0, 3.0;
  prior.cov = Theta(0.1, 0.01, 0.1).asDiagonal();
  return prior;
}

void PendulumConfig::validate() const {
  if (!(dt > 0.0)) throw std::invalid_argument("pendulum: dt must be > 0");
  if (horizon < 1) throw std::invalid_argument("pendulum: horizon must be >= 1");
  if (!(diffusion > 0.0)) throw std::invalid_argument("pendulum: diffusion must be > 0");
  if (!x0.allFinite()) throw std::invalid_argument("pendulum: x0 must be finite");
  prior.validate();
}

Theta theta_from_physical(double mass, double length) {
  const double ml2 = mass * length * length;
  return {3.0 * kGravity / (2.0 * length), 3.0 * kDamping / ml2, 3.0 / ml2};
}

Theta drift_features(const State& x, double xi) { return {-std::sin(x[0]), -x[1], xi}; }

double transition_logpdf(const State& x_next, const State& x, double xi, const Theta& theta,
                         const PendulumConfig& cfg) {
  require_finite(x_next, x, xi, theta);
  const double q_next = x[0] + x[1] * cfg.dt;
  if (std::abs(x_next[0] - q_next) > kPositionTolerance) {
    return -std::numeric_limits<double>::infinity();
  }
  const double mean = x[1] + drift_features(x, xi).dot(theta) * cfg.dt;
  return gaussian_logpdf(x_next[1] - mean, cfg.noise_variance());
}

State sample_transition(const State& x, double xi, const Theta& theta, const PendulumConfig& cfg,
                        RngStream& rng) {
  const double mean = x[1] + drift_features(x, xi).dot(theta) * cfg.dt;
  return {x[0] + x[1] * cfg.dt, mean + std::sqrt(cfg.noise_variance()) * rng.normal()};
}

GaussianBelief conjugate_update(const GaussianBelief& belief, const State& x, double xi,
                                const State& x_next, const PendulumConfig& cfg) {
  belief.cholesky();
  const Theta phi = drift_features(x, xi) * cfg.dt;
  const double y = x_next[1] - x[1];
  const Theta cov_phi = belief.cov * phi;
  const double s = phi.dot(cov_phi) + cfg.noise_variance();
  GaussianBelief out;
  out.mean = belief.mean + cov_phi * ((y - phi.dot(belief.mean)) / s);
  out.cov = belief.cov - cov_phi * cov_phi.transpose() / s;
  out.cov = 0.5 * (out.cov + out.cov.transpose());
  return out;
}

double conjugate_marginal_loglik(const GaussianBelief& belief, const State& x, double xi,
                                 const State& x_next, const PendulumConfig& cfg) {
  belief.cholesky();
  const double q_next = x[0] + x[1] * cfg.dt;
  if (std::abs(x_next[0] - q_next) > kPositionTolerance) {
    return -std::numeric_limits<double>::infinity();
  }
  const Theta phi = drift_features(x, xi) * cfg.dt;
  const double y = x_next[1] - x[1];
  const double var = cfg.noise_variance() + phi.dot(belief.cov * phi);
  return gaussian_logpdf(y - phi.dot(belief.mean), var);
}

PendulumModel::PendulumModel(PendulumConfig cfg) : cfg_(std::move(cfg)) { cfg_.validate(); }

double PendulumModel::transition_logpdf(const State& x_next, const State& x, double xi,
                                        const Theta& theta) const {
  return pendulum::transition_logpdf(x_next, x, xi, theta, cfg_);
}

State PendulumModel::sample_transition(const State& x, double xi, const Theta& theta,
                                       RngStream& rng) const {
  return pendulum::sample_transition(x, xi, theta, cfg_, rng);
}

std::optional<double> PendulumModel::transition_entropy() const {
  return 0.5 * std::log(2.0 * std::numbers::pi * std::numbers::e * cfg_.noise_variance());
}

GaussianBelief PendulumModel::update(const GaussianBelief& belief, const State& x, double xi,
                                     const State& x_next) const {
  return conjugate_update(belief, x, xi, x_next, cfg_);
}

double PendulumModel::marginal_loglik(const GaussianBelief& belief, const State& x, double xi,
                                      const State& x_next) const {
  return conjugate_marginal_loglik(belief, x, xi, x_next, cfg_);
}

}  // namespace ionpf::pendulum
