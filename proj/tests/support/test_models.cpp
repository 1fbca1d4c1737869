#include "test_models.hpp"

#include <cmath>
#include <limits>

namespace ionpf::oracle {

namespace {
constexpr double kLog2Pi = 1.8378770664093453;
}

BernoulliModel::BernoulliModel(std::size_t horizon, GaussianBelief prior) : horizon_(horizon), prior_(std::move(prior)) {}

double BernoulliModel::prob_one(const State& x, double xi, const Theta& theta) {
  const double a = theta[0] + theta[1] * x[0] + theta[2] * xi;
  return 1.0 / (1.0 + std::exp(-a));
}

double BernoulliModel::transition_logpdf(const State& x_next, const State& x, double xi, const Theta& theta) const {
  if (x_next[1] != 0.0) return -std::numeric_limits<double>::infinity();
  const double a = theta[0] + theta[1] * x[0] + theta[2] * xi;
  // log sigmoid(a) and log sigmoid(-a)
  if (x_next[0] == 1.0) return -std::log1p(std::exp(-a));
  if (x_next[0] == 0.0) return -std::log1p(std::exp(a));
  return -std::numeric_limits<double>::infinity();
}

State BernoulliModel::sample_transition(const State& x, double xi, const Theta& theta, RngStream& rng) const {
  return State(rng.uniform() < prob_one(x, xi, theta) ? 1.0 : 0.0, 0.0);
}

NoisyPendulumModel::NoisyPendulumModel(pendulum::PendulumConfig cfg, double angle_std)
    : cfg_(std::move(cfg)), angle_std_(angle_std) {}

double NoisyPendulumModel::transition_logpdf(const State& x_next, const State& x, double xi,
                                             const Theta& theta) const {
  const double var_v = cfg_.noise_variance();
  const double var_q = angle_std_ * angle_std_;
  const double rq = x_next[0] - (x[0] + x[1] * cfg_.dt);
  const double rv = x_next[1] - (x[1] + pendulum::drift_features(x, xi).dot(theta) * cfg_.dt);
  return -0.5 * (rq * rq / var_q + rv * rv / var_v) - 0.5 * (2.0 * kLog2Pi + std::log(var_q) + std::log(var_v));
}

State NoisyPendulumModel::sample_transition(const State& x, double xi, const Theta& theta, RngStream& rng) const {
  State out;
  out[0] = x[0] + x[1] * cfg_.dt + angle_std_ * rng.normal();
  out[1] = x[1] + pendulum::drift_features(x, xi).dot(theta) * cfg_.dt + std::sqrt(cfg_.noise_variance()) * rng.normal();
  return out;
}

}  // namespace ionpf::oracle
