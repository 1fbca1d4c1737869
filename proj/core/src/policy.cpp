#include "ionpf/policy.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

namespace ionpf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

void require_batch(std::size_t cols, std::size_t n, const char* what) {
  if (cols != n) throw std::invalid_argument(std::string("policy: batch size mismatch in ") + what);
}

double design_at(const Trajectory& traj, std::size_t t) {
  const auto& xi = traj[t + 1].xi_prev;
  if (!xi) throw std::invalid_argument("policy score: trajectory is missing a design");
  return *xi;
}

}  // namespace

std::string to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::recurrent: return "recurrent";
    case PolicyKind::linear: return "linear";
    case PolicyKind::random: return "random";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "recurrent") return PolicyKind::recurrent;
  if (name == "linear") return PolicyKind::linear;
  if (name == "random") return PolicyKind::random;
  throw std::invalid_argument("unknown policy kind '" + name + "'");
}

void PolicyArchConfig::validate() const {
  if (design_dim != 1) throw std::invalid_argument("policy: only scalar designs are supported (design_dim = 1)");
  if (!std::isfinite(init_log_std)) throw std::invalid_argument("policy: init_log_std must be finite");
  if (kind != PolicyKind::recurrent) return;
  if (embedding_width == 0) throw std::invalid_argument("policy: embedding_width must be > 0");
  if (recurrent_widths.empty()) throw std::invalid_argument("policy: at least one recurrent layer is required");
  for (auto w : encoder_widths)
    if (w == 0) throw std::invalid_argument("policy: encoder widths must be > 0");
  for (auto w : recurrent_widths)
    if (w == 0) throw std::invalid_argument("policy: recurrent widths must be > 0");
  for (auto w : head_widths)
    if (w == 0) throw std::invalid_argument("policy: head widths must be > 0");
}

PolicyState Policy::step(const PolicyParams& params, const PolicyState& state, const AugmentedState& z) const {
  return step_batch(params, state, std::span<const AugmentedState>(&z, 1)).col(0);
}

DesignDraw Policy::sample(const PolicyParams& params, const PolicyState& state, RngStream& rng) const {
  return sample_batch(params, state, std::span<RngStream>(&rng, 1)).front();
}

double Policy::logpdf(const PolicyParams& params, const PolicyState& state, double xi) const {
  return logpdf_batch(params, state, std::span<const double>(&xi, 1))[0];
}

Eigen::VectorXd Policy::score(const PolicyParams& params, const Trajectory& trajectory) const {
  const double one = 1.0;
  return score(params, std::span<const Trajectory>(&trajectory, 1), std::span<const double>(&one, 1));
}

PolicyState Policy::state_after(const PolicyParams& params, std::span<const AugmentedState> prefix) const {
  PolicyState s = initial_state();
  if (memoryless()) {
    if (!prefix.empty()) s = step(params, s, prefix.back());
    return s;
  }
  for (const auto& z : prefix) s = step(params, s, z);
  return s;
}

std::unique_ptr<Policy> make_policy(const PolicyArchConfig& arch) {
  switch (arch.kind) {
    case PolicyKind::recurrent: return std::make_unique<RecurrentGaussianPolicy>(arch);
    case PolicyKind::linear: return std::make_unique<LinearGaussianPolicy>(arch);
    case PolicyKind::random: return std::make_unique<UniformRandomPolicy>(arch);
  }
  throw std::invalid_argument("make_policy: unknown kind");
}

namespace squashed_gaussian {

double logpdf(double mean, double log_std, double xi) {
  if (!(std::abs(xi) < 1.0)) return -std::numeric_limits<double>::infinity();
  const double u = std::atanh(xi);
  const double z = (u - mean) * std::exp(-log_std);
  const double jac = std::log1p(-xi) + std::log1p(xi);
  return -0.5 * z * z - log_std - 0.5 * kLog2Pi - jac;
}

double cdf(double mean, double log_std, double xi) {
  if (xi <= -1.0) return 0.0;
  if (xi >= 1.0) return 1.0;
  const double z = (std::atanh(xi) - mean) * std::exp(-log_std);
  return 0.5 * std::erfc(-z / std::numbers::sqrt2);
}

DesignDraw sample(double mean, double log_std, RngStream& rng) {
  double xi = std::tanh(mean + std::exp(log_std) * rng.normal());
  if (!(std::abs(xi) < 1.0)) xi = std::copysign(std::nextafter(1.0, 0.0), xi);
  return {xi, logpdf(mean, log_std, xi)};
}

Gradient logpdf_gradient(double mean, double log_std, double xi) {
  if (!(std::abs(xi) < 1.0)) throw std::domain_error("squashed_gaussian: design outside (-1, 1)");
  const double inv_var = std::exp(-2.0 * log_std);
  const double r = std::atanh(xi) - mean;
  return {r * inv_var, r * r * inv_var - 1.0};
}

}  // namespace squashed_gaussian

LinearGaussianPolicy::LinearGaussianPolicy(PolicyArchConfig arch) : arch_(std::move(arch)) {
  arch_.kind = PolicyKind::linear;
  arch_.validate();
}

Eigen::Matrix<double, LinearGaussianPolicy::kFeatures, 1> LinearGaussianPolicy::features(const AugmentedState& z) {
  Eigen::Matrix<double, kFeatures, 1> f;
  f << z.x[0], z.x[1], z.design_or_zero(), std::sin(z.x[0]), std::cos(z.x[0]);
  return f;
}

PolicyParams LinearGaussianPolicy::init(RngStream& rng) const {
  PolicyParams p = PolicyParams::Zero(static_cast<Eigen::Index>(num_params()));
  for (std::size_t i = 0; i < kFeatures; ++i) p[static_cast<Eigen::Index>(i)] = 0.01 * rng.normal();
  p[kFeatures + 1] = arch_.init_log_std;
  return p;
}

Eigen::MatrixXd LinearGaussianPolicy::step_batch(const PolicyParams&, const Eigen::MatrixXd& states,
                                                 std::span<const AugmentedState> z) const {
  require_batch(static_cast<std::size_t>(states.cols()), z.size(), "step");
  Eigen::MatrixXd out(kFeatures, states.cols());
  for (std::size_t b = 0; b < z.size(); ++b) out.col(static_cast<Eigen::Index>(b)) = features(z[b]);
  return out;
}

Eigen::VectorXd LinearGaussianPolicy::logpdf_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                                   std::span<const double> xi) const {
  require_batch(static_cast<std::size_t>(states.cols()), xi.size(), "logpdf");
  const Eigen::VectorXd mu = (params.head(kFeatures).transpose() * states).transpose().array() + params[kFeatures];
  Eigen::VectorXd out(mu.size());
  for (Eigen::Index b = 0; b < mu.size(); ++b)
    out[b] = squashed_gaussian::logpdf(mu[b], params[kFeatures + 1], xi[static_cast<std::size_t>(b)]);
  return out;
}

std::vector<DesignDraw> LinearGaussianPolicy::sample_batch(const PolicyParams& params, const Eigen::MatrixXd& states,
                                                           std::span<RngStream> rngs) const {
  require_batch(static_cast<std::size_t>(states.cols()), rngs.size(), "sample");
  const Eigen::VectorXd mu = (params.head(kFeatures).transpose() * states).transpose().array() + params[kFeatures];
  std::vector<DesignDraw> out;
  out.reserve(rngs.size());
  for (std::size_t b = 0; b < rngs.size(); ++b)
    out.push_back(squashed_gaussian::sample(mu[static_cast<Eigen::Index>(b)], params[kFeatures + 1], rngs[b]));
  return out;
}

Eigen::VectorXd LinearGaussianPolicy::score(const PolicyParams& params, std::span<const Trajectory> trajectories,
                                            std::span<const double> weights) const {
  require_batch(trajectories.size(), weights.size(), "score");
  Eigen::VectorXd g = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(num_params()));
  const double log_std = params[kFeatures + 1];
  for (std::size_t b = 0; b < trajectories.size(); ++b) {
    const auto& traj = trajectories[b];
    if (weights[b] == 0.0) continue;
    for (std::size_t t = 0; t + 1 < traj.size(); ++t) {
      const auto f = features(traj[t]);
      const double mu = params.head(kFeatures).dot(f) + params[kFeatures];
      const auto d = squashed_gaussian::logpdf_gradient(mu, log_std, design_at(traj, t));
      g.head(kFeatures) += weights[b] * d.mean * f;
      g[kFeatures] += weights[b] * d.mean;
      g[kFeatures + 1] += weights[b] * d.log_std;
    }
  }
  return g;
}

UniformRandomPolicy::UniformRandomPolicy(PolicyArchConfig arch) : arch_(std::move(arch)) {
  arch_.kind = PolicyKind::random;
  arch_.validate();
}

PolicyArchConfig UniformRandomPolicy::random_arch() {
  PolicyArchConfig a;
  a.kind = PolicyKind::random;
  return a;
}

double random_policy_sample(RngStream& rng) {
  double xi = rng.uniform(-1.0, 1.0);
  if (!(std::abs(xi) < 1.0)) xi = std::copysign(std::nextafter(1.0, 0.0), xi);
  return xi;
}

Eigen::MatrixXd UniformRandomPolicy::step_batch(const PolicyParams&, const Eigen::MatrixXd& states,
                                                std::span<const AugmentedState> z) const {
  require_batch(static_cast<std::size_t>(states.cols()), z.size(), "step");
  return Eigen::MatrixXd(0, states.cols());
}

Eigen::VectorXd UniformRandomPolicy::logpdf_batch(const PolicyParams&, const Eigen::MatrixXd& states,
                                                  std::span<const double> xi) const {
  require_batch(static_cast<std::size_t>(states.cols()), xi.size(), "logpdf");
  Eigen::VectorXd out(states.cols());
  for (std::size_t b = 0; b < xi.size(); ++b)
    out[static_cast<Eigen::Index>(b)] =
        std::abs(xi[b]) < 1.0 ? -std::numbers::ln2 : -std::numeric_limits<double>::infinity();
  return out;
}

std::vector<DesignDraw> UniformRandomPolicy::sample_batch(const PolicyParams&, const Eigen::MatrixXd& states,
                                                          std::span<RngStream> rngs) const {
  require_batch(static_cast<std::size_t>(states.cols()), rngs.size(), "sample");
  std::vector<DesignDraw> out;
  out.reserve(rngs.size());
  for (auto& rng : rngs) out.push_back({random_policy_sample(rng), -std::numbers::ln2});
  return out;
}

Eigen::VectorXd UniformRandomPolicy::score(const PolicyParams&, std::span<const Trajectory> trajectories,
                                           std::span<const double> weights) const {
  require_batch(trajectories.size(), weights.size(), "score");
  return Eigen::VectorXd(0);
}

}  // namespace ionpf
