#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include <Eigen/Dense>

#include "ionpf/evaluation.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace ionpf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Gaussian random walk in x[0] that ignores theta entirely.
class ThetaFreeModel final : public StateSpaceModel {
 public:
  explicit ThetaFreeModel(std::size_t T) : T_(T), prior_(pendulum::prior_default()) {}
  std::size_t horizon() const override { return T_; }
  State initial_state() const override { return State::Zero(); }
  const GaussianBelief& prior() const override { return prior_; }
  double transition_logpdf(const State& xn, const State& x, double xi, const Theta&) const override {
    if (xn[1] != 0.0) return -kInf;
    const double r = xn[0] - x[0] - 0.3 * xi;
    return -0.5 * r * r / kVar - 0.5 * std::log(2 * std::numbers::pi * kVar);
  }
  State sample_transition(const State& x, double xi, const Theta&, RngStream& rng) const override {
    return State(x[0] + 0.3 * xi + std::sqrt(kVar) * rng.normal(), 0.0);
  }
  std::optional<double> transition_entropy() const override {
    return 0.5 * std::log(2 * std::numbers::pi * std::numbers::e * kVar);
  }

 private:
  static constexpr double kVar = 0.04;
  std::size_t T_;
  GaussianBelief prior_;
};

pendulum::PendulumConfig short_config(std::size_t T) {
  pendulum::PendulumConfig c;
  c.horizon = T;
  return c;
}

GaussianBelief toy_prior() {
  GaussianBelief p;
  p.mean = Theta(0.2, -0.5, 1.5);
  p.cov = Theta(0.6, 0.8, 0.5).asDiagonal();
  return p;
}

// Mutual information I(theta; x1) and the marginal entropy H(x1) for one Bernoulli
// experiment with xi ~ U(-1, 1), by quadrature.
std::pair<double, double> bernoulli_one_step(const oracle::BernoulliModel& model) {
  const auto gh = oracle::gauss_hermite(30);
  const auto gl = oracle::gauss_legendre(40, -1.0, 1.0);
  const Eigen::Matrix3d L = model.prior().cov.llt().matrixL();
  const double norm = std::pow(std::numbers::pi, -1.5);
  auto h = [](double p) { return -(p * std::log(p) + (1 - p) * std::log(1 - p)); };
  double mi = 0.0, marginal_entropy = 0.0;
  for (std::size_t q = 0; q < gl.nodes.size(); ++q) {
    double pbar = 0.0, cond = 0.0;
    for (std::size_t i = 0; i < 30; ++i)
      for (std::size_t j = 0; j < 30; ++j)
        for (std::size_t k = 0; k < 30; ++k) {
          const Theta th = model.prior().mean + std::sqrt(2.0) * L * Eigen::Vector3d(gh.nodes[i], gh.nodes[j], gh.nodes[k]);
          const double w = norm * gh.weights[i] * gh.weights[j] * gh.weights[k];
          const double p = oracle::BernoulliModel::prob_one(State::Zero(), gl.nodes[q], th);
          pbar += w * p;
          cond += w * h(p);
        }
    mi += 0.5 * gl.weights[q] * (h(pbar) - cond);
    marginal_entropy += 0.5 * gl.weights[q] * h(pbar);
  }
  return {mi, marginal_entropy};
}

}  // namespace

TEST(EstimateTest, MeanAndSampleStd) {
  const auto e = Estimate::from_samples({1.0, 2.0, 3.0, 4.0});
  EXPECT_EQ(e.mean, 2.5);
  EXPECT_NEAR(e.std, std::sqrt(5.0 / 3.0), 1e-15);
  EXPECT_NEAR(e.standard_error(), std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  EXPECT_EQ(Estimate::from_samples({7.0}).std, 0.0);
}

TEST(EigEstimateTest, ThetaFreeModelCarriesNoInformation) {
  const ThetaFreeModel model(10);
  UniformRandomPolicy policy;
  EigConfig cfg;
  cfg.rollouts = 400;
  cfg.M = 64;
  const auto e = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(1));
  // The per-rollout value is a sum of centred log-density terms: zero mean, but not zero spread.
  EXPECT_LT(std::abs(e.information.mean), 3.0 * e.information.standard_error());
  EXPECT_GT(e.information.std, 0.0);
  const double T_h = 10.0 * *model.transition_entropy();
  for (std::size_t i = 0; i < 400; ++i) EXPECT_NEAR(e.raw.samples[i] - e.information.samples[i], T_h, 1e-12);
}

TEST(SpceEstimateTest, ThetaFreeModelIsExactlyZero) {
  const ThetaFreeModel model(6);
  UniformRandomPolicy policy;
  SpceConfig cfg;
  cfg.rollouts = 20;
  cfg.contrastive = 50;
  const auto e = spce_estimate(model, policy, PolicyParams(0), cfg, RngStream(2));
  for (double v : e.samples) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(SpceEstimateTest, BoundedByLogOfContrastCount) {
  const pendulum::PendulumModel model(short_config(20));
  UniformRandomPolicy policy;
  for (std::size_t L : {1u, 10u, 100u}) {
    SpceConfig cfg;
    cfg.rollouts = 30;
    cfg.contrastive = L;
    const auto e = spce_estimate(model, policy, PolicyParams(0), cfg, RngStream(3, L));
    for (double v : e.samples) EXPECT_LE(v, std::log(static_cast<double>(L + 1)) + 1e-12);
  }
}

TEST(SpceEstimateTest, ApproachesMutualInformationForOneExperiment) {
  const oracle::BernoulliModel model(1, toy_prior());
  const auto [mi, marginal_entropy] = bernoulli_one_step(model);
  UniformRandomPolicy policy;
  SpceConfig cfg;
  cfg.rollouts = 20000;
  cfg.contrastive = 2000;
  const auto s = spce_estimate(model, policy, PolicyParams(0), cfg, RngStream(4));
  EXPECT_LT(std::abs(s.mean - mi), 3.0 * s.standard_error() + 1e-3);

  EigConfig ec;
  ec.rollouts = 20000;
  ec.M = 1024;
  const auto e = eig_estimate(model, policy, PolicyParams(0), ec, RngStream(5));
  EXPECT_LT(std::abs(e.raw.mean - marginal_entropy), 3.0 * e.raw.standard_error() + 1e-3);
}

TEST(EigEstimateTest, NpfAgreesWithExactStrategy) {
  const pendulum::PendulumModel model(short_config(10));
  UniformRandomPolicy policy;
  EigConfig cfg;
  cfg.rollouts = 300;
  cfg.M = 1024;
  const auto npf = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(6));
  cfg.strategy = ThetaStrategy::exact;
  const auto exact = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(7));
  EXPECT_LT(std::abs(npf.information.mean - exact.information.mean),
            3.0 * std::hypot(npf.information.standard_error(), exact.information.standard_error()));
}

TEST(EigEstimateTest, SeedReproducible) {
  const pendulum::PendulumModel model(short_config(5));
  UniformRandomPolicy policy;
  EigConfig cfg;
  cfg.rollouts = 5;
  cfg.M = 32;
  const auto a = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(8));
  const auto b = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(8));
  EXPECT_EQ(a.raw.samples, b.raw.samples);
}

TEST(RealizedIg, StartsAtZeroAndNeverDecreases) {
  const pendulum::PendulumModel model(short_config(30));
  UniformRandomPolicy policy;
  const auto c = realized_ig_curve(model, policy, PolicyParams(0), 50, RngStream(9));
  ASSERT_EQ(c.mean.size(), 31u);
  EXPECT_EQ(c.mean[0], 0.0);
  EXPECT_EQ(c.std[0], 0.0);
  for (std::size_t t = 1; t < c.mean.size(); ++t) EXPECT_GE(c.mean[t], c.mean[t - 1] - 1e-12);
  for (double v : c.final_values) EXPECT_GE(v, 0.0);
}

TEST(RealizedIg, RequiresConjugateModel) {
  const oracle::BernoulliModel model(2, toy_prior());
  UniformRandomPolicy policy;
  EXPECT_THROW(realized_ig_curve(model, policy, PolicyParams(0), 3, RngStream(11)), std::invalid_argument);
}

TEST(RandomPolicyBaseline, BenchmarkMagnitudes) {
  const pendulum::PendulumModel model;
  UniformRandomPolicy policy;
  EigConfig cfg;
  cfg.rollouts = 200;
  cfg.strategy = ThetaStrategy::exact;
  const auto eig = eig_estimate(model, policy, PolicyParams(0), cfg, RngStream(12));
  EXPECT_NEAR(eig.information.mean, 1.37, 0.5);
  const auto ig = realized_ig_curve(model, policy, PolicyParams(0), 200, RngStream(13));
  EXPECT_NEAR(ig.mean.back(), 1.32, 0.5);
}

TEST(LogLogSlope, PowerLaws) {
  const std::vector<double> x{25, 50, 100};
  EXPECT_NEAR(loglog_slope(x, {3 * 625.0, 3 * 2500.0, 3 * 10000.0}), 2.0, 1e-12);
  EXPECT_NEAR(loglog_slope(x, {0.5, 1.0, 2.0}), 1.0, 1e-12);
  EXPECT_NEAR(loglog_slope(x, {4.0, 8.0, 13.0}), oracle::fit_loglog(x, {4.0, 8.0, 13.0}), 1e-12);
  EXPECT_THROW(loglog_slope({1.0}, {1.0}), std::invalid_argument);
  EXPECT_THROW(loglog_slope({1.0, 2.0}, {0.0, 1.0}), std::domain_error);
  EXPECT_THROW(loglog_slope({2.0, 2.0}, {1.0, 1.0}), std::domain_error);
}

TEST(Benchmark, AlgorithmSettings) {
  const RunConfig base;
  EXPECT_EQ(algorithm_settings("npf", base).first.strategy, ThetaStrategy::npf);
  EXPECT_EQ(algorithm_settings("npf", base).second.smoothing, Smoothing::tracing);
  EXPECT_EQ(algorithm_settings("npf-bs", base).second.smoothing, Smoothing::backward);
  EXPECT_EQ(algorithm_settings("ibis", base).first.strategy, ThetaStrategy::ibis);
  EXPECT_EQ(algorithm_settings("exact", base).first.strategy, ThetaStrategy::exact);
  EXPECT_THROW(algorithm_settings("smc2", base), std::invalid_argument);
}

TEST(Benchmark, SmallRunProducesRowsAndExponents) {
  BenchConfig cfg;
  cfg.horizons = {4, 8};
  cfg.N = 4;
  cfg.M = 4;
  cfg.repeats = 1;
  cfg.arch.kind = PolicyKind::linear;
  const auto r = runtime_benchmark(pendulum::PendulumConfig{}, cfg, RngStream(14));
  ASSERT_EQ(r.rows.size(), 8u);
  for (const auto& row : r.rows) EXPECT_GT(row.median_seconds, 0.0);
  EXPECT_EQ(r.exponents.size(), 4u);
}
