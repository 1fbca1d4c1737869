#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <map>

#include "enumeration.hpp"
#include "ionpf/smoother.hpp"
#include "oracles.hpp"
#include "test_models.hpp"

using namespace ionpf;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

PolicyArchConfig tiny_recurrent() {
  PolicyArchConfig a;
  a.encoder_widths = {4};
  a.embedding_width = 3;
  a.recurrent_widths = {3};
  a.head_widths = {4};
  a.init_log_std = -0.5;
  return a;
}

pendulum::PendulumConfig short_config(std::size_t T) {
  pendulum::PendulumConfig c;
  c.horizon = T;
  return c;
}

RunConfig run_config(std::size_t N, std::size_t M, double eta = 0.6, double lambda = 0.2) {
  RunConfig r;
  r.N = N;
  r.M = M;
  r.eta = eta;
  r.slew_penalty = lambda;
  return r;
}

// Parameters scaled up from the initialization so that the policy actually depends on history.
PolicyParams lively_params(const Policy& policy, std::uint64_t seed) {
  RngStream rng(seed);
  PolicyParams p = policy.init(rng);
  for (Eigen::Index i = 0; i < p.size(); ++i) p[i] += 0.5 * rng.normal();
  return p;
}

struct SmootherCase {
  oracle::NoisyPendulumModel model;
  std::unique_ptr<Policy> policy;
  PolicyParams params;
  FilterContext ctx;
  FilterHistory history;

  SmootherCase(std::size_t T, std::size_t N, std::size_t M, PolicyArchConfig arch, std::uint64_t seed, double eta = 0.6)
      : model(short_config(T), 0.02),
        policy(make_policy(arch)),
        params(lively_params(*policy, seed)),
        ctx(model, *policy, params, run_config(N, M, eta)),
        history([&] {
          RngStream rng(seed, 1);
          return run_filter(ctx, rng);
        }()) {}
};

}  // namespace

TEST(BackwardWeight, FinalStepIsZero) {
  SmootherCase s(4, 5, 8, tiny_recurrent(), 1);
  const BackwardSampler bs(s.ctx, s.history);
  for (std::size_t n = 0; n < 5; ++n) {
    EXPECT_EQ(bs.weight_full(4, n, {}), 0.0);
    EXPECT_EQ(bs.weight_fast(4, n, {}), 0.0);
  }
  const std::size_t wrong[] = {0, 1};
  EXPECT_THROW(bs.weight_full(2, 0, std::span<const std::size_t>(wrong, 1)), std::invalid_argument);
}

TEST(BackwardWeight, FastAndFullDifferByPrefixIndependentConstant) {
  SmootherCase s(5, 6, 8, tiny_recurrent(), 2);
  const BackwardSampler bs(s.ctx, s.history);
  RngStream rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t t = rng.index(5);
    std::vector<std::size_t> suffix(5 - t);
    for (auto& i : suffix) i = rng.index(6);
    double offset = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t n = 0; n < 6; ++n) {
      const double full = bs.weight_full(t, n, suffix);
      const double fast = bs.weight_fast(t, n, suffix);
      ASSERT_EQ(full == -kInf, fast == -kInf);
      if (full == -kInf) continue;
      if (std::isnan(offset)) offset = full - fast;
      EXPECT_NEAR(full - fast, offset, 1e-8);
    }
  }
}

TEST(BackwardWeight, FullWeightIsSumOfBlocksAndPolicyTerms) {
  SmootherCase s(3, 4, 4, tiny_recurrent(), 4);
  const BackwardSampler bs(s.ctx, s.history);
  const auto& fr = s.history.frames;
  const std::vector<std::size_t> suffix{2, 0, 3};
  for (std::size_t n = 0; n < 4; ++n) {
    std::vector<const OuterParticle*> path{&fr[0].particles[n], &fr[1].particles[2], &fr[2].particles[0],
                                           &fr[3].particles[3]};
    double expected = 0.0;
    Trajectory z;
    for (std::size_t t = 0; t < 3; ++t) expected += bs.transition_block(*path[t], *path[t + 1]);
    for (const auto* p : path) z.push_back(p->z);
    for (std::size_t t = 0; t < 3; ++t) {
      const auto state = s.policy->state_after(s.params, std::span<const AugmentedState>(z.data(), t + 1));
      expected += s.policy->logpdf(s.params, state, *z[t + 1].xi_prev);
    }
    EXPECT_NEAR(bs.weight_full(0, n, suffix), expected, 1e-9);
  }
}

TEST(BackwardWeight, TransitionBlockByHand) {
  SmootherCase s(2, 3, 3, tiny_recurrent(), 5);
  const BackwardSampler bs(s.ctx, s.history);
  const auto& prev = s.history.frames[1].particles[1];
  const auto& next = s.history.frames[2].particles[0];
  const double xi = *next.z.xi_prev;
  const double lm = marginal_transition_logpdf(prev, s.model, xi, next.z.x);
  std::vector<double> lf;
  for (const auto& th : prev.cloud.particles) lf.push_back(s.model.transition_logpdf(next.z.x, prev.z.x, xi, th));
  const Theta sd = s.history.jitter.std_dev();
  const long double rb = oracle::rb_enumeration(prev.cloud.particles, LogWeights(lf).normalized(),
                                                next.cloud.particles, sd);
  const double d = xi - *prev.z.xi_prev;
  EXPECT_NEAR(bs.transition_block(prev, next), 0.4 * lm - 0.2 * d * d + static_cast<double>(rb), 1e-9);
}

TEST(BackwardWeight, MemorylessPolicyUsesOnlyFirstBlock) {
  PolicyArchConfig a;
  a.kind = PolicyKind::linear;
  SmootherCase s(4, 4, 4, a, 6);
  const BackwardSampler bs(s.ctx, s.history);
  const std::vector<std::size_t> suffix{1, 3, 0};
  for (std::size_t n = 0; n < 4; ++n) {
    const auto& prev = s.history.frames[1].particles[n];
    const auto& next = s.history.frames[2].particles[1];
    const double pol = s.policy->logpdf(s.params, prev.policy_state, *next.z.xi_prev);
    EXPECT_NEAR(bs.weight_fast(1, n, suffix), bs.transition_block(prev, next) + pol, 1e-12);
  }
}

TEST(BackwardWeight, RealizedAncestorIsFiniteOnPendulum) {
  pendulum::PendulumModel model(short_config(6));
  UniformRandomPolicy policy;
  const PolicyParams params(0);
  const FilterContext ctx(model, policy, params, run_config(8, 16));
  RngStream rng(7);
  const auto h = run_filter(ctx, rng);
  const BackwardSampler bs(ctx, h);
  for (std::size_t n = 0; n < 8; ++n) {
    const auto idx = trace_indices(h, n);
    for (std::size_t t = 0; t < 6; ++t)
      EXPECT_GT(bs.weight_full(t, idx[t], std::span<const std::size_t>(idx).subspan(t + 1)), -kInf);
  }
}

TEST(BackwardSampler, SingleParticleReturnsGenealogy) {
  SmootherCase s(5, 1, 4, tiny_recurrent(), 8);
  const BackwardSampler bs(s.ctx, s.history);
  RngStream rng(9);
  BackwardStats st;
  const auto b = bs.sample(rng, std::nullopt, &st);
  EXPECT_EQ(b.indices, trace_indices(s.history, 0));
  EXPECT_EQ(st.trivial, st.steps);
  EXPECT_EQ(st.acceptance_rate(), 0.0);
}

TEST(BackwardSampler, PathLawMatchesEnumeration) {
  SmootherCase s(3, 3, 2, tiny_recurrent(), 10, 0.3);
  const BackwardSampler bs(s.ctx, s.history);
  const std::size_t final_index = 1;
  const auto law = oracle::backward_path_law(bs, s.history, final_index);
  std::vector<std::vector<std::size_t>> keys;
  std::vector<double> probs;
  double total = 0.0;
  for (const auto& [k, p] : law) {
    keys.push_back(k);
    probs.push_back(p);
    total += p;
  }
  ASSERT_NEAR(total, 1.0, 1e-12);
  ASSERT_GT(keys.size(), 3u);

  const std::size_t passes = 40000;
  std::vector<std::size_t> finals(passes, final_index);
  BackwardStats st;
  const auto paths = bs.sample_many(finals, RngStream(11), &st);
  std::vector<std::size_t> counts(keys.size(), 0);
  for (const auto& p : paths) {
    const auto it = law.find(p.indices);
    ASSERT_NE(it, law.end());
    ++counts[static_cast<std::size_t>(std::distance(law.begin(), it))];
  }
  EXPECT_GT(oracle::chi_square_test(counts, probs).p_value, 0.001);
  EXPECT_GT(st.accepted, 0u);
  EXPECT_GE(st.acceptance_rate(), 0.0);
  EXPECT_LE(st.acceptance_rate(), 1.0);
}

TEST(BackwardSampler, SampleManyIsReproducibleAndPassesAreIndependent) {
  SmootherCase s(4, 5, 4, tiny_recurrent(), 12);
  const BackwardSampler bs(s.ctx, s.history);
  const std::vector<std::size_t> finals{0, 4, 2};
  const RngStream rng(13);
  const auto a = bs.sample_many(finals, rng);
  EXPECT_EQ(a, bs.sample_many(finals, rng));
  const auto prefix = bs.sample_many(std::span<const std::size_t>(finals).first(2), rng);
  EXPECT_EQ(prefix[0], a[0]);
  EXPECT_EQ(prefix[1], a[1]);
  for (std::size_t b = 0; b < finals.size(); ++b) EXPECT_EQ(a[b].indices.back(), finals[b]);
}

TEST(BackwardSampler, RejectsUnsupportedStrategies) {
  pendulum::PendulumModel model(short_config(3));
  UniformRandomPolicy policy;
  const PolicyParams params(0);
  RunConfig r = run_config(4, 1);
  r.strategy = ThetaStrategy::exact;
  const FilterContext ctx(model, policy, params, r);
  RngStream rng(14);
  const auto h = run_filter(ctx, rng);
  EXPECT_THROW(BackwardSampler(ctx, h), std::invalid_argument);
}

TEST(Degeneracy, UniqueCounts) {
  const std::vector<BackwardTrajectory> t{{{0, 1, 2}}, {{0, 1, 1}}, {{0, 2, 0}}};
  EXPECT_EQ(unique_counts(t), (std::vector<std::size_t>{1, 2, 3}));
  EXPECT_TRUE(unique_counts({}).empty());
}

TEST(Degeneracy, ReportComparesTracingAndBackward) {
  SmootherCase s(6, 8, 4, tiny_recurrent(), 15);
  const BackwardSampler bs(s.ctx, s.history);
  std::vector<std::size_t> finals(8);
  for (std::size_t n = 0; n < 8; ++n) finals[n] = n;
  const auto back = bs.sample_many(finals, RngStream(16));
  const auto r = degeneracy_report(s.history, back);
  ASSERT_EQ(r.tracing.size(), 7u);
  ASSERT_EQ(r.backward.size(), 7u);
  EXPECT_EQ(r.tracing.back(), 8u);
  EXPECT_EQ(r.backward.back(), 8u);
  for (std::size_t t = 0; t + 1 < r.tracing.size(); ++t) EXPECT_LE(r.tracing[t], r.tracing[t + 1]);
  for (auto c : r.backward) {
    EXPECT_GE(c, 1u);
    EXPECT_LE(c, 8u);
  }
}
