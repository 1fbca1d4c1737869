#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "ionpf/random.hpp"
#include "ionpf/weights.hpp"
#include "oracles.hpp"

using namespace ionpf;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) ASSERT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsDiffer) {
  RngStream a(42, 0), b(42, 1);
  int equal = 0;
  for (int i = 0; i < 100; ++i) equal += a() == b();
  EXPECT_EQ(equal, 0);
}

TEST(RngStream, ChildDoesNotAdvanceParent) {
  RngStream a(3), b(3);
  (void)a.child(5);
  EXPECT_EQ(a(), b());
  EXPECT_EQ(a.child(9)(), b.child(9)());
}

TEST(RngStream, StreamsAreUncorrelated) {
  RngStream a(11, 0), b(11, 1);
  const int n = 100000;
  double sab = 0, sa = 0, sb = 0;
  for (int i = 0; i < n; ++i) {
    const double u = a.uniform() - 0.5, v = b.uniform() - 0.5;
    sab += u * v;
    sa += u * u;
    sb += v * v;
  }
  EXPECT_LT(std::abs(sab / std::sqrt(sa * sb)), 4.0 / std::sqrt(n));
}

TEST(RngStream, IndexInRange) {
  RngStream r(1);
  for (int i = 0; i < 1000; ++i) ASSERT_LT(r.index(7), 7u);
}

TEST(LogSumExp, Pairs) {
  const double two[] = {0.0, 0.0};
  EXPECT_NEAR(log_sum_exp(two), std::log(2.0), 1e-15);
  const double one[] = {0.0};
  EXPECT_EQ(log_sum_exp(one), 0.0);
}

TEST(LogSumExp, LargeOffsetMatchesExtendedPrecision) {
  const double xs[] = {-1000.0, -1000.5};
  const long double oracle = -1000.0L + std::log1p(std::exp(-0.5L));
  EXPECT_NEAR(log_sum_exp(xs), static_cast<double>(oracle), 1e-12);
}

TEST(LogSumExp, EmptyThrows) { EXPECT_THROW(log_sum_exp(std::span<const double>{}), std::invalid_argument); }

TEST(LogSumExp, AllNegativeInfinity) {
  const double xs[] = {-kInf, -kInf};
  EXPECT_EQ(log_sum_exp(xs), -kInf);
}

TEST(LogWeights, NormalizedSumsToOne) {
  RngStream r(5);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(1 + r.index(50));
    for (double& x : v) x = 300.0 * (r.uniform() - 0.5);
    const auto w = LogWeights(v).normalized();
    double s = 0;
    for (double x : w) s += x;
    ASSERT_NEAR(s, 1.0, 1e-12);
  }
}

TEST(LogWeights, DegenerateThrows) {
  const LogWeights w({-kInf, -kInf});
  EXPECT_THROW(w.normalized(), DegenerateWeightsError);
  RngStream r(0);
  EXPECT_THROW(multinomial_resample(w, 3, r), DegenerateWeightsError);
}

TEST(LogWeights, EffectiveSampleSize) {
  EXPECT_NEAR(effective_sample_size(LogWeights::uniform(9)), 9.0, 1e-12);
  EXPECT_NEAR(effective_sample_size(LogWeights({0.0, -kInf, -kInf})), 1.0, 1e-12);
  EXPECT_NEAR(effective_sample_size(LogWeights({std::log(0.75), std::log(0.25)})), 1.0 / (0.5625 + 0.0625), 1e-12);
}

TEST(LogWeights, EssWithinBounds) {
  RngStream r(8);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> v(20);
    for (double& x : v) x = 10.0 * r.normal();
    const double ess = effective_sample_size(LogWeights(v));
    ASSERT_GE(ess, 1.0 - 1e-12);
    ASSERT_LE(ess, 20.0 + 1e-12);
  }
}

TEST(MultinomialResample, PointMass) {
  RngStream r(2);
  const auto idx = multinomial_resample(LogWeights({-kInf, -kInf, -kInf, 0.0}), 100, r);
  for (auto i : idx) ASSERT_EQ(i, 3u);
}

TEST(MultinomialResample, UniformFrequencies) {
  RngStream r(3);
  const std::size_t n = 100000;
  const auto idx = multinomial_resample(LogWeights::uniform(4), n, r);
  std::vector<std::size_t> counts(4, 0);
  for (auto i : idx) ++counts[i];
  const double sd = std::sqrt(n * 0.25 * 0.75);
  for (auto c : counts) EXPECT_LT(std::abs(static_cast<double>(c) - n * 0.25), 3.0 * sd);
}

TEST(MultinomialResample, Reproducible) {
  RngStream a(77), b(77);
  EXPECT_EQ(multinomial_resample(LogWeights({0.0, 0.0}), 50, a), multinomial_resample(LogWeights({0.0, 0.0}), 50, b));
}

TEST(MultinomialResample, UnbiasedForBoundedFunction) {
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  std::vector<double> lp;
  for (double v : p) lp.push_back(std::log(v) + 17.0);
  const std::vector<double> f{1.0, -2.0, 0.5, 3.0};
  double target = 0.0, var = 0.0;
  for (std::size_t i = 0; i < 4; ++i) target += p[i] * f[i];
  for (std::size_t i = 0; i < 4; ++i) var += p[i] * (f[i] - target) * (f[i] - target);
  RngStream r(4);
  const std::size_t n = 100000;
  double mean = 0.0;
  for (auto i : multinomial_resample(LogWeights(lp), n, r)) mean += f[i];
  mean /= n;
  EXPECT_LT(std::abs(mean - target), 3.0 * std::sqrt(var / n));
}

TEST(MultinomialResample, IndicesAreIndependent) {
  // Pairs of consecutive indices should follow the product law.
  const std::vector<double> p{0.5, 0.3, 0.2};
  std::vector<double> lp;
  for (double v : p) lp.push_back(std::log(v));
  RngStream r(6);
  const auto idx = multinomial_resample(LogWeights(lp), 200000, r);
  std::vector<std::size_t> counts(9, 0);
  std::vector<double> probs(9);
  for (std::size_t i = 0; i + 1 < idx.size(); i += 2) ++counts[3 * idx[i] + idx[i + 1]];
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) probs[3 * a + b] = p[a] * p[b];
  EXPECT_GT(oracle::chi_square_test(counts, probs).p_value, 0.01);
}
