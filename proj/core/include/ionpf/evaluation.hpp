#pragma once

#include <map>
#include <string>
#include <vector>

#include "ionpf/filter.hpp"
#include "ionpf/pendulum.hpp"
#include "ionpf/policy.hpp"
#include "ionpf/trainer.hpp"

namespace ionpf {

/// Mean and sample standard deviation of i.i.d. replicate values.
struct Estimate {
  double mean = 0.0;
  double std = 0.0;
  std::vector<double> samples;

  static Estimate from_samples(std::vector<double> samples);
  double standard_error() const;
};

struct EigConfig {
  std::size_t rollouts = 16;
  std::size_t M = 1024;
  ThetaStrategy strategy = ThetaStrategy::npf;
  double jitter_factor = 0.5;
};

struct EigEstimate {
  /// Per rollout sum_t -log p^M(x_t | z_{0:t-1}, xi_{t-1}).
  Estimate raw;
  /// raw minus T times the transition entropy (the information in nats);
  /// equal to raw when the model has no static transition entropy.
  Estimate information;
};

/// Independent marginal rollouts (N = 1, eta = 0), rollout i on rng.child(i).
EigEstimate eig_estimate(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                         const EigConfig& cfg, const RngStream& rng);

struct SpceConfig {
  std::size_t rollouts = 16;
  std::size_t contrastive = 100000;
};

/// log[l(theta_0) / ((1/(L+1)) sum_{l=0}^{L} l(theta_l))] per rollout with
/// theta_0 generating the data and theta_{1:L} fresh prior draws.
Estimate spce_estimate(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                       const SpceConfig& cfg, const RngStream& rng);

struct IgCurve {
  /// Index t = 0..T.
  std::vector<double> mean;
  std::vector<double> std;
  /// Realized gain at T for every replication.
  std::vector<double> final_values;
};

/// Closed-form information gain 0.5 log det Sigma_0 - 0.5 log det Sigma_t
/// along rollouts against theta* drawn from the prior.
IgCurve realized_ig_curve(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                          std::size_t replications, const RngStream& rng);

/// Algorithms timed by the benchmark: npf, npf-bs, ibis, exact.
struct BenchConfig {
  std::vector<std::size_t> horizons{25, 50};
  std::vector<std::string> algorithms{"npf", "npf-bs", "ibis", "exact"};
  std::size_t N = 32;
  std::size_t M = 32;
  std::size_t repeats = 3;
  PolicyArchConfig arch;
  RunConfig run;
};

struct BenchRow {
  std::string algorithm;
  std::size_t horizon = 0;
  double median_seconds = 0.0;
  std::size_t repeats = 0;
};

struct BenchResult {
  std::vector<BenchRow> rows;
  /// Log-log slope of median time against T for each algorithm.
  std::map<std::string, double> exponents;
};

/// Least-squares slope of log y against log x.
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

/// Run and trainer settings for one benchmark algorithm name.
std::pair<RunConfig, TrainerConfig> algorithm_settings(const std::string& algorithm, const RunConfig& base);

/// Median wall time of one amortization iteration per algorithm and horizon.
BenchResult runtime_benchmark(const pendulum::PendulumConfig& model_cfg, const BenchConfig& cfg,
                              const RngStream& rng);

}  // namespace ionpf
