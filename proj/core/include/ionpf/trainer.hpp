#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionpf/filter.hpp"
#include "ionpf/smoother.hpp"

namespace ionpf {

/// Non-finite gradient or parameters during training.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Smoothing { tracing, backward };
enum class Optimizer { sga, adam };

std::string to_string(Smoothing s);
Smoothing smoothing_from_string(const std::string& name);
std::string to_string(Optimizer o);
Optimizer optimizer_from_string(const std::string& name);

struct TrainerConfig {
  std::size_t iterations = 25;
  /// Step size gamma (or the base of gamma / k with decay).
  double learning_rate = 1e-3;
  bool decay = false;
  /// Average the score over all N returned trajectories with their final
  /// weights; otherwise use the single new reference.
  bool rao_blackwell = true;
  Smoothing smoothing = Smoothing::backward;
  Optimizer optimizer = Optimizer::sga;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_epsilon = 1e-8;

  void validate() const;
  bool operator==(const TrainerConfig&) const = default;
};

struct TrainState {
  PolicyParams params;
  ParticlePath reference;
  std::size_t iteration = 0;
  Eigen::VectorXd adam_m;
  Eigen::VectorXd adam_v;
};

/// Output of one conditional sweep.
struct SweepResult {
  FilterHistory history;
  std::vector<BackwardTrajectory> trajectories;
  /// Normalized final weights of the trajectories.
  std::vector<double> weights;
  ParticlePath reference;
  BackwardStats stats;
};

/// Conditional sweep with slot 0 pinned to `reference`, followed by
/// trajectory extraction. Trajectory n starts from final slot n; the new
/// reference is drawn among them with the final weights.
SweepResult csmc_step(const FilterContext& ctx, const ParticlePath& reference, Smoothing smoothing,
                      RngStream& rng);

/// One forward rollout (N = 1, eta = 0) under the current policy.
ParticlePath initial_reference(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                               const RunConfig& run, RngStream& rng);

struct IterationLog {
  std::size_t iteration = 0;
  /// Weighted mean over the returned trajectories of sum_t -log p^M(x_t | .),
  /// less T times the transition entropy when the model provides it.
  double eig_proxy = 0.0;
  double grad_norm = 0.0;
  double acceptance_rate = 0.0;
  double log_evidence = 0.0;
  double wall_seconds = 0.0;
};

/// Sum over t of -log p^M(x_t | y_{t-1}, xi_{t-1}) along a path, recomputed
/// from each particle's predecessor on the path.
double path_reward(const StateSpaceModel& model, const ParticlePath& path);

/// One MSC iteration: conditional sweep, score, ascent step.
IterationLog msc_iterate(TrainState& state, const StateSpaceModel& model, const Policy& policy, const RunConfig& run,
                         const TrainerConfig& cfg, RngStream& rng);

struct TrainResult {
  TrainState state;
  std::vector<IterationLog> log;
};

/// `rng.child(0)` draws the initial reference, `rng.child(k)` drives iteration k.
TrainResult train(const StateSpaceModel& model, const Policy& policy, const PolicyParams& initial, const RunConfig& run,
                  const TrainerConfig& cfg, const RngStream& rng,
                  const std::function<void(const IterationLog&)>& on_iteration = {});

}  // namespace ionpf
