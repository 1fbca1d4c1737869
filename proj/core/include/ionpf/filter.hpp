#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "ionpf/model.hpp"
#include "ionpf/policy.hpp"
#include "ionpf/random.hpp"
#include "ionpf/theta_filter.hpp"
#include "ionpf/weights.hpp"

namespace ionpf {

/// How each outer particle tracks p(theta | z_{0:t}).
///   npf   - reweight, resample and jitter (O(1) per step)
///   ibis  - reweight, resample and RWMH over the full history (O(t) per step)
///   exact - closed-form conjugate belief
enum class ThetaStrategy { npf, ibis, exact };

std::string to_string(ThetaStrategy s);
ThetaStrategy theta_strategy_from_string(const std::string& name);

struct RunConfig {
  std::size_t N = 32;
  std::size_t M = 128;
  /// Tempering exponent on the reward.
  double eta = 1.0;
  /// lambda in the potential term -lambda * (xi_t - xi_{t-1})^2.
  double slew_penalty = 0.1;
  ThetaStrategy strategy = ThetaStrategy::npf;
  IbisConfig ibis;
  /// Jitter base scale as a multiple of the prior standard deviation.
  double jitter_factor = 0.5;

  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// All outer weights vanished at step t.
class FilterCollapseError : public std::runtime_error {
 public:
  FilterCollapseError(std::size_t t, const std::string& what);
  std::size_t step() const noexcept { return t_; }

 private:
  std::size_t t_;
};

/// One outer particle y_t^n.
struct OuterParticle {
  AugmentedState z;
  /// Theta particles (npf, ibis).
  ThetaCloud cloud;
  /// Conjugate belief (exact).
  std::optional<GaussianBelief> belief;
  /// Policy state after consuming z_{0:t}.
  PolicyState policy_state;
  /// log p^M(x_t | ancestor, xi_{t-1}); zero at t = 0.
  double log_marginal = 0.0;
  std::size_t ancestor = 0;
};

struct FilterFrame {
  std::size_t t = 0;
  std::vector<OuterParticle> particles;
  LogWeights log_weights;

  std::size_t size() const noexcept { return particles.size(); }
};

struct FilterHistory {
  RunConfig config;
  JitterConfig jitter;
  std::vector<FilterFrame> frames;
  /// Sum over steps of the log mean potential.
  double log_evidence = 0.0;
  RwmhStats ibis_stats;

  std::size_t horizon() const { return frames.empty() ? 0 : frames.size() - 1; }
  std::size_t num_particles() const { return frames.empty() ? 0 : frames.front().size(); }
};

/// Everything the filter needs besides randomness. The model, policy and
/// parameters are borrowed and must outlive the context.
struct FilterContext {
  FilterContext(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params, RunConfig config);
  FilterContext(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params, RunConfig config,
                JitterConfig jitter);

  const StateSpaceModel& model;
  const Policy& policy;
  const PolicyParams& params;
  RunConfig config;
  JitterConfig jitter;
};

/// One selected particle per time step, t = 0..T.
using ParticlePath = std::vector<OuterParticle>;

/// eta * (-log_marginal) - lambda * (xi - xi_prev)^2; no penalty without a previous design.
double potential_log(double log_marginal, double xi, std::optional<double> xi_prev, double eta, double lambda);

/// log p^M(x_next | particle, xi): log-mean-exp of the transition density over
/// the cloud, or the conjugate predictive for a belief.
double marginal_transition_logpdf(const OuterParticle& particle, const StateSpaceModel& model, double xi,
                                  const State& x_next);

/// t = 0 frame. With a reference, slot 0 is pinned to it.
FilterFrame initial_frame(const FilterContext& ctx, RngStream& rng, const OuterParticle* reference = nullptr);

/// Advance from past.back() to the next time step. `past` holds frames 0..t-1
/// (the full record is needed to trace histories for the ibis strategy).
/// With a reference, slot 0 is pinned to it and keeps ancestor 0.
FilterFrame npf_step(const FilterContext& ctx, std::span<const FilterFrame> past, RngStream& rng,
                     const OuterParticle* reference = nullptr, RwmhStats* ibis_stats = nullptr);

/// Frames 0..T. With a reference path this is the conditional sweep.
FilterHistory run_filter(const FilterContext& ctx, RngStream& rng, const ParticlePath* reference = nullptr);

/// Ancestor indices I_0..I_T obtained by tracing back from slot n at time T.
std::vector<std::size_t> trace_indices(const FilterHistory& history, std::size_t n);
/// Ancestor indices I_0..I_t traced back from slot n of frame t.
std::vector<std::size_t> trace_indices(std::span<const FilterFrame> frames, std::size_t t, std::size_t n);

ParticlePath path_particles(const FilterHistory& history, std::span<const std::size_t> indices);
Trajectory path_states(const FilterHistory& history, std::span<const std::size_t> indices);
Trajectory path_states(const ParticlePath& path);

/// Genealogy of slot n at time T.
ParticlePath genealogy_trajectory(const FilterHistory& history, std::size_t n);

/// Exact (bitwise for finite values) equality, used for reproducibility checks.
bool operator==(const OuterParticle& a, const OuterParticle& b);
bool operator==(const FilterFrame& a, const FilterFrame& b);
bool operator==(const FilterHistory& a, const FilterHistory& b);

}  // namespace ionpf
