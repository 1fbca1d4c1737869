#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ionpf/filter.hpp"

namespace ionpf {

/// Selected slot I_t at every time t = 0..T.
struct BackwardTrajectory {
  std::vector<std::size_t> indices;

  bool operator==(const BackwardTrajectory&) const = default;
};

struct BackwardStats {
  /// Backward steps taken.
  std::size_t steps = 0;
  /// Steps whose proposal was the ancestor itself.
  std::size_t trivial = 0;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  /// Policy forward evaluations (one per column per step or log-density call).
  std::size_t policy_evaluations = 0;

  /// accepted / (accepted + rejected); zero when every proposal was trivial.
  double acceptance_rate() const;
  BackwardStats& operator+=(const BackwardStats& other);
};

/// Backward simulation over a frozen filter history with one independent
/// Metropolis-Hastings step per time index: propose I_t from the filtering
/// weights, accept against the true ancestor with the ratio of backward
/// weights, otherwise keep the ancestor.
///
/// The backward weight of prefix n at time t joined to the suffix
/// I_{t+1..T} is the product over s = t+1..T of
///   pi(xi_{s-1} | z_{0:s-1}) * p^M(x_s | y_{s-1})^(1 - eta)
///     * exp(-lambda (xi_{s-1} - xi_{s-2})^2) * Gamma(theta_s | theta_{s-1})
/// with Gamma the theta transition with resampling indices summed out. The
/// fast weight keeps only the s = t+1 block and the policy terms beyond it,
/// which are the only factors that depend on the prefix.
///
/// Requires the npf strategy without a clamp box.
class BackwardSampler {
 public:
  BackwardSampler(const FilterContext& ctx, const FilterHistory& history);

  /// Non-policy factors of one transition prev -> next.
  double transition_block(const OuterParticle& prev, const OuterParticle& next) const;

  /// `suffix` holds I_{t+1}, ..., I_T.
  double weight_full(std::size_t t, std::size_t n, std::span<const std::size_t> suffix,
                     BackwardStats* stats = nullptr) const;
  double weight_fast(std::size_t t, std::size_t n, std::span<const std::size_t> suffix,
                     BackwardStats* stats = nullptr) const;

  /// One backward pass. Without `final_index`, I_T is drawn from the final weights.
  BackwardTrajectory sample(RngStream& rng, std::optional<std::size_t> final_index = std::nullopt,
                            BackwardStats* stats = nullptr) const;

  /// One pass per entry of `final_indices`, pass b using rng.child(b). The
  /// passes run in lockstep so policy evaluations are batched.
  std::vector<BackwardTrajectory> sample_many(std::span<const std::size_t> final_indices, const RngStream& rng,
                                              BackwardStats* stats = nullptr) const;

 private:
  struct Query {
    std::size_t n;
    std::span<const std::size_t> suffix;
  };
  /// Policy log-densities of the suffix designs for each query, all at time t.
  /// With `first_only`, only the s = t+1 term.
  Eigen::VectorXd policy_terms(std::size_t t, std::span<const Query> queries, bool first_only,
                               BackwardStats* stats) const;

  const FilterContext& ctx_;
  const FilterHistory& history_;
};

/// Genealogies of every final slot.
std::vector<BackwardTrajectory> traced_trajectories(const FilterHistory& history);

/// Number of distinct slots at each t across the trajectories.
std::vector<std::size_t> unique_counts(std::span<const BackwardTrajectory> trajectories);

struct DegeneracyReport {
  std::vector<std::size_t> tracing;
  std::vector<std::size_t> backward;
};

/// Per-t unique counts of ancestor tracing (all final slots) against the given
/// backward trajectories.
DegeneracyReport degeneracy_report(const FilterHistory& history, std::span<const BackwardTrajectory> backward);

}  // namespace ionpf
