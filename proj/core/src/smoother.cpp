#include "ionpf/smoother.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"

namespace ionpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

struct Pending {
  std::size_t pass;
  std::size_t proposal;
  std::size_t ancestor;
  double proposal_block;
  double ancestor_block = 0.0;
};

}  // namespace

double BackwardStats::acceptance_rate() const {
  const std::size_t n = accepted + rejected;
  return n == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(n);
}

BackwardStats& BackwardStats::operator+=(const BackwardStats& o) {
  steps += o.steps;
  trivial += o.trivial;
  accepted += o.accepted;
  rejected += o.rejected;
  policy_evaluations += o.policy_evaluations;
  return *this;
}

BackwardSampler::BackwardSampler(const FilterContext& ctx, const FilterHistory& history)
    : ctx_(ctx), history_(history) {
  if (history.frames.empty()) throw std::invalid_argument("backward sampler: empty history");
  if (history.config.strategy != ThetaStrategy::npf)
    throw std::invalid_argument("backward sampler: only the npf strategy has a tractable theta transition");
  if (history.jitter.clamp) throw std::invalid_argument("backward sampler: clamped jitter has no density");
}

double BackwardSampler::transition_block(const OuterParticle& prev, const OuterParticle& next) const {
  if (!next.z.xi_prev) throw std::invalid_argument("backward sampler: particle is missing its design");
  const double xi = *next.z.xi_prev;
  std::vector<double> lf(prev.cloud.size());
  for (std::size_t m = 0; m < lf.size(); ++m)
    lf[m] = ctx_.model.transition_logpdf(next.z.x, prev.z.x, xi, prev.cloud.particles[m]);
  const double lm = log_mean_exp(lf);
  if (lm == kNegInf) return kNegInf;
  const double eta = history_.config.eta;
  double w = (1.0 - eta) * lm;
  if (prev.z.xi_prev) {
    const double d = xi - *prev.z.xi_prev;
    w -= history_.config.slew_penalty * d * d;
  }
  const double rb = rb_transition_logpdf(prev.cloud.particles, LogWeights(std::move(lf)), next.cloud.particles,
                                         history_.jitter);
  return rb == kNegInf ? kNegInf : w + rb;
}

Eigen::VectorXd BackwardSampler::policy_terms(std::size_t t, std::span<const Query> queries, bool first_only,
                                              BackwardStats* stats) const {
  const auto& frames = history_.frames;
  const auto& policy = ctx_.policy;
  const std::size_t T = history_.horizon();
  const auto B = static_cast<Eigen::Index>(queries.size());
  Eigen::MatrixXd state(static_cast<Eigen::Index>(policy.state_dim()), B);
  std::vector<double> xi(queries.size());
  for (std::size_t b = 0; b < queries.size(); ++b) {
    state.col(static_cast<Eigen::Index>(b)) = frames[t].particles[queries[b].n].policy_state;
    xi[b] = *frames[t + 1].particles[queries[b].suffix[0]].z.xi_prev;
  }
  Eigen::VectorXd total = policy.logpdf_batch(ctx_.params, state, xi);
  std::size_t evals = queries.size();
  if (!first_only) {
    std::vector<AugmentedState> z(queries.size());
    for (std::size_t s = t + 2; s <= T; ++s) {
      for (std::size_t b = 0; b < queries.size(); ++b) {
        const auto& sfx = queries[b].suffix;
        z[b] = frames[s - 1].particles[sfx[s - 1 - (t + 1)]].z;
        xi[b] = *frames[s].particles[sfx[s - (t + 1)]].z.xi_prev;
      }
      state = policy.step_batch(ctx_.params, state, z);
      total += policy.logpdf_batch(ctx_.params, state, xi);
      evals += 2 * queries.size();
    }
  }
  if (stats) stats->policy_evaluations += evals;
  return total;
}

double BackwardSampler::weight_full(std::size_t t, std::size_t n, std::span<const std::size_t> suffix,
                                    BackwardStats* stats) const {
  const std::size_t T = history_.horizon();
  if (t > T || suffix.size() != T - t) throw std::invalid_argument("backward weight: suffix length mismatch");
  if (t == T) return 0.0;
  const auto& frames = history_.frames;
  double w = transition_block(frames[t].particles.at(n), frames[t + 1].particles.at(suffix[0]));
  for (std::size_t s = t + 2; s <= T && w > kNegInf; ++s)
    w += transition_block(frames[s - 1].particles[suffix[s - 2 - t]], frames[s].particles[suffix[s - 1 - t]]);
  if (w == kNegInf) return kNegInf;
  const Query q{n, suffix};
  return w + policy_terms(t, std::span<const Query>(&q, 1), false, stats)[0];
}

double BackwardSampler::weight_fast(std::size_t t, std::size_t n, std::span<const std::size_t> suffix,
                                    BackwardStats* stats) const {
  const std::size_t T = history_.horizon();
  if (t > T || suffix.size() != T - t) throw std::invalid_argument("backward weight: suffix length mismatch");
  if (t == T) return 0.0;
  const auto& frames = history_.frames;
  const double w = transition_block(frames[t].particles.at(n), frames[t + 1].particles.at(suffix[0]));
  if (w == kNegInf) return kNegInf;
  const Query q{n, suffix};
  return w + policy_terms(t, std::span<const Query>(&q, 1), ctx_.policy.memoryless(), stats)[0];
}

BackwardTrajectory BackwardSampler::sample(RngStream& rng, std::optional<std::size_t> final_index,
                                           BackwardStats* stats) const {
  const std::size_t start = final_index ? *final_index : sample_index(history_.frames.back().log_weights, rng);
  const std::size_t one[] = {start};
  const RngStream pass(rng.seed(), rng());
  return sample_many(one, pass, stats).front();
}

std::vector<BackwardTrajectory> BackwardSampler::sample_many(std::span<const std::size_t> final_indices,
                                                             const RngStream& rng, BackwardStats* stats) const {
  const auto& frames = history_.frames;
  const std::size_t T = history_.horizon();
  const std::size_t B = final_indices.size();
  const bool memoryless = ctx_.policy.memoryless();
  std::vector<BackwardTrajectory> out(B);
  std::vector<RngStream> rngs;
  rngs.reserve(B);
  for (std::size_t b = 0; b < B; ++b) {
    if (final_indices[b] >= frames.back().size()) throw std::out_of_range("backward sampler: final index");
    out[b].indices.assign(T + 1, 0);
    out[b].indices[T] = final_indices[b];
    rngs.push_back(rng.child(b));
  }
  BackwardStats local;

  for (std::size_t t = T; t-- > 0;) {
    std::vector<Pending> pending;
    for (std::size_t b = 0; b < B; ++b) {
      auto& idx = out[b].indices;
      const std::size_t a = frames[t + 1].particles[idx[t + 1]].ancestor;
      const std::size_t j = sample_index(frames[t].log_weights, rngs[b]);
      ++local.steps;
      idx[t] = a;
      if (j == a) {
        ++local.trivial;
      } else {
        pending.push_back({b, j, a, 0.0});
      }
    }
    detail::parallel_for(pending.size(), [&](std::size_t i) {
      auto& p = pending[i];
      const auto& next = frames[t + 1].particles[out[p.pass].indices[t + 1]];
      p.proposal_block = transition_block(frames[t].particles[p.proposal], next);
      if (p.proposal_block > kNegInf) p.ancestor_block = transition_block(frames[t].particles[p.ancestor], next);
    });

    std::vector<Query> queries;
    std::vector<std::size_t> live;
    for (std::size_t i = 0; i < pending.size(); ++i) {
      if (pending[i].proposal_block == kNegInf) {
        ++local.rejected;
        continue;
      }
      live.push_back(i);
    }
    for (std::size_t i : live) {
      const auto& p = pending[i];
      queries.push_back({p.proposal, std::span<const std::size_t>(out[p.pass].indices).subspan(t + 1)});
    }
    for (std::size_t i : live) {
      const auto& p = pending[i];
      queries.push_back({p.ancestor, std::span<const std::size_t>(out[p.pass].indices).subspan(t + 1)});
    }
    if (live.empty()) continue;
    const Eigen::VectorXd pol = policy_terms(t, queries, memoryless, &local);
    for (std::size_t k = 0; k < live.size(); ++k) {
      const auto& p = pending[live[k]];
      const double wj = p.proposal_block + pol[static_cast<Eigen::Index>(k)];
      const double wa = p.ancestor_block + pol[static_cast<Eigen::Index>(k + live.size())];
      const double u = rngs[p.pass].uniform();
      if (wj > kNegInf && (wa == kNegInf || std::log(u) < wj - wa)) {
        out[p.pass].indices[t] = p.proposal;
        ++local.accepted;
      } else {
        ++local.rejected;
      }
    }
  }
  if (stats) *stats += local;
  return out;
}

std::vector<BackwardTrajectory> traced_trajectories(const FilterHistory& history) {
  std::vector<BackwardTrajectory> out(history.num_particles());
  for (std::size_t n = 0; n < out.size(); ++n) out[n].indices = trace_indices(history, n);
  return out;
}

std::vector<std::size_t> unique_counts(std::span<const BackwardTrajectory> trajectories) {
  if (trajectories.empty()) return {};
  const std::size_t len = trajectories.front().indices.size();
  std::vector<std::size_t> counts(len);
  std::vector<std::size_t> col(trajectories.size());
  for (std::size_t t = 0; t < len; ++t) {
    for (std::size_t b = 0; b < trajectories.size(); ++b) col[b] = trajectories[b].indices.at(t);
    std::sort(col.begin(), col.end());
    counts[t] = static_cast<std::size_t>(std::unique(col.begin(), col.end()) - col.begin());
  }
  return counts;
}

DegeneracyReport degeneracy_report(const FilterHistory& history, std::span<const BackwardTrajectory> backward) {
  const auto traced = traced_trajectories(history);
  DegeneracyReport r;
  r.tracing = unique_counts(traced);
  r.backward = backward.empty() ? std::vector<std::size_t>(history.frames.size(), 0) : unique_counts(backward);
  return r;
}

}  // namespace ionpf
