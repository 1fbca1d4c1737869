#include "ionpf/filter.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "parallel.hpp"

namespace ionpf {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Eigen::MatrixXd gather_states(const Policy& policy, std::span<const OuterParticle> particles,
                              std::span<const std::size_t> index) {
  Eigen::MatrixXd s(static_cast<Eigen::Index>(policy.state_dim()), static_cast<Eigen::Index>(index.size()));
  for (std::size_t b = 0; b < index.size(); ++b) s.col(static_cast<Eigen::Index>(b)) = particles[index[b]].policy_state;
  return s;
}

void assign_policy_states(const FilterContext& ctx, std::vector<OuterParticle>& out, const Eigen::MatrixXd& prev) {
  std::vector<AugmentedState> z;
  z.reserve(out.size());
  for (const auto& p : out) z.push_back(p.z);
  const Eigen::MatrixXd next = ctx.policy.step_batch(ctx.params, prev, z);
  for (std::size_t n = 0; n < out.size(); ++n) out[n].policy_state = next.col(static_cast<Eigen::Index>(n));
}

}  // namespace

std::string to_string(ThetaStrategy s) {
  switch (s) {
    case ThetaStrategy::npf: return "npf";
    case ThetaStrategy::ibis: return "ibis";
    case ThetaStrategy::exact: return "exact";
  }
  return "unknown";
}

ThetaStrategy theta_strategy_from_string(const std::string& name) {
  if (name == "npf") return ThetaStrategy::npf;
  if (name == "ibis") return ThetaStrategy::ibis;
  if (name == "exact") return ThetaStrategy::exact;
  throw std::invalid_argument("unknown theta strategy '" + name + "'");
}

void RunConfig::validate() const {
  if (N < 1) throw std::invalid_argument("run config: N must be >= 1");
  if (M < 1) throw std::invalid_argument("run config: M must be >= 1");
  if (!(eta >= 0.0) || !std::isfinite(eta)) throw std::invalid_argument("run config: eta must be >= 0");
  if (!(slew_penalty >= 0.0) || !std::isfinite(slew_penalty))
    throw std::invalid_argument("run config: slew_penalty must be >= 0");
  if (!(jitter_factor >= 0.0) || !std::isfinite(jitter_factor))
    throw std::invalid_argument("run config: jitter_factor must be >= 0");
  if (!(ibis.ridge >= 0.0)) throw std::invalid_argument("run config: ibis ridge must be >= 0");
}

FilterCollapseError::FilterCollapseError(std::size_t t, const std::string& what)
    : std::runtime_error("filter collapse at t=" + std::to_string(t) + ": " + what), t_(t) {}

FilterContext::FilterContext(const StateSpaceModel& model_, const Policy& policy_, const PolicyParams& params_,
                             RunConfig config_)
    : FilterContext(model_, policy_, params_, config_,
                    JitterConfig::from_prior(model_.prior(), config_.M, config_.jitter_factor)) {}

FilterContext::FilterContext(const StateSpaceModel& model_, const Policy& policy_, const PolicyParams& params_,
                             RunConfig config_, JitterConfig jitter_)
    : model(model_), policy(policy_), params(params_), config(std::move(config_)), jitter(std::move(jitter_)) {
  config.validate();
  jitter.validate();
  if (jitter.M != config.M) throw std::invalid_argument("filter: jitter M differs from run config M");
  if (static_cast<std::size_t>(params.size()) != policy.num_params())
    throw std::invalid_argument("filter: policy parameter count mismatch");
  if (config.strategy == ThetaStrategy::exact && model.conjugate() == nullptr)
    throw std::invalid_argument("filter: exact strategy needs a conjugate model");
}

double potential_log(double log_marginal, double xi, std::optional<double> xi_prev, double eta, double lambda) {
  double lg = eta == 0.0 ? 0.0 : -eta * log_marginal;
  if (xi_prev) lg -= lambda * (xi - *xi_prev) * (xi - *xi_prev);
  return lg;
}

double marginal_transition_logpdf(const OuterParticle& particle, const StateSpaceModel& model, double xi,
                                  const State& x_next) {
  if (particle.belief) return model.conjugate()->marginal_loglik(*particle.belief, particle.z.x, xi, x_next);
  std::vector<double> lf(particle.cloud.size());
  for (std::size_t m = 0; m < lf.size(); ++m)
    lf[m] = model.transition_logpdf(x_next, particle.z.x, xi, particle.cloud.particles[m]);
  return log_mean_exp(lf);
}

FilterFrame initial_frame(const FilterContext& ctx, RngStream& rng, const OuterParticle* reference) {
  const auto& cfg = ctx.config;
  FilterFrame frame;
  frame.t = 0;
  frame.particles.resize(cfg.N);
  detail::parallel_for(cfg.N, [&](std::size_t n) {
    OuterParticle& p = frame.particles[n];
    if (n == 0 && reference) {
      p = *reference;
    } else {
      RngStream r = rng.child(1, n);
      p.z = AugmentedState{ctx.model.initial_state(), std::nullopt};
      if (cfg.strategy == ThetaStrategy::exact) {
        p.belief = ctx.model.prior();
      } else {
        p.cloud = cloud_init(ctx.model.prior(), cfg.M, r);
      }
    }
    p.log_marginal = 0.0;
    p.ancestor = n;
  });
  assign_policy_states(ctx, frame.particles,
                       Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(ctx.policy.state_dim()),
                                             static_cast<Eigen::Index>(cfg.N)));
  frame.log_weights = LogWeights::uniform(cfg.N);
  return frame;
}

FilterFrame npf_step(const FilterContext& ctx, std::span<const FilterFrame> past, RngStream& rng,
                     const OuterParticle* reference, RwmhStats* ibis_stats) {
  if (past.empty()) throw std::invalid_argument("npf_step: no previous frame");
  const auto& cfg = ctx.config;
  const FilterFrame& prev = past.back();
  const std::size_t N = prev.size();
  const std::size_t t = prev.t + 1;

  RngStream resample_rng = rng.child(0);
  std::vector<std::size_t> ancestors = multinomial_resample(prev.log_weights, N, resample_rng);
  if (reference) ancestors[0] = 0;

  std::vector<RngStream> streams;
  streams.reserve(N);
  for (std::size_t n = 0; n < N; ++n) streams.push_back(rng.child(1, n));
  const Eigen::MatrixXd anc_states = gather_states(ctx.policy, prev.particles, ancestors);
  const auto designs = ctx.policy.sample_batch(ctx.params, anc_states, streams);

  FilterFrame frame;
  frame.t = t;
  frame.particles.resize(N);
  std::vector<double> lw(N, kNegInf);
  std::vector<RwmhStats> move_stats(N);

  detail::parallel_for(N, [&](std::size_t n) {
    const OuterParticle& anc = prev.particles[ancestors[n]];
    OuterParticle& p = frame.particles[n];
    RngStream& r = streams[n];
    const bool pinned = reference && n == 0;
    p.ancestor = ancestors[n];

    if (pinned) {
      p.z = reference->z;
      p.cloud = reference->cloud;
      p.belief = reference->belief;
      if (!p.z.xi_prev) throw std::invalid_argument("npf_step: reference is missing a design");
    }
    const double xi = pinned ? *p.z.xi_prev : designs[n].xi;

    if (cfg.strategy == ThetaStrategy::exact) {
      const auto* oracle = ctx.model.conjugate();
      if (!pinned) {
        const Theta theta = anc.belief->sample(r);
        p.z = AugmentedState{ctx.model.sample_transition(anc.z.x, xi, theta, r), xi};
      }
      p.log_marginal = oracle->marginal_loglik(*anc.belief, anc.z.x, xi, p.z.x);
      if (!pinned) p.belief = oracle->update(*anc.belief, anc.z.x, xi, p.z.x);
    } else {
      if (!pinned) {
        const Theta& theta = anc.cloud.particles[r.index(anc.cloud.size())];
        p.z = AugmentedState{ctx.model.sample_transition(anc.z.x, xi, theta, r), xi};
      }
      std::vector<double> lf(anc.cloud.size());
      for (std::size_t m = 0; m < lf.size(); ++m)
        lf[m] = ctx.model.transition_logpdf(p.z.x, anc.z.x, xi, anc.cloud.particles[m]);
      p.log_marginal = log_mean_exp(lf);
      if (!pinned) {
        const LogWeights reweight(std::move(lf));
        try {
          if (cfg.strategy == ThetaStrategy::npf) {
            p.cloud = cloud_step_npf(anc.cloud, reweight, ctx.jitter, r);
          } else {
            const auto idx = trace_indices(past, prev.t, ancestors[n]);
            Trajectory hist;
            hist.reserve(idx.size() + 1);
            for (std::size_t s = 0; s < idx.size(); ++s) hist.push_back(past[s].particles[idx[s]].z);
            hist.push_back(p.z);
            p.cloud = cloud_step_ibis(anc.cloud, reweight, ctx.model, hist, cfg.ibis, r, &move_stats[n]);
          }
        } catch (const DegenerateCloudError&) {
          p.cloud = anc.cloud;
          p.log_marginal = kNegInf;
        }
      }
    }
    if (p.log_marginal == kNegInf) {
      lw[n] = kNegInf;
    } else {
      lw[n] = potential_log(p.log_marginal, xi, anc.z.xi_prev, cfg.eta, cfg.slew_penalty);
    }
    if (std::isnan(lw[n]) || lw[n] == std::numeric_limits<double>::infinity()) lw[n] = kNegInf;
  });

  bool alive = false;
  for (double v : lw) alive = alive || v > kNegInf;
  if (!alive) throw FilterCollapseError(t, "every outer weight is zero");
  frame.log_weights = LogWeights(std::move(lw));
  assign_policy_states(ctx, frame.particles, anc_states);
  if (ibis_stats) {
    for (const auto& s : move_stats) {
      ibis_stats->proposed += s.proposed;
      ibis_stats->accepted += s.accepted;
    }
  }
  return frame;
}

FilterHistory run_filter(const FilterContext& ctx, RngStream& rng, const ParticlePath* reference) {
  const std::size_t T = ctx.model.horizon();
  if (reference && reference->size() != T + 1) throw std::invalid_argument("run_filter: reference length mismatch");
  FilterHistory h;
  h.config = ctx.config;
  h.jitter = ctx.jitter;
  h.frames.reserve(T + 1);
  RngStream r0 = rng.child(0);
  h.frames.push_back(initial_frame(ctx, r0, reference ? &(*reference)[0] : nullptr));
  for (std::size_t t = 1; t <= T; ++t) {
    RngStream rt = rng.child(t);
    h.frames.push_back(npf_step(ctx, h.frames, rt, reference ? &(*reference)[t] : nullptr, &h.ibis_stats));
    h.log_evidence += log_mean_exp(h.frames.back().log_weights.log_values());
  }
  return h;
}

std::vector<std::size_t> trace_indices(std::span<const FilterFrame> frames, std::size_t t, std::size_t n) {
  if (t >= frames.size() || n >= frames[t].size()) throw std::out_of_range("trace_indices: index out of range");
  std::vector<std::size_t> idx(t + 1);
  idx[t] = n;
  for (std::size_t s = t; s > 0; --s) idx[s - 1] = frames[s].particles[idx[s]].ancestor;
  return idx;
}

std::vector<std::size_t> trace_indices(const FilterHistory& history, std::size_t n) {
  return trace_indices(history.frames, history.horizon(), n);
}

ParticlePath path_particles(const FilterHistory& history, std::span<const std::size_t> indices) {
  if (indices.size() != history.frames.size()) throw std::invalid_argument("path_particles: length mismatch");
  ParticlePath path;
  path.reserve(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) path.push_back(history.frames[t].particles.at(indices[t]));
  return path;
}

Trajectory path_states(const FilterHistory& history, std::span<const std::size_t> indices) {
  if (indices.size() != history.frames.size()) throw std::invalid_argument("path_states: length mismatch");
  Trajectory z;
  z.reserve(indices.size());
  for (std::size_t t = 0; t < indices.size(); ++t) z.push_back(history.frames[t].particles.at(indices[t]).z);
  return z;
}

Trajectory path_states(const ParticlePath& path) {
  Trajectory z;
  z.reserve(path.size());
  for (const auto& p : path) z.push_back(p.z);
  return z;
}

ParticlePath genealogy_trajectory(const FilterHistory& history, std::size_t n) {
  return path_particles(history, trace_indices(history, n));
}

namespace {

bool same_double(double a, double b) { return a == b || (std::isnan(a) && std::isnan(b)); }

bool same_weights(const LogWeights& a, const LogWeights& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (!same_double(a[i], b[i])) return false;
  return true;
}

bool same_belief(const std::optional<GaussianBelief>& a, const std::optional<GaussianBelief>& b) {
  if (a.has_value() != b.has_value()) return false;
  return !a || (a->mean == b->mean && a->cov == b->cov);
}

}  // namespace

bool operator==(const OuterParticle& a, const OuterParticle& b) {
  return a.z == b.z && a.cloud == b.cloud && same_belief(a.belief, b.belief) &&
         a.policy_state.size() == b.policy_state.size() && a.policy_state == b.policy_state &&
         same_double(a.log_marginal, b.log_marginal) && a.ancestor == b.ancestor;
}

bool operator==(const FilterFrame& a, const FilterFrame& b) {
  return a.t == b.t && a.particles == b.particles && same_weights(a.log_weights, b.log_weights);
}

bool operator==(const FilterHistory& a, const FilterHistory& b) {
  return a.config == b.config && a.jitter == b.jitter && a.frames == b.frames &&
         same_double(a.log_evidence, b.log_evidence) && a.ibis_stats.proposed == b.ibis_stats.proposed &&
         a.ibis_stats.accepted == b.ibis_stats.accepted;
}

}  // namespace ionpf
