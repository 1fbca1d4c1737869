#include "ionpf/trainer.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace ionpf {

std::string to_string(Smoothing s) { return s == Smoothing::tracing ? "tracing" : "backward"; }

Smoothing smoothing_from_string(const std::string& name) {
  if (name == "tracing") return Smoothing::tracing;
  if (name == "backward") return Smoothing::backward;
  throw std::invalid_argument("unknown smoothing mode '" + name + "'");
}

std::string to_string(Optimizer o) { return o == Optimizer::sga ? "sga" : "adam"; }

Optimizer optimizer_from_string(const std::string& name) {
  if (name == "sga") return Optimizer::sga;
  if (name == "adam") return Optimizer::adam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

void TrainerConfig::validate() const {
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw std::invalid_argument("trainer: learning_rate must be >= 0");
  if (!(adam_beta1 >= 0.0 && adam_beta1 < 1.0) || !(adam_beta2 >= 0.0 && adam_beta2 < 1.0))
    throw std::invalid_argument("trainer: adam betas must lie in [0, 1)");
  if (!(adam_epsilon > 0.0)) throw std::invalid_argument("trainer: adam_epsilon must be > 0");
}

SweepResult csmc_step(const FilterContext& ctx, const ParticlePath& reference, Smoothing smoothing,
                      RngStream& rng) {
  SweepResult out;
  RngStream filter_rng = rng.child(1);
  out.history = run_filter(ctx, filter_rng, &reference);
  const std::size_t N = out.history.num_particles();

  if (smoothing == Smoothing::backward && N > 1) {
    std::vector<std::size_t> finals(N);
    for (std::size_t n = 0; n < N; ++n) finals[n] = n;
    const BackwardSampler sampler(ctx, out.history);
    out.trajectories = sampler.sample_many(finals, rng.child(2), &out.stats);
  } else {
    out.trajectories = traced_trajectories(out.history);
  }
  out.weights = out.history.frames.back().log_weights.normalized();
  RngStream pick = rng.child(3);
  const std::size_t r = sample_index(out.history.frames.back().log_weights, pick);
  out.reference = path_particles(out.history, out.trajectories[r].indices);
  return out;
}

ParticlePath initial_reference(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                               const RunConfig& run, RngStream& rng) {
  RunConfig single = run;
  single.N = 1;
  single.eta = 0.0;
  const FilterContext ctx(model, policy, params, single,
                          JitterConfig::from_prior(model.prior(), run.M, run.jitter_factor));
  const auto h = run_filter(ctx, rng);
  return genealogy_trajectory(h, 0);
}

double path_reward(const StateSpaceModel& model, const ParticlePath& path) {
  double total = 0.0;
  for (std::size_t t = 1; t < path.size(); ++t)
    total -= marginal_transition_logpdf(path[t - 1], model, *path[t].z.xi_prev, path[t].z.x);
  return total;
}

IterationLog msc_iterate(TrainState& state, const StateSpaceModel& model, const Policy& policy, const RunConfig& run,
                         const TrainerConfig& cfg, RngStream& rng) {
  const auto start = std::chrono::steady_clock::now();
  const FilterContext ctx(model, policy, state.params, run);
  SweepResult sweep = csmc_step(ctx, state.reference, cfg.smoothing, rng);

  std::vector<Trajectory> paths;
  std::vector<double> weights;
  std::vector<ParticlePath> particle_paths;
  if (cfg.rao_blackwell) {
    for (std::size_t n = 0; n < sweep.trajectories.size(); ++n) {
      if (sweep.weights[n] == 0.0) continue;
      particle_paths.push_back(path_particles(sweep.history, sweep.trajectories[n].indices));
      paths.push_back(path_states(particle_paths.back()));
      weights.push_back(sweep.weights[n]);
    }
  } else {
    particle_paths.push_back(sweep.reference);
    paths.push_back(path_states(sweep.reference));
    weights.push_back(1.0);
  }

  IterationLog log;
  log.iteration = state.iteration + 1;
  const auto entropy = model.transition_entropy();
  for (std::size_t i = 0; i < particle_paths.size(); ++i) {
    double r = path_reward(model, particle_paths[i]);
    if (entropy) r -= static_cast<double>(particle_paths[i].size() - 1) * *entropy;
    log.eig_proxy += weights[i] * r;
  }

  const Eigen::VectorXd grad = policy.score(state.params, paths, weights);
  if (!grad.allFinite())
    throw NumericalError("training: non-finite score at iteration " + std::to_string(log.iteration));
  log.grad_norm = grad.norm();

  const double gamma = cfg.decay ? cfg.learning_rate / static_cast<double>(log.iteration) : cfg.learning_rate;
  if (grad.size() > 0) {
    if (cfg.optimizer == Optimizer::sga) {
      state.params += gamma * grad;
    } else {
      if (state.adam_m.size() != grad.size()) {
        state.adam_m = Eigen::VectorXd::Zero(grad.size());
        state.adam_v = Eigen::VectorXd::Zero(grad.size());
      }
      state.adam_m = cfg.adam_beta1 * state.adam_m + (1.0 - cfg.adam_beta1) * grad;
      state.adam_v = cfg.adam_beta2 * state.adam_v + (1.0 - cfg.adam_beta2) * grad.cwiseAbs2();
      const double k = static_cast<double>(log.iteration);
      const double c1 = 1.0 - std::pow(cfg.adam_beta1, k);
      const double c2 = 1.0 - std::pow(cfg.adam_beta2, k);
      state.params.array() +=
          gamma * (state.adam_m.array() / c1) / ((state.adam_v.array() / c2).sqrt() + cfg.adam_epsilon);
    }
  }
  if (!state.params.allFinite())
    throw NumericalError("training: non-finite parameters after iteration " + std::to_string(log.iteration));

  state.reference = std::move(sweep.reference);
  // The reference's policy states belong to the old parameters; the next sweep recomputes them.
  state.iteration = log.iteration;
  log.acceptance_rate = sweep.stats.acceptance_rate();
  log.log_evidence = sweep.history.log_evidence;
  log.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return log;
}

TrainResult train(const StateSpaceModel& model, const Policy& policy, const PolicyParams& initial, const RunConfig& run,
                  const TrainerConfig& cfg, const RngStream& rng,
                  const std::function<void(const IterationLog&)>& on_iteration) {
  cfg.validate();
  TrainResult result;
  result.state.params = initial;
  RngStream init_rng = rng.child(0);
  result.state.reference = initial_reference(model, policy, initial, run, init_rng);
  for (std::size_t k = 1; k <= cfg.iterations; ++k) {
    RngStream it_rng = rng.child(k);
    result.log.push_back(msc_iterate(result.state, model, policy, run, cfg, it_rng));
    if (on_iteration) on_iteration(result.log.back());
  }
  return result;
}

}  // namespace ionpf
