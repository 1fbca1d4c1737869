#include "ionpf/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "parallel.hpp"

namespace ionpf {

Estimate Estimate::from_samples(std::vector<double> samples) {
  Estimate e;
  e.samples = std::move(samples);
  const double n = static_cast<double>(e.samples.size());
  if (e.samples.empty()) return e;
  e.mean = std::accumulate(e.samples.begin(), e.samples.end(), 0.0) / n;
  if (e.samples.size() > 1) {
    double ss = 0.0;
    for (double v : e.samples) ss += (v - e.mean) * (v - e.mean);
    e.std = std::sqrt(ss / (n - 1.0));
  }
  return e;
}

double Estimate::standard_error() const {
  return samples.empty() ? 0.0 : std / std::sqrt(static_cast<double>(samples.size()));
}

EigEstimate eig_estimate(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                         const EigConfig& cfg, const RngStream& rng) {
  if (cfg.rollouts < 1) throw std::invalid_argument("eig_estimate: rollouts must be >= 1");
  RunConfig run;
  run.N = 1;
  run.M = cfg.M;
  run.eta = 0.0;
  run.slew_penalty = 0.0;
  run.strategy = cfg.strategy;
  run.jitter_factor = cfg.jitter_factor;
  const FilterContext ctx(model, policy, params, run);
  std::vector<double> raw(cfg.rollouts);
  detail::parallel_for(cfg.rollouts, [&](std::size_t i) {
    RngStream r = rng.child(i);
    const auto h = run_filter(ctx, r);
    double total = 0.0;
    for (std::size_t t = 1; t < h.frames.size(); ++t) total -= h.frames[t].particles[0].log_marginal;
    raw[i] = total;
  });
  std::vector<double> info = raw;
  if (const auto entropy = model.transition_entropy()) {
    for (double& v : info) v -= static_cast<double>(model.horizon()) * *entropy;
  }
  return {Estimate::from_samples(std::move(raw)), Estimate::from_samples(std::move(info))};
}

Estimate spce_estimate(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                       const SpceConfig& cfg, const RngStream& rng) {
  if (cfg.contrastive < 1) throw std::invalid_argument("spce_estimate: contrastive count must be >= 1");
  if (cfg.rollouts < 1) throw std::invalid_argument("spce_estimate: rollouts must be >= 1");
  const std::size_t T = model.horizon();
  std::vector<double> values(cfg.rollouts);
  detail::parallel_for(cfg.rollouts, [&](std::size_t i) {
    RngStream r = rng.child(i);
    const Theta theta0 = model.sample_prior(r);
    Trajectory z;
    z.reserve(T + 1);
    z.push_back({model.initial_state(), std::nullopt});
    PolicyState s = policy.step(params, policy.initial_state(), z.back());
    for (std::size_t t = 1; t <= T; ++t) {
      const double xi = policy.sample(params, s, r).xi;
      z.push_back({model.sample_transition(z.back().x, xi, theta0, r), xi});
      s = policy.step(params, s, z.back());
    }
    const auto loglik = [&](const Theta& th) {
      double l = 0.0;
      for (std::size_t t = 1; t <= T; ++t) l += model.transition_logpdf(z[t].x, z[t - 1].x, *z[t].xi_prev, th);
      return l;
    };
    std::vector<double> l(cfg.contrastive + 1);
    l[0] = loglik(theta0);
    for (std::size_t k = 1; k <= cfg.contrastive; ++k) l[k] = loglik(model.sample_prior(r));
    values[i] = l[0] - (log_sum_exp(l) - std::log(static_cast<double>(cfg.contrastive + 1)));
  });
  return Estimate::from_samples(std::move(values));
}

IgCurve realized_ig_curve(const StateSpaceModel& model, const Policy& policy, const PolicyParams& params,
                          std::size_t replications, const RngStream& rng) {
  const ConjugateOracle* oracle = model.conjugate();
  if (!oracle) throw std::invalid_argument("realized_ig_curve: model has no conjugate posterior");
  if (replications < 1) throw std::invalid_argument("realized_ig_curve: replications must be >= 1");
  const std::size_t T = model.horizon();
  const std::size_t R = replications;
  std::vector<RngStream> rngs;
  rngs.reserve(R);
  std::vector<Theta> theta(R);
  std::vector<AugmentedState> z(R, AugmentedState{model.initial_state(), std::nullopt});
  std::vector<GaussianBelief> belief(R, model.prior());
  for (std::size_t r = 0; r < R; ++r) {
    rngs.push_back(rng.child(r));
    theta[r] = model.sample_prior(rngs[r]);
  }
  const double logdet0 = model.prior().log_det();
  std::vector<std::vector<double>> ig(T + 1, std::vector<double>(R, 0.0));

  Eigen::MatrixXd states = policy.step_batch(
      params, Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(policy.state_dim()), static_cast<Eigen::Index>(R)), z);
  for (std::size_t t = 1; t <= T; ++t) {
    const auto designs = policy.sample_batch(params, states, rngs);
    detail::parallel_for(R, [&](std::size_t r) {
      const double xi = designs[r].xi;
      const State x_next = model.sample_transition(z[r].x, xi, theta[r], rngs[r]);
      belief[r] = oracle->update(belief[r], z[r].x, xi, x_next);
      z[r] = AugmentedState{x_next, xi};
      ig[t][r] = 0.5 * (logdet0 - belief[r].log_det());
    });
    states = policy.step_batch(params, states, z);
  }

  IgCurve curve;
  for (std::size_t t = 0; t <= T; ++t) {
    const auto e = Estimate::from_samples(ig[t]);
    curve.mean.push_back(e.mean);
    curve.std.push_back(e.std);
  }
  curve.final_values = ig[T];
  return curve;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("loglog_slope: need two or more points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0) || !(y[i] > 0.0)) throw std::domain_error("loglog_slope: values must be positive");
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw std::domain_error("loglog_slope: x values are all equal");
  return sxy / sxx;
}

std::pair<RunConfig, TrainerConfig> algorithm_settings(const std::string& algorithm, const RunConfig& base) {
  RunConfig run = base;
  TrainerConfig tc;
  tc.smoothing = Smoothing::tracing;
  if (algorithm == "npf") {
    run.strategy = ThetaStrategy::npf;
  } else if (algorithm == "npf-bs") {
    run.strategy = ThetaStrategy::npf;
    tc.smoothing = Smoothing::backward;
  } else if (algorithm == "ibis") {
    run.strategy = ThetaStrategy::ibis;
  } else if (algorithm == "exact") {
    run.strategy = ThetaStrategy::exact;
  } else {
    throw std::invalid_argument("unknown algorithm '" + algorithm + "'");
  }
  return {run, tc};
}

BenchResult runtime_benchmark(const pendulum::PendulumConfig& model_cfg, const BenchConfig& cfg,
                              const RngStream& rng) {
  if (cfg.repeats < 1) throw std::invalid_argument("runtime_benchmark: repeats must be >= 1");
  const auto policy = make_policy(cfg.arch);
  RngStream init_rng = rng.child(0);
  const PolicyParams params = policy->init(init_rng);
  BenchResult result;
  for (std::size_t a = 0; a < cfg.algorithms.size(); ++a) {
    const auto& name = cfg.algorithms[a];
    RunConfig base = cfg.run;
    base.N = cfg.N;
    base.M = cfg.M;
    auto [run, tc] = algorithm_settings(name, base);
    tc.learning_rate = 0.0;
    std::vector<double> xs, ys;
    for (std::size_t h = 0; h < cfg.horizons.size(); ++h) {
      pendulum::PendulumConfig mc = model_cfg;
      mc.horizon = cfg.horizons[h];
      const pendulum::PendulumModel model(mc);
      RngStream r = rng.child(a + 1, h);
      TrainState state;
      state.params = params;
      RngStream ref_rng = r.child(0);
      state.reference = initial_reference(model, *policy, params, run, ref_rng);
      std::vector<double> times;
      for (std::size_t k = 0; k < cfg.repeats; ++k) {
        RngStream it = r.child(k + 1);
        const auto t0 = std::chrono::steady_clock::now();
        msc_iterate(state, model, *policy, run, tc, it);
        times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
      }
      std::sort(times.begin(), times.end());
      const std::size_t n = times.size();
      const double median = n % 2 ? times[n / 2] : 0.5 * (times[n / 2 - 1] + times[n / 2]);
      result.rows.push_back({name, mc.horizon, median, cfg.repeats});
      xs.push_back(static_cast<double>(mc.horizon));
      ys.push_back(median);
    }
    if (xs.size() >= 2) result.exponents[name] = loglog_slope(xs, ys);
  }
  return result;
}

}  // namespace ionpf
