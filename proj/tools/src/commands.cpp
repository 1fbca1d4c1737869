#include "commands.hpp"

#include <charconv>
#include <fstream>
#include <iostream>

#include <nlohmann/json.hpp>

#include "config.hpp"
#include "ionpf/checkpoint.hpp"
#include "ionpf/smoother.hpp"
#include "ionpf/snapshot.hpp"
#include "ionpf/threads.hpp"

namespace ionpf::cli {

namespace {

std::string num(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot write " + path.string());
  return out;
}

ExperimentConfig setup(const CommonOptions& opt) {
  set_thread_limit(opt.threads);
  ExperimentConfig cfg = opt.config ? load_config(*opt.config) : ExperimentConfig{};
  if (opt.seed) cfg.seed = *opt.seed;
  if (opt.out) cfg.output = *opt.out;
  std::error_code ec;
  std::filesystem::create_directories(cfg.output, ec);
  if (ec) throw InputError("cannot create output directory " + cfg.output.string() + ": " + ec.message());
  return cfg;
}

void apply_strategy(const std::string& name, ExperimentConfig& cfg) {
  if (name == "random") throw InputError("--strategy random has nothing to train");
  try {
    auto [run, tc] = algorithm_settings(name, cfg.filter);
    cfg.filter.strategy = run.strategy;
    cfg.trainer.smoothing = tc.smoothing;
  } catch (const std::invalid_argument& e) {
    throw InputError(std::string("--strategy: ") + e.what());
  }
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw InputError("checkpoint not found: " + path.string());
  return load_checkpoint(path);
}

}  // namespace

int cmd_train(const TrainOptions& opt) {
  ExperimentConfig cfg = setup(opt.common);
  if (opt.common.strategy) apply_strategy(*opt.common.strategy, cfg);
  if (cfg.trainer.smoothing == Smoothing::backward && cfg.filter.strategy != ThetaStrategy::npf)
    throw InputError("backward smoothing requires the npf strategy");

  const pendulum::PendulumModel model(cfg.model);
  const auto policy = make_policy(cfg.policy);
  const RngStream root(cfg.seed);
  PolicyParams params;
  if (opt.checkpoint) {
    const Checkpoint ck = read_checkpoint(*opt.checkpoint);
    if (!(ck.arch == cfg.policy)) throw DataError("checkpoint architecture does not match the config");
    params = ck.params;
  } else {
    RngStream init = root.child(0);
    params = policy->init(init);
  }

  auto log = open_out(cfg.output / "training_log.csv");
  auto timing = open_out(cfg.output / "training_timing.csv");
  log << "iteration,eig_proxy,grad_norm,acceptance_rate,log_evidence\n";
  timing << "iteration,wall_seconds\n";
  const auto result = train(model, *policy, params, cfg.filter, cfg.trainer, root.child(1), [&](const IterationLog& l) {
    log << l.iteration << ',' << num(l.eig_proxy) << ',' << num(l.grad_norm) << ',' << num(l.acceptance_rate) << ','
        << num(l.log_evidence) << '\n';
    log.flush();
    timing << l.iteration << ',' << num(l.wall_seconds) << '\n';
  });
  save_checkpoint(cfg.output / "policy.json", {cfg.policy, result.state.params});

  if (opt.snapshot) {
    const FilterContext ctx(model, *policy, result.state.params, cfg.filter);
    RngStream r = root.child(2);
    save_snapshot(*opt.snapshot, {cfg.model, cfg.policy, result.state.params, run_filter(ctx, r)});
  }
  const double final_eig = result.log.empty() ? 0.0 : result.log.back().eig_proxy;
  std::cout << "iterations " << result.log.size() << "\nfinal_eig_proxy " << num(final_eig) << "\n";
  return 0;
}

int cmd_eval(const EvalOptions& opt) {
  ExperimentConfig cfg = setup(opt.common);
  const bool random = opt.common.strategy && *opt.common.strategy == "random";
  if (opt.common.strategy && !random) throw InputError("eval accepts only --strategy random");
  if (!random && !opt.checkpoint) throw InputError("eval needs --checkpoint or --strategy random");

  PolicyArchConfig arch = random ? UniformRandomPolicy::random_arch() : cfg.policy;
  PolicyParams params(0);
  if (!random) {
    const Checkpoint ck = read_checkpoint(*opt.checkpoint);
    if (opt.common.config && !(ck.arch == cfg.policy))
      throw DataError("checkpoint architecture does not match the config");
    arch = ck.arch;
    params = ck.params;
  }
  const auto policy = make_policy(arch);
  const pendulum::PendulumModel model(cfg.model);
  const RngStream root(cfg.seed);

  EigConfig ec;
  ec.rollouts = cfg.eval.rollouts;
  ec.M = cfg.eval.M;
  ec.jitter_factor = cfg.filter.jitter_factor;
  const auto eig = eig_estimate(model, *policy, params, ec, root.child(0));
  SpceConfig sc;
  sc.rollouts = cfg.eval.spce_rollouts;
  sc.contrastive = cfg.eval.contrastive;
  const auto spce = spce_estimate(model, *policy, params, sc, root.child(1));
  const auto ig = realized_ig_curve(model, *policy, params, cfg.eval.replications, root.child(2));
  const auto ig_final = Estimate::from_samples(ig.final_values);

  nlohmann::json report = {
      {"policy", random ? std::string("random") : opt.checkpoint->string()},
      {"seed", cfg.seed},
      {"horizon", cfg.model.horizon},
      {"eig_mean", eig.information.mean},
      {"eig_std", eig.information.std},
      {"eig_raw_mean", eig.raw.mean},
      {"eig_raw_std", eig.raw.std},
      {"eig_rollouts", ec.rollouts},
      {"eig_M", ec.M},
      {"spce_mean", spce.mean},
      {"spce_std", spce.std},
      {"spce_rollouts", sc.rollouts},
      {"spce_contrastive", sc.contrastive},
      {"realized_ig_mean", ig_final.mean},
      {"realized_ig_std", ig_final.std},
      {"realized_ig_replications", cfg.eval.replications},
  };
  open_out(cfg.output / "eval_report.json") << report.dump(2) << '\n';

  auto csv = open_out(cfg.output / "eval_report.csv");
  csv << "metric,mean,std\n";
  csv << "eig," << num(eig.information.mean) << ',' << num(eig.information.std) << '\n';
  csv << "eig_raw," << num(eig.raw.mean) << ',' << num(eig.raw.std) << '\n';
  csv << "spce," << num(spce.mean) << ',' << num(spce.std) << '\n';
  csv << "realized_ig," << num(ig_final.mean) << ',' << num(ig_final.std) << '\n';

  auto curve = open_out(cfg.output / "realized_ig.csv");
  curve << "t,mean,std\n";
  for (std::size_t t = 0; t < ig.mean.size(); ++t) curve << t << ',' << num(ig.mean[t]) << ',' << num(ig.std[t]) << '\n';

  std::cout << "eig " << num(eig.information.mean) << " +- " << num(eig.information.std) << "\nspce "
            << num(spce.mean) << " +- " << num(spce.std) << "\nrealized_ig " << num(ig_final.mean) << " +- "
            << num(ig_final.std) << "\n";
  return 0;
}

int cmd_bench(const CommonOptions& opt) {
  ExperimentConfig cfg = setup(opt);
  BenchConfig bc = cfg.bench;
  bc.run = cfg.filter;
  if (opt.strategy) {
    try {
      (void)algorithm_settings(*opt.strategy, cfg.filter);
    } catch (const std::invalid_argument& e) {
      throw InputError(std::string("--strategy: ") + e.what());
    }
    bc.algorithms = {*opt.strategy};
  }
  const auto r = runtime_benchmark(cfg.model, bc, RngStream(cfg.seed));
  auto csv = open_out(cfg.output / "bench.csv");
  csv << "algorithm,horizon,median_seconds,repeats\n";
  for (const auto& row : r.rows)
    csv << row.algorithm << ',' << row.horizon << ',' << num(row.median_seconds) << ',' << row.repeats << '\n';
  auto ex = open_out(cfg.output / "bench_exponents.csv");
  ex << "algorithm,exponent\n";
  for (const auto& name : bc.algorithms) {
    const auto it = r.exponents.find(name);
    if (it == r.exponents.end()) continue;
    ex << name << ',' << num(it->second) << '\n';
    std::cout << "exponent " << name << ' ' << num(it->second) << '\n';
  }
  return 0;
}

int cmd_diagnose(const DiagnoseOptions& opt) {
  ExperimentConfig cfg = setup(opt.common);
  if (!std::filesystem::exists(opt.snapshot)) throw InputError("snapshot not found: " + opt.snapshot.string());
  const Snapshot snap = load_snapshot(opt.snapshot);
  if (snap.history.config.strategy != ThetaStrategy::npf)
    throw DataError("diagnose needs a snapshot recorded with the npf strategy");
  const pendulum::PendulumModel model(snap.model);
  const auto policy = make_policy(snap.arch);
  if (static_cast<std::size_t>(snap.params.size()) != policy->num_params())
    throw DataError("snapshot parameters do not match its policy architecture");
  const FilterContext ctx(model, *policy, snap.params, snap.history.config, snap.history.jitter);
  const BackwardSampler sampler(ctx, snap.history);
  const std::size_t N = snap.history.num_particles();
  std::vector<std::size_t> finals(N);
  for (std::size_t n = 0; n < N; ++n) finals[n] = n;
  BackwardStats stats;
  const auto back = sampler.sample_many(finals, RngStream(cfg.seed), &stats);
  const auto report = degeneracy_report(snap.history, back);

  auto csv = open_out(cfg.output / "degeneracy.csv");
  csv << "t,tracing,backward\n";
  for (std::size_t t = 0; t < report.tracing.size(); ++t)
    csv << t << ',' << report.tracing[t] << ',' << report.backward[t] << '\n';
  std::cout << "particles " << N << "\nhorizon " << snap.history.horizon() << "\nunique_t0_tracing "
            << report.tracing.front() << "\nunique_t0_backward " << report.backward.front() << "\nbs_steps "
            << stats.steps << "\nbs_trivial " << stats.trivial << "\nbs_accepted " << stats.accepted
            << "\nbs_rejected " << stats.rejected << "\nbs_acceptance_rate " << num(stats.acceptance_rate()) << "\n";
  return 0;
}

}  // namespace ionpf::cli
