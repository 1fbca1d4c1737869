#include <benchmark/benchmark.h>

#include "ionpf/filter.hpp"
#include "ionpf/pendulum.hpp"
#include "ionpf/policy.hpp"
#include "ionpf/smoother.hpp"
#include "ionpf/theta_filter.hpp"
#include "ionpf/trainer.hpp"

using namespace ionpf;

namespace {

PolicyArchConfig linear_arch() {
  PolicyArchConfig a;
  a.kind = PolicyKind::linear;
  return a;
}

pendulum::PendulumConfig horizon(std::int64_t T) {
  pendulum::PendulumConfig c;
  c.horizon = static_cast<std::size_t>(T);
  return c;
}

RunConfig run_config(ThetaStrategy strategy, std::size_t N, std::size_t M) {
  RunConfig r;
  r.N = N;
  r.M = M;
  r.strategy = strategy;
  return r;
}

void BM_CloudStepNpf(benchmark::State& state) {
  const pendulum::PendulumModel model;
  const auto M = static_cast<std::size_t>(state.range(0));
  const auto jc = JitterConfig::from_prior(model.prior(), M);
  RngStream rng(1);
  const ThetaCloud cloud = cloud_init(model.prior(), M, rng);
  const State x(0.1, 0.2);
  const State next = model.sample_transition(x, 0.5, model.prior().mean, rng);
  for (auto _ : state) benchmark::DoNotOptimize(cloud_step_npf(cloud, model, x, 0.5, next, jc, rng));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_CloudStepNpf)->RangeMultiplier(4)->Range(16, 4096)->Complexity(benchmark::oN);

void BM_RunFilter(benchmark::State& state, ThetaStrategy strategy) {
  const pendulum::PendulumModel model(horizon(state.range(0)));
  const auto policy = make_policy(linear_arch());
  RngStream init(2);
  const PolicyParams params = policy->init(init);
  const FilterContext ctx(model, *policy, params, run_config(strategy, 32, 32));
  std::uint64_t k = 0;
  for (auto _ : state) {
    RngStream rng(3, k++);
    benchmark::DoNotOptimize(run_filter(ctx, rng));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK_CAPTURE(BM_RunFilter, npf, ThetaStrategy::npf)->Arg(25)->Arg(50)->Arg(100)->Complexity();
BENCHMARK_CAPTURE(BM_RunFilter, ibis, ThetaStrategy::ibis)->Arg(25)->Arg(50)->Arg(100)->Complexity();
BENCHMARK_CAPTURE(BM_RunFilter, exact, ThetaStrategy::exact)->Arg(25)->Arg(50)->Arg(100)->Complexity();

void BM_BackwardSample(benchmark::State& state) {
  const pendulum::PendulumModel model(horizon(state.range(0)));
  const auto policy = make_policy(PolicyArchConfig{});
  RngStream init(4);
  const PolicyParams params = policy->init(init);
  const FilterContext ctx(model, *policy, params, run_config(ThetaStrategy::npf, 32, 128));
  RngStream rng(5);
  const auto history = run_filter(ctx, rng);
  const BackwardSampler sampler(ctx, history);
  std::uint64_t k = 0;
  for (auto _ : state) {
    RngStream r(6, k++);
    benchmark::DoNotOptimize(sampler.sample(r, 0));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_BackwardSample)->Arg(25)->Arg(50)->Complexity();

void BM_CsmcIteration(benchmark::State& state) {
  const pendulum::PendulumModel model(horizon(50));
  const auto policy = make_policy(PolicyArchConfig{});
  RngStream init(7);
  const PolicyParams params = policy->init(init);
  const RunConfig run = run_config(ThetaStrategy::npf, 32, 128);
  const FilterContext ctx(model, *policy, params, run);
  ParticlePath ref = initial_reference(model, *policy, params, run, init);
  const auto smoothing = state.range(0) ? Smoothing::backward : Smoothing::tracing;
  std::uint64_t k = 0;
  for (auto _ : state) {
    RngStream r(8, k++);
    benchmark::DoNotOptimize(csmc_step(ctx, ref, smoothing, r));
  }
}
BENCHMARK(BM_CsmcIteration)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
