#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "config.hpp"
#include "ionpf/checkpoint.hpp"
#include "ionpf/filter.hpp"
#include "ionpf/snapshot.hpp"
#include "ionpf/trainer.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kInputError = 2;
constexpr int kDataError = 3;
constexpr int kNumericError = 4;

void add_common(CLI::App& cmd, ionpf::cli::CommonOptions& o) {
  cmd.add_option("--config", o.config, "YAML experiment configuration");
  cmd.add_option("--seed", o.seed, "Root seed (overrides the config)");
  cmd.add_option("--threads", o.threads, "Worker threads, 0 for the default")->check(CLI::NonNegativeNumber);
  cmd.add_option("--strategy", o.strategy, "npf | npf-bs | ibis | exact | random")
      ->check(CLI::IsMember({"npf", "npf-bs", "ibis", "exact", "random"}));
  cmd.add_option("--out", o.out, "Output directory (overrides the config)");
}

}  // namespace

int main(int argc, char** argv) {
  using namespace ionpf::cli;
  CLI::App app{"Sequential Bayesian experimental design with inside-out nested particle filters"};
  app.require_subcommand(1);

  TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a design policy by Markovian score climbing");
  add_common(*train_cmd, train.common);
  train_cmd->add_option("--checkpoint", train.checkpoint, "Initial policy checkpoint");
  train_cmd->add_option("--snapshot", train.snapshot, "Write a filter snapshot under the trained policy");

  EvalOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Estimate EIG, sPCE and realized information gain");
  add_common(*eval_cmd, eval.common);
  eval_cmd->add_option("--checkpoint", eval.checkpoint, "Policy checkpoint");

  CommonOptions bench;
  auto* bench_cmd = app.add_subcommand("bench", "Time one amortization iteration against the horizon");
  add_common(*bench_cmd, bench);

  DiagnoseOptions diag;
  auto* diag_cmd = app.add_subcommand("diagnose", "Path degeneracy of a filter snapshot");
  add_common(*diag_cmd, diag.common);
  diag_cmd->add_option("--snapshot", diag.snapshot, "Filter snapshot")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (*train_cmd) return cmd_train(train);
    if (*eval_cmd) return cmd_eval(eval);
    if (*bench_cmd) return cmd_bench(bench);
    if (*diag_cmd) return cmd_diagnose(diag);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DataError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ionpf::CheckpointError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ionpf::SnapshotError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  } catch (const ionpf::NumericalError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const ionpf::FilterCollapseError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::domain_error& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInputError;
  }
  return kInputError;
}
