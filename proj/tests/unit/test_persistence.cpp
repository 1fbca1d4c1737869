#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "ionpf/checkpoint.hpp"
#include "ionpf/smoother.hpp"
#include "ionpf/snapshot.hpp"

using namespace ionpf;

namespace {

Snapshot make_snapshot(ThetaStrategy strategy) {
  Snapshot s;
  s.model.horizon = 6;
  s.arch.kind = PolicyKind::linear;
  const auto policy = make_policy(s.arch);
  RngStream rng(1);
  s.params = policy->init(rng);
  RunConfig run;
  run.N = 5;
  run.M = 7;
  run.strategy = strategy;
  const pendulum::PendulumModel model(s.model);
  const FilterContext ctx(model, *policy, s.params, run);
  s.history = run_filter(ctx, rng);
  return s;
}

std::string serialize(const Snapshot& s) {
  std::ostringstream out(std::ios::binary);
  write_snapshot(out, s);
  return out.str();
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("ionpf_test_" + name);
}

}  // namespace

TEST(Snapshot, RoundTripIsExact) {
  for (auto strategy : {ThetaStrategy::npf, ThetaStrategy::exact, ThetaStrategy::ibis}) {
    const Snapshot s = make_snapshot(strategy);
    std::istringstream in(serialize(s), std::ios::binary);
    const Snapshot r = read_snapshot(in);
    EXPECT_EQ(r.params, s.params);
    EXPECT_EQ(r.arch, s.arch);
    EXPECT_EQ(r.model.horizon, s.model.horizon);
    EXPECT_EQ(r.model.dt, s.model.dt);
    EXPECT_EQ(r.model.prior.mean, s.model.prior.mean);
    EXPECT_EQ(r.model.prior.cov, s.model.prior.cov);
    EXPECT_TRUE(r.history == s.history);
  }
}

TEST(Snapshot, SmoothingAReloadedHistoryIsReproducible) {
  const Snapshot s = make_snapshot(ThetaStrategy::npf);
  std::istringstream in(serialize(s), std::ios::binary);
  const Snapshot r = read_snapshot(in);
  const auto policy = make_policy(r.arch);
  const pendulum::PendulumModel model(r.model);
  const FilterContext a(model, *policy, s.params, s.history.config, s.history.jitter);
  const FilterContext b(model, *policy, r.params, r.history.config, r.history.jitter);
  const std::vector<std::size_t> finals{0, 1, 2, 3, 4};
  EXPECT_EQ(BackwardSampler(a, s.history).sample_many(finals, RngStream(2)),
            BackwardSampler(b, r.history).sample_many(finals, RngStream(2)));
}

TEST(Snapshot, VersionMismatchIsRejected) {
  std::string bytes = serialize(make_snapshot(ThetaStrategy::npf));
  // The version follows the 8-byte magic.
  bytes[8] = static_cast<char>(kSnapshotVersion + 1);
  std::istringstream in(bytes, std::ios::binary);
  EXPECT_THROW(read_snapshot(in), SnapshotError);
}

TEST(Snapshot, BadMagicIsRejected) {
  std::string bytes = serialize(make_snapshot(ThetaStrategy::npf));
  bytes[0] = 'X';
  std::istringstream in(bytes, std::ios::binary);
  EXPECT_THROW(read_snapshot(in), SnapshotError);
}

TEST(Snapshot, TruncationIsRejected) {
  const std::string bytes = serialize(make_snapshot(ThetaStrategy::npf));
  for (std::size_t cut : {std::size_t{0}, std::size_t{5}, bytes.size() / 2, bytes.size() - 1}) {
    std::istringstream in(bytes.substr(0, cut), std::ios::binary);
    EXPECT_THROW(read_snapshot(in), SnapshotError) << cut;
  }
}

TEST(Snapshot, FileRoundTrip) {
  const Snapshot s = make_snapshot(ThetaStrategy::npf);
  const auto path = temp_path("snapshot.bin");
  save_snapshot(path, s);
  EXPECT_TRUE(load_snapshot(path).history == s.history);
  std::filesystem::remove(path);
  EXPECT_THROW(load_snapshot(path), SnapshotError);
}

TEST(CheckpointFile, RoundTripAndMissingFile) {
  PolicyArchConfig arch;
  arch.kind = PolicyKind::linear;
  Checkpoint c{arch, PolicyParams::LinSpaced(7, -0.1, 1.0 / 3.0)};
  const auto path = temp_path("policy.json");
  save_checkpoint(path, c);
  const auto r = load_checkpoint(path);
  EXPECT_EQ(r.arch, c.arch);
  EXPECT_EQ(r.params, c.params);
  std::filesystem::remove(path);
  EXPECT_THROW(load_checkpoint(path), CheckpointError);
}

TEST(CheckpointFile, ParameterCountMustMatchArchitecture) {
  PolicyArchConfig arch;
  arch.kind = PolicyKind::linear;
  EXPECT_THROW(checkpoint_to_string({arch, PolicyParams::Zero(4)}), CheckpointError);
  std::string text = checkpoint_to_string({arch, PolicyParams::Zero(7)});
  const auto pos = text.find("\"params\"");
  ASSERT_NE(pos, std::string::npos);
  const auto open = text.find('[', pos);
  text.replace(open, 1, "[1.0,");
  EXPECT_THROW(checkpoint_from_string(text), CheckpointError);
}
