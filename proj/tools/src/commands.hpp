#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

namespace ionpf::cli {

struct CommonOptions {
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> strategy;
  std::optional<std::filesystem::path> out;
  std::size_t threads = 0;
};

struct TrainOptions {
  CommonOptions common;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> snapshot;
};

struct EvalOptions {
  CommonOptions common;
  std::optional<std::filesystem::path> checkpoint;
};

struct DiagnoseOptions {
  CommonOptions common;
  std::filesystem::path snapshot;
};

int cmd_train(const TrainOptions& opt);
int cmd_eval(const EvalOptions& opt);
int cmd_bench(const CommonOptions& opt);
int cmd_diagnose(const DiagnoseOptions& opt);

}  // namespace ionpf::cli
