#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>

#include "ionpf/evaluation.hpp"
#include "ionpf/pendulum.hpp"
#include "ionpf/policy.hpp"
#include "ionpf/trainer.hpp"

namespace ionpf::cli {

/// Unreadable file, malformed config or bad flag value (exit code 2).
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Corrupt or incompatible data file (exit code 3).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EvalSection {
  std::size_t rollouts = 16;
  std::size_t M = 1024;
  std::size_t contrastive = 100000;
  std::size_t spce_rollouts = 16;
  std::size_t replications = 100;
};

struct ExperimentConfig {
  pendulum::PendulumConfig model;
  RunConfig filter;
  PolicyArchConfig policy;
  TrainerConfig trainer;
  EvalSection eval;
  BenchConfig bench;
  std::filesystem::path output = "ionpf_out";
  std::uint64_t seed = 0;
};

/// Parses a YAML document. Every key is optional; unknown keys and ill-typed
/// values raise InputError naming the line, column and field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

}  // namespace ionpf::cli
