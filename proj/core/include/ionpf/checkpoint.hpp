#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>

#include "ionpf/policy.hpp"

namespace ionpf {

/// Malformed, truncated or incompatible checkpoint file.
class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  PolicyArchConfig arch;
  PolicyParams params;
};

inline constexpr int kCheckpointVersion = 1;

/// JSON document {format, version, arch, params}. Doubles are written in
/// shortest round-trip form, so save followed by load is bit-exact.
std::string checkpoint_to_string(const Checkpoint& ckpt);
Checkpoint checkpoint_from_string(const std::string& text);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace ionpf
