#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

#include "ionpf/filter.hpp"
#include "ionpf/pendulum.hpp"
#include "ionpf/policy.hpp"

namespace ionpf {

/// Unreadable, truncated or version-mismatched snapshot.
class SnapshotError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kSnapshotVersion = 1;

/// A filter run together with everything needed to smooth it offline.
struct Snapshot {
  pendulum::PendulumConfig model;
  PolicyArchConfig arch;
  PolicyParams params;
  FilterHistory history;
};

/// Little-endian binary layout: magic, version, then the model, policy and
/// history sections.
void write_snapshot(std::ostream& out, const Snapshot& snap);
Snapshot read_snapshot(std::istream& in);
void save_snapshot(const std::filesystem::path& path, const Snapshot& snap);
Snapshot load_snapshot(const std::filesystem::path& path);

}  // namespace ionpf
