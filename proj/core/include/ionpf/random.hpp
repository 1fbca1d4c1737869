#pragma once

#include <cstddef>
#include <cstdint>
#include <random>

namespace ionpf {

/// Seeded random stream identified by a (seed, stream id) pair.
///
/// Two streams built from the same pair produce identical draw sequences.
/// Streams with different ids are seeded through std::seed_seq from the full
/// 128-bit key and are used as statistically independent sources. Child
/// streams are derived deterministically from the parent key, so work that is
/// split across particles or threads draws the same numbers regardless of
/// scheduling.
class RngStream {
 public:
  using result_type = std::uint64_t;

  explicit RngStream(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream_id() const noexcept { return stream_; }

  /// Independent stream keyed by this stream's id and `key`. Does not
  /// advance the parent.
  RngStream child(std::uint64_t key) const;
  RngStream child(std::uint64_t a, std::uint64_t b) const { return child(a).child(b); }

  /// Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n);

  std::mt19937_64& engine() noexcept { return engine_; }

  static constexpr result_type min() { return std::mt19937_64::min(); }
  static constexpr result_type max() { return std::mt19937_64::max(); }
  result_type operator()() { return engine_(); }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_{0.0, 1.0};
};

/// splitmix64 finalizer; used to derive child stream ids.
std::uint64_t mix64(std::uint64_t x) noexcept;

}  // namespace ionpf
