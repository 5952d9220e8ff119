#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <random>

#include "rmcp/geometry.hpp"

namespace rmcp {

/// Stream index reserved for scenario (data) generation; trial t uses index t.
inline constexpr std::uint64_t kScenarioStream = std::uint64_t{1} << 63;

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Deterministic pseudo-random stream keyed by (base_seed, stream_index).
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the
/// standard; all derived variates are computed here rather than through
/// <random> distributions, whose algorithms are implementation-defined.
/// Single owner: never share a stream between threads.
class RngStream {
 public:
  RngStream(std::uint64_t base_seed, std::uint64_t stream_index);

  std::uint64_t base_seed() const noexcept { return base_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64() { return engine_(); }
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Uniform on {0, ..., n-1}; unbiased (rejection sampling).
  std::size_t uniform_index(std::size_t n);
  /// Standard normal via the Marsaglia polar method.
  double normal();
  Vector normal_vector(std::size_t n);

 private:
  std::uint64_t base_seed_;
  std::uint64_t stream_index_;
  std::mt19937_64 engine_;
  std::optional<double> spare_;
};

}  // namespace rmcp
