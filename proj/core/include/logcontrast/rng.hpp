#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace logcontrast {

/// Deterministic, seedable random stream.
///
/// Stream splitting rule: stream k of master seed m runs an mt19937_64
/// engine seeded with splitmix64(m + (k+1) * 0x9E3779B97F4A7C15). Uniform
/// variates take the top 53 bits of the engine output; normal variates are
/// produced by applying norm_quantile to a uniform draw. The whole chain is
/// pinned by the standard-mandated mt19937_64 sequence and this library's
/// quantile code, so outputs are reproducible per (seed, stream) within one
/// build of this implementation.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, std::uint64_t stream);

  std::uint64_t next_u64();

  /// Uniform on the open interval (0,1); never returns 0 or 1.
  double uniform();

  /// Standard normal via inverse-CDF transform of uniform().
  double normal();

  /// k distinct indices drawn uniformly from {0,...,n-1} by partial
  /// Fisher-Yates, returned sorted ascending.
  std::vector<int> sample_without_replacement(int n, int k);

  static std::uint64_t splitmix64(std::uint64_t x);

 private:
  std::mt19937_64 engine_;
};

}  // namespace logcontrast
