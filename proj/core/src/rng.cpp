#include "logcontrast/rng.hpp"

#include <algorithm>
#include <stdexcept>

#include "logcontrast/normal.hpp"

namespace logcontrast {

std::uint64_t RngStream::splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t master_seed, std::uint64_t stream)
    : engine_(splitmix64(master_seed + (stream + 1) * 0x9E3779B97F4A7C15ULL)) {}

std::uint64_t RngStream::next_u64() { return engine_(); }

double RngStream::uniform() {
  // 53-bit mantissa, then shift half an ulp into the open interval.
  const double x = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  return x + 0x1.0p-54;
}

double RngStream::normal() { return norm_quantile(uniform()); }

std::vector<int> RngStream::sample_without_replacement(int n, int k) {
  if (k < 0 || k > n) {
    throw std::invalid_argument("sample_without_replacement: need 0 <= k <= n");
  }
  std::vector<int> pool(n);
  for (int i = 0; i < n; ++i) pool[i] = i;
  for (int i = 0; i < k; ++i) {
    const int j = i + static_cast<int>(next_u64() % static_cast<std::uint64_t>(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(k);
  std::sort(pool.begin(), pool.end());
  return pool;
}

}  // namespace logcontrast
