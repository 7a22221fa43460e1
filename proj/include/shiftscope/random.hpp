#pragma once

#include <algorithm>
#include <cstddef>
#include <limits>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <vector>

namespace shiftscope {

/// Seeded generator with distribution code written out here so streams are
/// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    // Rejection sampling avoids modulo bias.
    const std::uint64_t bound = static_cast<std::uint64_t>(n);
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % bound);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Index drawn by inverse CDF over an (unnormalized) mass vector.
  std::size_t categorical(std::span<const double> cumulative) {
    const double u = uniform() * cumulative.back();
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    if (it == cumulative.end()) --it;
    return static_cast<std::size_t>(it - cumulative.begin());
  }

  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t i = 0; i < k && i < n; ++i) {
      std::swap(idx[i], idx[i + index(n - i)]);
    }
    idx.resize(std::min(k, n));
    return idx;
  }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// Running sums for inverse-CDF sampling.
inline std::vector<double> cumulative_sums(std::span<const double> mass) {
  std::vector<double> c(mass.size());
  std::partial_sum(mass.begin(), mass.end(), c.begin());
  return c;
}

}  // namespace shiftscope
