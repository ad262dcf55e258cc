#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

namespace imst {

/// Seeded generator whose derived draws are identical on every platform.
///
/// std::mt19937_64 is fully specified by the standard, but the std::*_distribution
/// adaptors are not, so the mappings to doubles, indices and normals live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform draw in the open interval (0, 1).
  double uniform_open();

  /// Uniform draw in [lo, hi).
  double uniform(double lo, double hi);

  /// Unbiased integer in [0, n). n must be positive.
  std::size_t index(std::size_t n);

  double normal();

  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::swap(items[i - 1], items[index(i)]);
    }
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    shuffle(std::span<T>(items));
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// SplitMix64 finalizer; used to decorrelate derived seeds.
std::uint64_t mix_seed(std::uint64_t x);

/// Stage seed derived from a global seed and a stage tag.
std::uint64_t derive_seed(std::uint64_t global_seed, std::string_view tag);

}  // namespace imst
