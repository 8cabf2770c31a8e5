#pragma once

#include <cstdint>

namespace bifurc {

/// Seedable 64-bit generator (splitmix64, Steele et al. finalizer constants).
///
/// All dataset generation, network initialization, and search restarts draw
/// from this generator, so every artifact this library emits is reproducible
/// from a single integer seed. Cross-implementation bit-identity of datasets
/// is a non-goal; determinism within this implementation is guaranteed.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * next_double(); }

 private:
  std::uint64_t state_;
};

}  // namespace bifurc
