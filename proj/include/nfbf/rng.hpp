#ifndef NFBF_RNG_HPP
#define NFBF_RNG_HPP

#include <cstdint>
#include <random>

namespace nfbf {

/// Seeded random stream. Uniform draws are produced from the raw 64-bit
/// output (53-bit mantissa path) rather than std::uniform_real_distribution,
/// so a given seed yields the same sequence on every standard library.
///
/// Parallel code must not share a stream: derive one per task with
/// Rng::stream(master, a, b), which splitmix-hashes the coordinates into an
/// independent seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Independent stream keyed by (master seed, coordinate a, coordinate b).
  static Rng stream(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0) {
    return Rng(mix(mix(mix(master) ^ a) ^ b));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform in [0, 1).
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // modulo bias is irrelevant for the small n used here
    return engine_() % n;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace nfbf

#endif
