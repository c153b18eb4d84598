#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

namespace triclust {

// Stream tags used to derive independent substreams from one user seed.
// Every randomized component draws from Rng::stream(seed, tag, index) so
// replicates are reproducible and schedule-independent.
namespace stream_tag {
inline constexpr std::uint64_t kVarianceRef = 1;
inline constexpr std::uint64_t kVarianceSingleton = 2;
inline constexpr std::uint64_t kSearch = 3;
inline constexpr std::uint64_t kSimulate = 4;
inline constexpr std::uint64_t kKmeans = 5;
inline constexpr std::uint64_t kStudyVariance = 6;
inline constexpr std::uint64_t kStudySearch = 7;
inline constexpr std::uint64_t kStudyKmeans = 8;
}  // namespace stream_tag

// Seeded generator with a fixed algorithm everywhere: std::mt19937_64 for
// bits, 53-bit shifts for uniforms, Box-Muller for normals and Fisher-Yates
// for shuffles. None of the distribution adaptors from <random> are used
// because their output is implementation-defined; this class is
// bit-reproducible on any conforming standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Substream (seed, tag, index), e.g. one per Monte Carlo replicate.
  static Rng stream(std::uint64_t seed, std::uint64_t tag, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(tag), static_cast<std::uint32_t>(tag >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    Rng rng(0);
    rng.engine_.seed(seq);
    rng.have_spare_ = false;
    return rng;
  }

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Standard normal via the basic Box-Muller transform.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform01();  // (0, 1]: keeps the log finite
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(angle);
    have_spare_ = true;
    return r * std::cos(angle);
  }

  // Uniform integer in [0, n), unbiased by rejection.
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t bound = n == 0 ? 0 : (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= bound);
    return x % n;
  }

  template <typename T>
  void shuffle(std::vector<T>& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace triclust
