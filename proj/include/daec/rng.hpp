#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace daec {

// splitmix64; used to derive independent sub-stream seeds from one root seed.
inline uint64_t mix_seed(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d49b3b924ae2d3ull;
  return z ^ (z >> 31);
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream) {
  return mix_seed(root ^ mix_seed(stream + 0x517cc1b727220a95ull));
}

inline uint64_t derive_seed(uint64_t root, uint64_t stream_a, uint64_t stream_b) {
  return derive_seed(derive_seed(root, stream_a), stream_b);
}

// Deterministic RNG. The engine is mt19937_64 (bit-exact across platforms);
// all distributions are sampled here explicitly because the std:: distribution
// implementations are not portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : eng_(seed) {}

  uint64_t raw() { return eng_(); }

  // [0, 1) with 53-bit resolution.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Inclusive bounds.
  int randint(int lo, int hi) {
    if (hi <= lo) return lo;
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  // Box-Muller; draws two uniforms per call, no cached spare.
  double normal(double mean = 0.0, double stddev = 1.0) {
    double u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log1p(-u1));
    return mean + stddev * r * std::cos(2.0 * M_PI * u2);
  }

  bool chance(double p) { return uniform() < p; }

  Rng fork(uint64_t stream) { return Rng(derive_seed(eng_(), stream)); }

 private:
  std::mt19937_64 eng_;
};

}  // namespace daec
