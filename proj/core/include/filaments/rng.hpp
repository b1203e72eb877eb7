#pragma once

// Self-contained random numbers so results are bit-identical across
// platforms and standard libraries. xoshiro256++ for the bulk stream,
// splitmix64 for seeding and for counter-based stream derivation, and an
// explicit Box-Muller transform (std::normal_distribution is
// implementation-defined, which would break seeded reproducibility).

#include <cmath>
#include <cstdint>

namespace filaments {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (int i = 0; i < 4; ++i) s_[i] = splitmix64(sm);
  }

  // Independent stream k of a master seed; used for per-(N, trial) runs.
  static Rng stream(std::uint64_t master_seed, std::uint64_t stream_id) {
    std::uint64_t sm = master_seed ^ (0xD1B54A32D192ED03ull * (stream_id + 1));
    return Rng(splitmix64(sm));
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Standard normal, one value per call (second Box-Muller value cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform01();
    const double u2 = uniform01();
    const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
    const double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
  std::uint64_t s_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Kronecker (golden-ratio style) low-discrepancy sequence on [0,1)^dim,
// alphas = frac(sqrt(prime)). Used for quasi-random audit points and for
// the stratified reference families in the studies.
class KroneckerSequence {
 public:
  explicit KroneckerSequence(int dim) : dim_(dim) {
    static const double primes[16] = {2,  3,  5,  7,  11, 13, 17, 19,
                                      23, 29, 31, 37, 41, 43, 47, 53};
    for (int i = 0; i < dim_ && i < 16; ++i) {
      const double r = std::sqrt(primes[i]);
      alpha_[i] = r - std::floor(r);
    }
  }

  // Writes point k (k >= 0) into out[0..dim).
  void point(std::uint64_t k, double* out) const {
    for (int i = 0; i < dim_; ++i) {
      const double v = 0.5 + static_cast<double>(k + 1) * alpha_[i];
      out[i] = v - std::floor(v);
    }
  }

  int dim() const { return dim_; }

 private:
  int dim_;
  double alpha_[16] = {};
};

// Maps two uniforms to one standard normal (for quasi-random curve sampling,
// where the draw count per curve must be fixed).
inline double normal_from_uniforms(double u1, double u2) {
  const double r = std::sqrt(-2.0 * std::log(1.0 - u1));
  return r * std::cos(2.0 * M_PI * u2);
}

}  // namespace filaments
