#pragma once

#include <cmath>
#include <cstdint>

namespace sgrd {

// PCG32 generator. Self-contained so that streams are bit-identical across
// platforms and standard-library versions; every stochastic component in the
// project draws from one of these, seeded explicitly.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) {
    state_ = 0u;
    inc_ = (stream << 1u) | 1u;
    next_u32();
    state_ += seed;
    next_u32();
  }

  std::uint32_t next_u32() {
    std::uint64_t old = state_;
    state_ = old * 6364136223846793005ULL + inc_;
    std::uint32_t xorshifted =
        static_cast<std::uint32_t>(((old >> 18u) ^ old) >> 27u);
    std::uint32_t rot = static_cast<std::uint32_t>(old >> 59u);
    return (xorshifted >> rot) | (xorshifted << ((32u - rot) & 31u));
  }

  // Uniform in [0, 1).
  double uniform() { return next_u32() * (1.0 / 4294967296.0); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n). n must be > 0; slight modulo bias is
  // irrelevant at the n used here (n << 2^32).
  int uniform_int(int n) { return static_cast<int>(next_u32() % static_cast<std::uint32_t>(n)); }

  // Standard normal via Box-Muller (single value, mate discarded to keep the
  // stream position independent of call parity).
  double normal() {
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 1e-12);
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
  }

  // Independent child stream; forking does not disturb this stream.
  Rng fork(std::uint64_t stream) const {
    return Rng(state_ ^ 0x9e3779b97f4a7c15ULL, stream + 1);
  }

 private:
  std::uint64_t state_;
  std::uint64_t inc_;
};

}  // namespace sgrd
