#pragma once

#include <cstdint>

namespace detbench {

// Deterministic RNG with explicit bit-level conversions. std:: distributions
// are implementation-defined, so every draw here is spelled out; the same
// (seed, stream) pair produces the same values on every platform.
class Rng {
 public:
  explicit Rng(uint64_t seed, uint64_t stream = 0);

  uint64_t next_u64();

  double uniform();                         // [0, 1), 53-bit
  double uniform(double lo, double hi);     // [lo, hi)
  int64_t uniform_int(int64_t lo, int64_t hi);  // inclusive both ends
  bool bernoulli(double p);
  double normal();                          // standard normal, Box-Muller
  double gamma(double shape);               // scale 1, Marsaglia-Tsang
  double beta(double a, double b);

 private:
  uint64_t state_;
};

}  // namespace detbench
