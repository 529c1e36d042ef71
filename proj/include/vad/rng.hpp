// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAD_RNG_HPP
#define VAD_RNG_HPP

#include <cmath>
#include <cstdint>
#include <numbers>

namespace vad {

// splitmix64; used both as a generator and to derive stream seeds.
inline uint64_t splitmix64(uint64_t& state) {
  uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Self-contained counter-free PRNG with cross-platform deterministic
// output (std:: distributions are implementation-defined, so all
// sampling goes through this).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {
    // decorrelate nearby seeds
    splitmix64(state_);
  }

  // Derives an independent stream for (seed, stream_id) pairs.
  static Rng stream(uint64_t seed, uint64_t stream_id) {
    uint64_t s = seed;
    splitmix64(s);
    s ^= 0xd1b54a32d192ed03ULL * (stream_id + 1);
    return Rng(s);
  }

  uint64_t next_u64() { return splitmix64(state_); }

  double uniform() {  // [0, 1)
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double normal(double mean = 0.0, double stddev = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + stddev * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return mean + stddev * r * std::cos(theta);
  }

  bool bernoulli(double p) { return uniform() < p; }

  // uniform integer in [0, n)
  uint64_t below(uint64_t n) { return next_u64() % n; }

 private:
  uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace vad

#endif  // VAD_RNG_HPP
