#pragma once

// Seeded pseudo-random generator used for every source of randomness in the
// project. The algorithm is pinned so that streams are reproducible across
// implementations and platforms:
//
//   state seeding:  splitmix64 applied once to the user seed (and once more
//                   per derivation salt), i.e.
//                     z = (s += 0x9E3779B97F4A7C15)
//                     z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
//                     z = (z ^ (z >> 27)) * 0x94D049BB133111EB
//                     return z ^ (z >> 31)
//   next():         xorshift64* --
//                     x ^= x >> 12; x ^= x << 25; x ^= x >> 27;
//                     return x * 0x2545F4914F6CDD1D
//   uniform():      next() >> 11, scaled by 2^-53  -> double in [0, 1)
//   gaussian():     Box-Muller on two uniform() draws; the second value of
//                   each pair is cached and returned by the following call.
//
// A zero xorshift state would be absorbing; seeding guards against it.

#include <cmath>
#include <cstdint>

namespace robosim {

inline std::uint64_t splitmix64(std::uint64_t& s) {
  std::uint64_t z = (s += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class Prng {
 public:
  explicit Prng(std::uint64_t seed) {
    std::uint64_t s = seed;
    state_ = splitmix64(s);
    if (state_ == 0) state_ = 0x9E3779B97F4A7C15ULL;
  }

  // Independent stream for a sub-purpose; same (seed, salt) -> same stream.
  Prng derive(std::uint64_t salt) const {
    std::uint64_t s = state_ ^ (salt * 0xD1B54A32D192ED03ULL);
    return Prng(splitmix64(s));
  }

  std::uint64_t next() {
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // [0, 1)
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  // [lo, hi)
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) { return n ? next() % n : 0; }

  double gaussian() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    double u2 = uniform();
    // avoid log(0)
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  double gaussian(double mean, double stddev) { return mean + stddev * gaussian(); }

 private:
  explicit Prng(std::uint64_t raw, int) : state_(raw ? raw : 1) {}

  std::uint64_t state_ = 1;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace robosim
