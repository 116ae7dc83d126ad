#include <doctest.h>

#include <cmath>
#include <cstdint>

#include "robosim/prng.hpp"

using robosim::Prng;

TEST_CASE("same seed gives identical streams") {
  Prng a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
  Prng a(1), b(2);
  int same = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next() == b.next()) ++same;
  CHECK(same == 0);
}

TEST_CASE("derived streams are independent of parent draws") {
  Prng a(7);
  Prng d1 = a.derive(3);
  a.next();
  a.next();
  Prng d2 = Prng(7).derive(3);
  for (int i = 0; i < 16; ++i) CHECK(d1.next() == d2.next());
}

TEST_CASE("uniform stays in [0,1) and covers the range") {
  Prng rng(123);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 10000; ++i) {
    double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.01);
  CHECK(hi > 0.99);
}

TEST_CASE("gaussian moments are sane") {
  Prng rng(99);
  const int n = 200000;
  double sum = 0.0, sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double g = rng.gaussian();
    sum += g;
    sq += g * g;
  }
  const double mean = sum / n;
  const double var = sq / n - mean * mean;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("gaussian with parameters scales and shifts") {
  Prng a(5), b(5);
  for (int i = 0; i < 32; ++i) {
    const double g = a.gaussian();
    CHECK(b.gaussian(2.0, 3.0) == doctest::Approx(2.0 + 3.0 * g).epsilon(1e-15));
  }
}
