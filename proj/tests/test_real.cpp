#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "packlab/config.hpp"
#include "packlab/real.hpp"
#include "packlab/rng.hpp"

using namespace packlab;

TEST_CASE("exact dyadic construction and comparison") {
  Real q = Real::pow2(-2, 128);
  CHECK(q == Real::parse("0.25", 128));
  CHECK(q == Real::parse("0x1p-2", 128));
  CHECK(q < Real::one(128));
  CHECK(ldexp2(q, 2) == Real::one(128));
  CHECK(Real::pow2(-200, 128).sign() > 0);
}

TEST_CASE("correctly rounded pow recovers exact dyadic roots") {
  // (4^-n)^(1/2) = 2^-n exactly at any precision
  for (int n = 1; n <= 40; ++n) {
    Real t = Real::pow2(-2 * n, 128);
    CHECK(rational_pow(t, 1, 2, 128) == Real::pow2(-n, 128));
  }
  // (8^-n)^(2/3) = 4^-n exactly
  for (int n = 1; n <= 20; ++n) {
    Real t = Real::pow2(-3 * n, 128);
    CHECK(rational_pow(t, 2, 3, 128) == Real::pow2(-2 * n, 128));
  }
}

TEST_CASE("directed rounding brackets the exact value") {
  Real t = Real::parse("0.3", 128);
  Real lo = rational_pow(t, 1, 3, 128, Rnd::Down);
  Real hi = rational_pow(t, 1, 3, 128, Rnd::Up);
  CHECK(lo <= hi);
  Real mid = rational_pow(t, 1, 3, 256, Rnd::Near);
  CHECK(lo <= mid);
  CHECK(mid <= hi);
  CHECK(sub(hi, lo, 128, Rnd::Up) <= Real::pow2(-120, 128));
}

TEST_CASE("hex round trip is bit exact") {
  Rng rng(7);
  for (int i = 0; i < 50; ++i) {
    Real x = rng.real01(128);
    CHECK(Real::parse(x.hex(), 128) == x);
  }
}

TEST_CASE("interval arithmetic keeps enclosures valid") {
  Interval a{Real::parse("0.1", 64, Rnd::Down), Real::parse("0.1", 64, Rnd::Up)};
  Interval b{Real::parse("0.2", 64, Rnd::Down), Real::parse("0.2", 64, Rnd::Up)};
  Interval s = iadd(a, b, 64);
  CHECK(s.contains(Real::parse("0.3", 256)));
  Interval sq = isqr_nn(a, 64);
  CHECK(sq.contains(Real::parse("0.01", 256)));
}

TEST_CASE("numeric literal forms") {
  CHECK(parse_real("2^-20", 128) == Real::pow2(-20, 128));
  CHECK(parse_real("4^-3", 128) == Real::pow2(-6, 128));
  CHECK(parse_real("1/4", 128) == Real::pow2(-2, 128));
  CHECK(parse_real("0x1.8p-3", 128) == Real::parse("0.1875", 128));
  CHECK_THROWS_AS(parse_real("zebra", 128), Error);
  auto r = parse_rational("6/8");
  REQUIRE(r.has_value());
  CHECK(r->num == 3);
  CHECK(r->den == 4);
}

TEST_CASE("seeded rng reproduces") {
  Rng a(42), b(42);
  for (int i = 0; i < 16; ++i) CHECK(a.bits() == b.bits());
}
