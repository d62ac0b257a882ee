#include <doctest.h>

#include <cmath>
#include <set>
#include <vector>

#include "bcp/rng.hpp"

using bcp::rng::Philox4x32;
using bcp::rng::Stream;

TEST_CASE("Philox4x32-10 known-answer vectors") {
  using C = Philox4x32::Counter;
  using K = Philox4x32::Key;
  CHECK(Philox4x32::apply(C{0, 0, 0, 0}, K{0, 0}) ==
        C{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu, 0x9b00dbd8u});
  CHECK(Philox4x32::apply(C{0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu},
                          K{0xffffffffu, 0xffffffffu}) ==
        C{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u, 0x6d5451fdu});
  CHECK(Philox4x32::apply(C{0x243f6a88u, 0x85a308d3u, 0x13198a2eu, 0x03707344u},
                          K{0xa4093822u, 0x299f31d0u}) ==
        C{0xd16cfe09u, 0x94fdccebu, 0x5001e420u, 0x24126ea1u});
}

TEST_CASE("interleaved blocks match single-block evaluation") {
  Philox4x32::Counter a{1, 2, 3, 4}, b{5, 6, 7, 8};
  const Philox4x32::Key k{9, 10};
  const auto ra = Philox4x32::apply(a, k), rb = Philox4x32::apply(b, k);
  Philox4x32::apply2(a, b, k);
  CHECK(a == ra);
  CHECK(b == rb);
}

TEST_CASE("streams are pure functions of seed, path and tag") {
  Stream a(42, 7), b(42, 7), c(42, 8), d(42, 7, 1), e(43, 7);
  std::set<std::uint32_t> firsts;
  for (int i = 0; i < 100; ++i) {
    const auto x = a();
    CHECK(x == b());
    if (i == 0) {
      firsts.insert(x);
      firsts.insert(c());
      firsts.insert(d());
      firsts.insert(e());
    }
  }
  CHECK(firsts.size() == 4);
}

TEST_CASE("uniform and normal moments") {
  Stream s(1, 0);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0, sn4 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = s.uniform();
    REQUIRE(u > 0.0);
    REQUIRE(u < 1.0);
    su += u;
  }
  for (int i = 0; i < n; ++i) {
    const double z = s.normal();
    sn += z;
    sn2 += z * z;
    sn4 += z * z * z * z;
  }
  CHECK(std::abs(su / n - 0.5) < 5 * std::sqrt(1.0 / 12 / n));
  CHECK(std::abs(sn / n) < 5 / std::sqrt(n));
  CHECK(std::abs(sn2 / n - 1.0) < 5 * std::sqrt(2.0 / n));
  CHECK(std::abs(sn4 / n - 3.0) < 5 * std::sqrt(96.0 / n));
}
