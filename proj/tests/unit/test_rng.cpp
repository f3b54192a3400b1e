#include <doctest.h>

#include <cmath>
#include <set>

#include "dppnys/rng.hpp"
#include "dppnys/types.hpp"

using namespace dppnys;

TEST_CASE("philox known answers") {
  using A4 = std::array<std::uint32_t, 4>;
  using A2 = std::array<std::uint32_t, 2>;
  CHECK(Rng::philox(A4{0, 0, 0, 0}, A2{0, 0}) == A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
  CHECK(Rng::philox(A4{0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, A2{0xffffffff, 0xffffffff}) ==
        A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
  CHECK(Rng::philox(A4{0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, A2{0xa4093822, 0x299f31d0}) ==
        A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
}

TEST_CASE("streams and helpers") {
  Rng a(42), b(42), c(42, 1);
  for (int i = 0; i < 10; ++i) CHECK(a() == b());
  CHECK(Rng(42)() != c());
  CHECK(Rng(1).split(3)() == Rng(1).split(3)());
  CHECK(Rng(1).split(3)() != Rng(1).split(4)());
  CHECK(hash_label("gibbs-chain") == hash_label("gibbs-chain"));
  CHECK(hash_label("a", 1) != hash_label("a", 2));

  Rng r(7);
  double sum = 0.0, sum2 = 0.0;
  std::set<std::uint64_t> seen;
  for (int i = 0; i < 100000; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    const double z = r.normal();
    sum += z;
    sum2 += z * z;
    seen.insert(r.below(7));
  }
  CHECK(seen.size() == 7);
  CHECK(std::abs(sum / 100000) < 0.02);
  CHECK(std::abs(sum2 / 100000 - 1.0) < 0.02);
  CHECK_THROWS_AS(r.below(0), std::invalid_argument);
}

TEST_CASE("LandmarkSet") {
  LandmarkSet s({5, 1, 3});
  CHECK(s[0] == 1);
  CHECK(s[2] == 5);
  CHECK(s.contains(3));
  CHECK_FALSE(s.contains(2));
  CHECK_THROWS_AS(LandmarkSet({1, 1}), std::invalid_argument);
  CHECK_THROWS_AS(LandmarkSet({-1, 2}), std::invalid_argument);
  CHECK_THROWS_AS(LandmarkSet(std::vector<Index>{1, 6}, 5), std::out_of_range);
  CHECK(binomial(10, 3) == 120.0);
  CHECK(binomial(5, 7) == 0.0);
}
