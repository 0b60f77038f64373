#include <doctest.h>

#include "hypwalk/error.hpp"
#include "hypwalk/group.hpp"
#include "hypwalk/hypgeo.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace hypwalk;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::precondition;
}

}  // namespace

TEST_CASE("group models: construction and errors") {
  CHECK(parse_group("free(2)").spec() == "free(2)");
  CHECK(parse_group(" product(2, 3) ").spec() == "product(2,3)");
  CHECK(code_of([] { GroupModel::free_group(1); }) == ErrorCode::invalid_model);
  CHECK(code_of([] { GroupModel::free_product({2, 2}); }) == ErrorCode::invalid_model);
  CHECK(code_of([] { GroupModel::free_product({3}); }) == ErrorCode::invalid_model);
  CHECK(code_of([] { GroupModel::free_product({1, 3}); }) == ErrorCode::invalid_model);
  CHECK(code_of([] { parse_group("surface(2)"); }) == ErrorCode::parse_error);

  const GroupModel f2 = GroupModel::free_group(2);
  CHECK(f2.generators().size() == 4);
  CHECK(f2.finite_radical_trivial());
  CHECK(f2.action_acylindrical());
  const GroupModel p = GroupModel::free_product({2, 3});
  CHECK(p.generators().size() == 3);
}

TEST_CASE("free-product delta is certified on a ball") {
  const GroupModel p = GroupModel::free_product({2, 3});
  REQUIRE(p.delta_validation().has_value());
  CHECK(p.delta_validation()->radius == 5);
  CHECK(p.delta_validation()->points == oracle::product_ball_size({2, 3}, 5));
  // block graphs (trees of cliques) are 0-hyperbolic
  CHECK(p.delta_validation()->four_point == 0);
  CHECK(code_of([] { GroupModel::free_product({2, 3}, Rational(-1)); }) == ErrorCode::invalid_model);
}

TEST_CASE("words: parsing, formatting, invalid letters") {
  const GroupModel f2 = GroupModel::free_group(2);
  CHECK(parse_word(f2, "1").empty());
  CHECK(parse_word(f2, "").empty());
  CHECK(format_word(Word{}) == "1");
  CHECK(format_word(parse_word(f2, "a^2.b^-1.a^1")) == "a^2.b^-1.a^1");
  CHECK(format_word(parse_word(f2, "a.a.b")) == "a^2.b^1");
  CHECK(parse_word(f2, "a^2.a^-2").empty());
  CHECK(code_of([&] { parse_word(f2, "c^1"); }) == ErrorCode::invalid_letter);
  CHECK(code_of([&] { parse_word(f2, "a^0"); }) == ErrorCode::invalid_letter);
  CHECK(code_of([&] { parse_word(f2, "a^x"); }) == ErrorCode::parse_error);

  const GroupModel p = GroupModel::free_product({2, 3});
  CHECK(format_word(parse_word(p, "b^-1")) == "b^2");
  CHECK(parse_word(p, "a^2").empty());
  CHECK(format_word(parse_word(p, "b^1.b^1")) == "b^2");
  CHECK(code_of([&] { reduce(p, Word{Letter{2, 1}}); }) == ErrorCode::invalid_letter);
}

TEST_CASE("word arithmetic agrees with the reduction oracles") {
  Stream rng(11);
  for (const GroupModel& m : {GroupModel::free_group(2), GroupModel::free_group(3)}) {
    for (int trial = 0; trial < 3000; ++trial) {
      const Word x = testing_support::random_word(m, rng, 12);
      const Word y = testing_support::random_word(m, rng, 12);
      CHECK(oracle::spell(multiply(m, x, y)) == oracle::free_reduce(oracle::spell(x) + oracle::spell(y)));
      CHECK(oracle::spell(invert(m, x)) == oracle::free_inverse(oracle::spell(x)));
      CHECK(length(m, x) == static_cast<std::int64_t>(oracle::spell(x).size()));
      CHECK(distance(m, x, y) == oracle::distance(m, x, y));
    }
  }
  const GroupModel p = GroupModel::free_product({2, 3, 5});
  for (int trial = 0; trial < 3000; ++trial) {
    const Word x = testing_support::random_word(p, rng, 10);
    const Word y = testing_support::random_word(p, rng, 10);
    const auto prod = oracle::prod_reduce(
        [&] {
          auto s = oracle::prod_of(x);
          auto t = oracle::prod_of(y);
          s.insert(s.end(), t.begin(), t.end());
          return s;
        }(),
        p.orders());
    CHECK(oracle::prod_of(multiply(p, x, y)) == prod);
    CHECK(distance(p, x, y) == oracle::distance(p, x, y));
    CHECK(multiply(p, x, invert(p, x)).empty());
  }
}

TEST_CASE("power and unit steps") {
  const GroupModel f2 = GroupModel::free_group(2);
  const Word ab = parse_word(f2, "a^1.b^1");
  CHECK(format_word(power(f2, ab, 3)) == "a^1.b^1.a^1.b^1.a^1.b^1");
  CHECK(power(f2, ab, -2) == invert(f2, power(f2, ab, 2)));
  CHECK(power(f2, ab, 0).empty());
  const Word w = parse_word(f2, "a^3.b^-2");
  CHECK(static_cast<std::int64_t>(unit_steps(f2, w).size()) == length(f2, w));
  const GroupModel p = GroupModel::free_product({2, 3});
  CHECK(power(p, parse_word(p, "b^1"), 3).empty());
}

TEST_CASE("balls: sizes match counting formulas, triangle inequality holds") {
  const GroupModel f2 = GroupModel::free_group(2);
  for (int r = 0; r <= 4; ++r) CHECK(ball(f2, r).size() == oracle::free_ball_size(2, r));
  const GroupModel f3 = GroupModel::free_group(3);
  CHECK(ball(f3, 3).size() == oracle::free_ball_size(3, 3));
  const GroupModel p = GroupModel::free_product({2, 3});
  for (int r = 0; r <= 6; ++r) CHECK(ball(p, r).size() == oracle::product_ball_size({2, 3}, r));
  const GroupModel p3 = GroupModel::free_product({3, 4, 2});
  CHECK(ball(p3, 3).size() == oracle::product_ball_size({3, 4, 2}, 3));
  CHECK(code_of([&] { ball(f2, 6, 100); }) == ErrorCode::budget_exceeded);

  // exhaustive metric axioms on ball(3) of F_2
  const auto b = ball(f2, 3);
  std::int64_t violations = 0;
  for (const Word& x : b) {
    for (const Word& y : b) {
      const std::int64_t dxy = distance(f2, x, y);
      if (dxy != distance(f2, y, x) || (dxy == 0) != (x == y)) ++violations;
      for (const Word& z : b) {
        if (dxy > distance(f2, x, z) + distance(f2, z, y)) ++violations;
      }
    }
  }
  CHECK(violations == 0);
}

TEST_CASE("cyclic reduction and translation length") {
  const GroupModel f2 = GroupModel::free_group(2);
  CHECK(translation_length(f2, parse_word(f2, "a^1")) == 1);
  CHECK(translation_length(f2, parse_word(f2, "a^1.b^1.a^-1")) == 1);
  CHECK(translation_length(f2, parse_word(f2, "a^1.b^1.a^-1.b^-1")) == 4);
  CHECK(translation_length(f2, Word{}) == 0);
  CHECK_FALSE(is_loxodromic(f2, Word{}));

  const GroupModel p = GroupModel::free_product({2, 3});
  CHECK(translation_length(p, parse_word(p, "a^1.b^1")) == 2);
  CHECK(translation_length(p, parse_word(p, "b^1")) == 0);
  CHECK(translation_length(p, parse_word(p, "a^1.b^1.a^1")) == 0);  // conjugate of b
  CHECK(translation_length(p, parse_word(p, "b^1.a^1.b^1")) == 2);   // conjugate of b^2 a

  Stream rng(5);
  for (const GroupModel& m : {f2, p}) {
    for (int i = 0; i < 2000; ++i) {
      const Word g = testing_support::random_word(m, rng, 14);
      const CyclicReduction cr = cyclic_reduce(m, g);
      CHECK(multiply(m, multiply(m, cr.conjugator, cr.core), invert(m, cr.conjugator)) == g);
      // translation length is a conjugacy invariant
      const Word h = testing_support::random_word(m, rng, 5);
      const Word conj = multiply(m, multiply(m, h, g), invert(m, h));
      CHECK(translation_length(m, conj) == translation_length(m, g));
    }
  }
}

TEST_CASE("translation length equals the stable displacement on a power") {
  // tau(g) = (|g^{2N}| - |g^N|) / N; N = 60 kills every torsion element
  Stream rng(9);
  for (const GroupModel& m : {GroupModel::free_group(2), GroupModel::free_product({2, 3})}) {
    for (int i = 0; i < 500; ++i) {
      const Word g = testing_support::random_word(m, rng, 10);
      const std::int64_t tau = (length(m, power(m, g, 120)) - length(m, power(m, g, 60))) / 60;
      CHECK(translation_length(m, g) == tau);
    }
  }
}
