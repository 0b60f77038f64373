#include <doctest.h>

#include <cmath>
#include <set>

#include "hypwalk/error.hpp"
#include "hypwalk/randwalk.hpp"

using namespace hypwalk;

TEST_CASE("seeding is deterministic and well spread") {
  CHECK(mix64(0) == mix64(0));
  CHECK(derive_seed(1, 0) != derive_seed(1, 1));
  CHECK(derive_seed(1, 0) != derive_seed(2, 0));
  CHECK(hash_id("drift") == hash_id("drift"));
  CHECK(hash_id("drift") != hash_id("drift2"));
  CHECK(hash_id("") == 0xcbf29ce484222325ULL);

  Stream a(42), b(42);
  for (int i = 0; i < 100; ++i) CHECK(a.next() == b.next());

  std::set<std::uint64_t> keys;
  for (std::uint64_t t = 0; t < 10000; ++t) keys.insert(derive_seed(7, t));
  CHECK(keys.size() == 10000);

  // chi-square on 10 buckets, 100000 draws: 99.9% critical value is 27.9
  Stream s(99);
  std::vector<int> bucket(10, 0);
  for (int i = 0; i < 100000; ++i) ++bucket[s.below(10)];
  double chi = 0.0;
  for (int c : bucket) chi += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi < 27.9);
  for (int i = 0; i < 1000; ++i) {
    const double u = s.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("distributions: flags, validation, errors") {
  const GroupModel f2 = GroupModel::free_group(2);
  const Distribution u = Distribution::uniform_generators(f2);
  CHECK(u.support.size() == 4);
  CHECK(u.symmetric);
  CHECK(u.full_support_generators);
  const DistributionReport r = validate_distribution(f2, u);
  CHECK(r.probabilities_valid);
  CHECK(r.permissible);
  CHECK_FALSE(r.contains_identity);

  const Distribution skew = Distribution::from_weights(
      f2, {{parse_word(f2, "a^1"), 2.0}, {parse_word(f2, "a^-1"), 1.0}, {parse_word(f2, "b^1"), 1.0},
           {parse_word(f2, "b^-1"), 1.0}});
  CHECK_FALSE(skew.symmetric);
  CHECK(skew.full_support_generators);
  CHECK_FALSE(validate_distribution(f2, skew).permissible);
  CHECK(skew.support[0].second == doctest::Approx(0.4));

  const Distribution partial =
      Distribution::from_weights(f2, {{parse_word(f2, "a^1"), 1.0}, {parse_word(f2, "a^-1"), 1.0}});
  CHECK(partial.symmetric);
  CHECK_FALSE(partial.full_support_generators);

  CHECK_THROWS_AS(Distribution::from_weights(f2, {}), Error);
  CHECK_THROWS_AS(Distribution::from_weights(f2, {{parse_word(f2, "a^1"), -1.0}}), Error);
  Distribution broken = u;
  broken.support[0].second = 0.5;
  try {
    validate_distribution(f2, broken);
    FAIL("expected invalid-probabilities");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::invalid_probabilities);
  }
}

TEST_CASE("walks: prefixes, endpoints, determinism") {
  const GroupModel f2 = GroupModel::free_group(2);
  const Distribution u = Distribution::uniform_generators(f2);
  const WalkSample w = sample_walk(f2, u, 50, 123);
  CHECK(w.increments.size() == 50);
  CHECK(w.prefixes.size() == 51);
  CHECK(w.prefixes.front().empty());
  for (std::size_t j = 0; j < w.increments.size(); ++j) {
    CHECK(w.prefixes[j + 1] == multiply(f2, w.prefixes[j], w.increments[j]));
  }
  CHECK(w.endpoint() == walk_endpoint(f2, u, 50, 123));
  CHECK(sample_walk(f2, u, 50, 123).prefixes == w.prefixes);
  CHECK(walk_geodesic(f2, w).length() == length(f2, w.endpoint()));
  CHECK(walk_endpoint(f2, u, 0, 1).empty());

  // a word-valued step law: prefixes still multiply correctly
  const Distribution words = Distribution::from_weights(
      f2, {{parse_word(f2, "a^1.b^1"), 1.0}, {parse_word(f2, "b^-1.a^-1"), 1.0}, {parse_word(f2, "a^2"), 1.0}});
  const WalkSample v = sample_walk(f2, words, 30, 5);
  for (std::size_t j = 0; j < v.increments.size(); ++j) {
    CHECK(v.prefixes[j + 1] == multiply(f2, v.prefixes[j], v.increments[j]));
  }
}

TEST_CASE("Wilson interval") {
  const BernoulliEstimate e = wilson_estimate(50, 100);
  CHECK(e.p_hat == doctest::Approx(0.5));
  CHECK(e.lo == doctest::Approx(0.40383).epsilon(1e-4));
  CHECK(e.hi == doctest::Approx(0.59617).epsilon(1e-4));
  const BernoulliEstimate zero = wilson_estimate(0, 1000);
  CHECK(zero.lo == 0.0);
  CHECK(zero.hi == doctest::Approx(0.003826).epsilon(1e-3));
  const BernoulliEstimate all = wilson_estimate(1000, 1000);
  CHECK(all.hi == 1.0);
  CHECK(all.lo < 1.0);
}

TEST_CASE("drift oracle and the distance-chain recursion") {
  CHECK(drift_oracle_uniform_free(2) == make_rational(1, 2));
  CHECK(drift_oracle_uniform_free(3) == make_rational(2, 3));
  CHECK(expected_distance_uniform_free(2, 0) == 0.0);
  CHECK(expected_distance_uniform_free(2, 1) == doctest::Approx(1.0));
  CHECK(expected_distance_uniform_free(2, 2) == doctest::Approx(1.5));
  // E[d_n] / n -> (k-1)/k
  CHECK(expected_distance_uniform_free(2, 4000) / 4000.0 == doctest::Approx(0.5).epsilon(1e-3));

  const GroupModel f2 = GroupModel::free_group(2);
  const Distribution u = Distribution::uniform_generators(f2);
  CHECK(drift_oracle(f2, u) == make_rational(1, 2));
  const Distribution skew = Distribution::from_weights(f2, {{parse_word(f2, "a^1"), 1.0}, {parse_word(f2, "b^1"), 1.0}});
  CHECK_THROWS_AS(drift_oracle(f2, skew), Error);
  const GroupModel p = GroupModel::free_product({2, 3});
  CHECK_THROWS_AS(drift_oracle(p, Distribution::uniform_generators(p)), Error);
}

TEST_CASE("Monte Carlo drift agrees with the exact expectation") {
  const GroupModel f2 = GroupModel::free_group(2);
  const Distribution u = Distribution::uniform_generators(f2);
  const DriftEstimate est = drift_estimate(f2, u, 200, 2000, 2024);
  const double exact = expected_distance_uniform_free(2, 200) / 200.0;
  CHECK(std::abs(est.mean_normalized_distance - exact) < 4.0 * est.std_error);
  CHECK(est.distances.size() == 2000);
  CHECK(drift_tail_fraction(est, 0.5, 10.0) == 0.0);
  CHECK_THROWS_AS(drift_estimate(f2, u, 200, 10, 1), Error);
}

TEST_CASE("event probabilities use independent per-walk streams") {
  const GroupModel f2 = GroupModel::free_group(2);
  const Distribution u = Distribution::uniform_generators(f2);
  const Distribution dists[] = {u, u};
  const BernoulliEstimate same = event_probability(
      f2, dists, 10, 500, 77, [](std::span<const WalkSample> w) { return w[0].endpoint() == w[1].endpoint(); });
  CHECK(same.p_hat < 0.05);
  const BernoulliEstimate nonneg = event_probability(
      f2, dists, 10, 100, 77, [](std::span<const WalkSample> w) { return w[0].n == 10; });
  CHECK(nonneg.p_hat == 1.0);
}
