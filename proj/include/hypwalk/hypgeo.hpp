#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>

#include "hypwalk/group.hpp"
#include "hypwalk/path.hpp"
#include "hypwalk/rational.hpp"

namespace hypwalk {

/// (x|y)_z = (d(x,z) + d(y,z) - d(x,y)) / 2, a half-integer on Cayley graphs.
Rational gromov_product(const GroupModel& model, const Word& x, const Word& y, const Word& z);

/// Least c >= 0 such that (t-s)/lambda - c <= d(p(s), p(t)) for every pair
/// of vertex parameters s < t. Exact; O(|p|^2) with O(1) work per pair.
Rational min_additive_constant(const GroupModel& model, const Path& p, const Rational& lambda);

/// True iff p is a (lambda, c)-quasi-geodesic at the vertex level.
bool is_quasi_geodesic(const GroupModel& model, const Path& p, const QGConstants& k);

/// Explicit Morse constant bound 92 lambda^2 (c + delta).
Rational morse_bound(const Rational& delta, const QGConstants& k);

/// Distance from v to the nearest element of `targets` (targets nonempty).
std::int64_t distance_to_set(const GroupModel& model, const Word& v, std::span<const Word> targets);

/// Vertex-level Hausdorff distance between the vertex sets of p and q.
Rational hausdorff_distance(const GroupModel& model, const Path& p, const Path& q);

/// Subpath on parameters [K, n-K]; empty when K > n/2 or no vertex lies in
/// that window.
Path central_segment(const Path& p, const Rational& k);

struct ContainmentCheck {
  Rational k;         ///< max endpoint gap between the two geodesics
  Path segment;       ///< the (k + 2 delta)-central segment of p1
  bool contained = false;
};

/// Checks that the (K + 2 delta)-central segment of p1 lies in the
/// 2 delta-neighborhood of p2, K the larger endpoint gap.
ContainmentCheck central_segment_containment_check(const GroupModel& model, const Path& p1,
                                                   const Path& p2, const Rational& delta);

struct BrokenConcatConstants {
  Rational morse;              ///< M for (lambda, c)-quasi-geodesics
  Rational c1;                 ///< 12 (C0 + delta) + c + 1
  QGConstants general;         ///< (4 lambda, 5/2 M + C1)
  QGConstants geodesic_case;   ///< (2, 2 C1)
};

/// Constants for concatenations of long quasi-geodesic pieces with small
/// junction Gromov products. Throws hypothesis_violated when C0 < 14 delta.
BrokenConcatConstants broken_concat_constants(const Rational& delta, const QGConstants& k,
                                              const Rational& c0);

enum class BrokenConcatOutcome { prediction_holds, prediction_failed, hypotheses_not_met };

/// Checks the hypotheses on `segments` (consecutive, each (lambda, c), each
/// of length >= lambda C1, junction Gromov products <= C0) and, when they
/// hold, whether the concatenation has the predicted constants.
BrokenConcatOutcome broken_concat_verify(const GroupModel& model, std::span<const Path> segments,
                                         const Rational& delta, const Rational& c0,
                                         const QGConstants& k);

/// diam { v in p : d(v, targets) <= K }, with diam of an empty set = 0.
Rational neighborhood_diameter(const GroupModel& model, const Path& p,
                               std::span<const Word> targets, const Rational& k);

struct IndexRange {
  std::size_t first = 0;
  std::size_t last = 0;  ///< inclusive
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

struct MatchWitness {
  Word g;
  IndexRange range_p;
  IndexRange range_q;
  bool reversed = false;  ///< g p' runs along q' in decreasing index order
  Rational hausdorff;
};

/// Searches candidates g (in serialized-word order), alignments of g p
/// against q (forward before reversed orientation, p start ascending, q
/// start ascending, longest run first) whose vertices pair off within B
/// along a diagonal of arc length >= A on both sides.
std::optional<MatchWitness> find_match(const GroupModel& model, const Path& p, const Path& q,
                                       const Rational& a, const Rational& b,
                                       std::span<const Word> candidates,
                                       std::size_t candidate_cap = 100'000);

/// find_match(p, p) over candidates with the identity removed.
std::optional<MatchWitness> find_self_match(const GroupModel& model, const Path& p,
                                            const Rational& a, const Rational& b,
                                            std::span<const Word> candidates,
                                            std::size_t candidate_cap = 100'000);

/// Least delta4 with (x|y)_w >= min((x|z)_w, (y|z)_w) - delta4 over every
/// quadruple of `points`; computed through the equivalent condition that
/// the largest of the three pair-sums exceeds the middle one by <= 2 delta4.
Rational four_point_delta(const GroupModel& model, std::span<const Word> points,
                          std::uint64_t quadruple_budget = 2'000'000'000ULL);

}  // namespace hypwalk
