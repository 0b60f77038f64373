#include "hypwalk/hypgeo.hpp"

#include <algorithm>
#include <cstdlib>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include "hypwalk/error.hpp"

namespace hypwalk {

namespace {

// Appends `x` to a reduced word kept as a stack and returns the change in
// word length. Mirrors append_letter without re-validating the letter.
std::int64_t push_step(const GroupModel& model, std::vector<Letter>& stack, const Letter& x) {
  if (!stack.empty() && stack.back().factor == x.factor) {
    Letter& top = stack.back();
    const int m = model.order(x.factor);
    if (m == 0) {
      const std::int64_t before = std::abs(static_cast<std::int64_t>(top.power));
      const int merged = top.power + x.power;
      if (merged == 0) {
        stack.pop_back();
        return -before;
      }
      top.power = merged;
      return std::abs(static_cast<std::int64_t>(merged)) - before;
    }
    const int merged = (top.power + x.power) % m;
    if (merged == 0) {
      stack.pop_back();
      return -1;
    }
    top.power = merged;
    return 0;
  }
  stack.push_back(x);
  return model.letter_length(x);
}

struct IntRatio {
  std::int64_t num;
  std::int64_t den;
};

IntRatio small_ratio(const Rational& r, const char* what) {
  const BigInt& n = boost::multiprecision::numerator(r);
  const BigInt& d = boost::multiprecision::denominator(r);
  constexpr std::int64_t limit = std::int64_t{1} << 40;
  if (n > limit || n < -limit || d > limit) {
    throw Error(ErrorCode::precondition, std::string(what) + " has too large a numerator/denominator");
  }
  return {n.convert_to<std::int64_t>(), d.convert_to<std::int64_t>()};
}

}  // namespace

Rational gromov_product(const GroupModel& model, const Word& x, const Word& y, const Word& z) {
  const std::int64_t twice = distance(model, x, z) + distance(model, y, z) - distance(model, x, y);
  return Rational(twice, 2);
}

Rational min_additive_constant(const GroupModel& model, const Path& p, const Rational& lambda) {
  if (lambda < 1) throw Error(ErrorCode::precondition, "lambda must be >= 1");
  const IntRatio lam = small_ratio(lambda, "lambda");
  const auto steps = path_steps(model, p);
  const auto& cum = p.cumulative_length();
  // maximize den*(t-s) - num*d over s < t, then divide by num.
  std::int64_t best = 0;
  std::vector<Letter> stack;
  for (std::size_t s = 0; s + 1 < p.size(); ++s) {
    stack.clear();
    std::int64_t d = 0;
    for (std::size_t t = s + 1; t < p.size(); ++t) {
      if (const auto& step = steps[t - 1]) d += push_step(model, stack, *step);
      const std::int64_t score = lam.den * (cum[t] - cum[s]) - lam.num * d;
      best = std::max(best, score);
    }
  }
  return Rational(best, lam.num);
}

bool is_quasi_geodesic(const GroupModel& model, const Path& p, const QGConstants& k) {
  if (k.lambda < 1 || k.c < 0) return false;
  // Every pair satisfies (t-s)/lambda - c <= length/lambda - c <= 0 <= d.
  if (Rational(p.length()) / k.lambda <= k.c) return true;
  return min_additive_constant(model, p, k.lambda) <= k.c;
}

Rational morse_bound(const Rational& delta, const QGConstants& k) {
  return 92 * k.lambda * k.lambda * (k.c + delta);
}

std::int64_t distance_to_set(const GroupModel& model, const Word& v, std::span<const Word> targets) {
  if (targets.empty()) throw Error(ErrorCode::precondition, "distance to an empty set");
  std::int64_t best = std::numeric_limits<std::int64_t>::max();
  for (const Word& t : targets) {
    best = std::min(best, distance(model, v, t));
    if (best == 0) break;
  }
  return best;
}

Rational hausdorff_distance(const GroupModel& model, const Path& p, const Path& q) {
  if (p.empty() && q.empty()) return Rational(0);
  if (p.empty() || q.empty()) {
    throw Error(ErrorCode::precondition, "Hausdorff distance between an empty and a nonempty path");
  }
  std::int64_t worst = 0;
  for (const Word& v : p.vertices()) worst = std::max(worst, distance_to_set(model, v, q.vertices()));
  for (const Word& v : q.vertices()) worst = std::max(worst, distance_to_set(model, v, p.vertices()));
  return Rational(worst);
}

Path central_segment(const Path& p, const Rational& k) {
  if (p.empty()) return {};
  const Rational n(p.length());
  if (k < 0) throw Error(ErrorCode::precondition, "central segment radius must be nonnegative");
  if (2 * k > n) return {};
  const auto& cum = p.cumulative_length();
  std::size_t first = p.size();
  std::size_t last = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const Rational t(cum[i]);
    if (t >= k && t <= n - k) {
      first = std::min(first, i);
      last = i;
    }
  }
  if (first == p.size()) return {};
  return p.subpath(first, last);
}

ContainmentCheck central_segment_containment_check(const GroupModel& model, const Path& p1,
                                                   const Path& p2, const Rational& delta) {
  if (p1.empty() || p2.empty()) throw Error(ErrorCode::precondition, "containment check needs nonempty geodesics");
  ContainmentCheck out;
  out.k = Rational(std::max(distance(model, p1.front(), p2.front()), distance(model, p1.back(), p2.back())));
  out.segment = central_segment(p1, out.k + 2 * delta);
  out.contained = true;
  for (const Word& v : out.segment.vertices()) {
    if (Rational(distance_to_set(model, v, p2.vertices())) > 2 * delta) {
      out.contained = false;
      break;
    }
  }
  return out;
}

BrokenConcatConstants broken_concat_constants(const Rational& delta, const QGConstants& k,
                                              const Rational& c0) {
  if (c0 < 14 * delta) {
    throw Error(ErrorCode::hypothesis_violated,
                "C0 = " + to_string(c0) + " is below 14 delta = " + to_string(Rational(14 * delta)));
  }
  BrokenConcatConstants out;
  out.morse = morse_bound(delta, k);
  out.c1 = 12 * (c0 + delta) + k.c + 1;
  out.general = QGConstants{4 * k.lambda, Rational(5, 2) * out.morse + out.c1};
  out.geodesic_case = QGConstants{Rational(2), 2 * out.c1};
  return out;
}

BrokenConcatOutcome broken_concat_verify(const GroupModel& model, std::span<const Path> segments,
                                         const Rational& delta, const Rational& c0,
                                         const QGConstants& k) {
  if (segments.empty() || c0 < 14 * delta) return BrokenConcatOutcome::hypotheses_not_met;
  const BrokenConcatConstants constants = broken_concat_constants(delta, k, c0);

  bool all_geodesic = true;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const Path& q = segments[i];
    if (q.empty() || !is_quasi_geodesic(model, q, k)) return BrokenConcatOutcome::hypotheses_not_met;
    if (i + 1 < segments.size() && !(q.back() == segments[i + 1].front())) {
      return BrokenConcatOutcome::hypotheses_not_met;
    }
    if (segments.size() > 1 && Rational(q.length()) < k.lambda * constants.c1) {
      return BrokenConcatOutcome::hypotheses_not_met;
    }
    all_geodesic = all_geodesic && distance(model, q.front(), q.back()) == q.length();
  }
  for (std::size_t i = 0; i + 1 < segments.size(); ++i) {
    const Word& before = segments[i].front();
    const Word& junction = segments[i].back();
    const Word& after = segments[i + 1].back();
    if (gromov_product(model, before, after, junction) > c0) return BrokenConcatOutcome::hypotheses_not_met;
  }

  const Path whole = concatenate(model, segments);
  bool holds = is_quasi_geodesic(model, whole, constants.general);
  if (all_geodesic) holds = holds && is_quasi_geodesic(model, whole, constants.geodesic_case);
  return holds ? BrokenConcatOutcome::prediction_holds : BrokenConcatOutcome::prediction_failed;
}

Rational neighborhood_diameter(const GroupModel& model, const Path& p, std::span<const Word> targets,
                               const Rational& k) {
  if (targets.empty() || k < 0) return Rational(0);
  const std::int64_t radius = to_int64(floor(k));
  std::set<Word> near;
  for (const Word& v : p.vertices()) {
    if (distance_to_set(model, v, targets) <= radius) near.insert(v);
  }
  std::int64_t diam = 0;
  for (auto i = near.begin(); i != near.end(); ++i) {
    for (auto j = std::next(i); j != near.end(); ++j) diam = std::max(diam, distance(model, *i, *j));
  }
  return Rational(diam);
}

std::optional<MatchWitness> find_match(const GroupModel& model, const Path& p, const Path& q,
                                       const Rational& a, const Rational& b,
                                       std::span<const Word> candidates, std::size_t candidate_cap) {
  if (a <= 0) throw Error(ErrorCode::precondition, "match length A must be positive");
  if (candidates.size() > candidate_cap) {
    throw Error(ErrorCode::candidate_budget_exceeded,
                std::to_string(candidates.size()) + " candidates exceed the cap " + std::to_string(candidate_cap));
  }
  if (p.empty() || q.empty()) return std::nullopt;

  std::vector<std::pair<std::string, const Word*>> order;
  order.reserve(candidates.size());
  for (const Word& g : candidates) order.emplace_back(format_word(g), &g);
  std::sort(order.begin(), order.end());

  const auto& cp = p.cumulative_length();
  const auto& cq = q.cumulative_length();
  const std::size_t np = p.size();
  const std::size_t nq = q.size();
  std::vector<char> close(np * nq);
  const std::int64_t b_int = b < 0 ? -1 : to_int64(floor(b));

  for (const auto& [name, gp] : order) {
    const Word& g = *gp;
    const Path moved = translate(model, g, p);
    for (std::size_t i = 0; i < np; ++i) {
      for (std::size_t j = 0; j < nq; ++j) {
        close[i * nq + j] = distance(model, moved[i], q[j]) <= b_int;
      }
    }
    for (int orientation = 0; orientation < 2; ++orientation) {
      const bool reversed = orientation == 1;
      for (std::size_t i = 0; i < np; ++i) {
        for (std::size_t j = 0; j < nq; ++j) {
          if (!close[i * nq + j]) continue;
          // Only maximal runs: skip starts whose diagonal predecessor is close.
          if (i > 0) {
            if (!reversed && j > 0 && close[(i - 1) * nq + (j - 1)]) continue;
            if (reversed && j + 1 < nq && close[(i - 1) * nq + (j + 1)]) continue;
          }
          std::size_t run = 0;
          while (i + run + 1 < np) {
            const std::size_t next_j = reversed ? j - (run + 1) : j + run + 1;
            if (reversed ? j < run + 1 : next_j >= nq) break;
            if (!close[(i + run + 1) * nq + next_j]) break;
            ++run;
          }
          const std::size_t end_i = i + run;
          const std::size_t end_j = reversed ? j - run : j + run;
          const Rational len_p(cp[end_i] - cp[i]);
          const Rational len_q(reversed ? cq[j] - cq[end_j] : cq[end_j] - cq[j]);
          if (len_p < a || len_q < a) continue;
          MatchWitness w;
          w.g = g;
          w.range_p = {i, end_i};
          w.range_q = reversed ? IndexRange{end_j, j} : IndexRange{j, end_j};
          w.reversed = reversed;
          w.hausdorff = hausdorff_distance(model, moved.subpath(i, end_i),
                                           q.subpath(w.range_q.first, w.range_q.last));
          return w;
        }
      }
    }
  }
  return std::nullopt;
}

std::optional<MatchWitness> find_self_match(const GroupModel& model, const Path& p, const Rational& a,
                                            const Rational& b, std::span<const Word> candidates,
                                            std::size_t candidate_cap) {
  std::vector<Word> nontrivial;
  nontrivial.reserve(candidates.size());
  for (const Word& g : candidates) {
    if (!g.empty()) nontrivial.push_back(g);
  }
  return find_match(model, p, p, a, b, nontrivial, candidate_cap);
}

Rational four_point_delta(const GroupModel& model, std::span<const Word> points,
                          std::uint64_t quadruple_budget) {
  const std::size_t n = points.size();
  if (n < 4) return Rational(0);
  const long double quads = static_cast<long double>(n) * (n - 1) * (n - 2) * (n - 3) / 24.0L;
  if (quads > static_cast<long double>(quadruple_budget)) {
    throw Error(ErrorCode::budget_exceeded,
                std::to_string(n) + " points give more quadruples than the budget " + std::to_string(quadruple_budget));
  }
  std::vector<std::int32_t> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const auto v = static_cast<std::int32_t>(distance(model, points[i], points[j]));
      d[i * n + j] = v;
      d[j * n + i] = v;
    }
  }
  std::int32_t worst = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const std::int32_t dij = d[i * n + j];
      for (std::size_t k = j + 1; k < n; ++k) {
        const std::int32_t dik = d[i * n + k];
        const std::int32_t djk = d[j * n + k];
        const std::int32_t* row_i = &d[i * n];
        const std::int32_t* row_j = &d[j * n];
        const std::int32_t* row_k = &d[k * n];
        for (std::size_t l = k + 1; l < n; ++l) {
          std::int32_t s1 = dij + row_k[l];
          std::int32_t s2 = dik + row_j[l];
          std::int32_t s3 = row_i[l] + djk;
          if (s1 < s2) std::swap(s1, s2);
          if (s2 < s3) std::swap(s2, s3);
          if (s1 < s2) std::swap(s1, s2);
          worst = std::max(worst, s1 - s2);
        }
      }
    }
  }
  return Rational(worst, 2);
}

}  // namespace hypwalk
