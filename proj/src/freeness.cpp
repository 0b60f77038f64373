#include "hypwalk/freeness.hpp"

#include <algorithm>
#include <cstdlib>
#include <set>
#include <string>
#include <type_traits>

#include "hypwalk/error.hpp"
#include "hypwalk/stallings.hpp"

namespace hypwalk {

namespace {

using Kind = MixedSyllable::Kind;

std::uint64_t sat_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_add_overflow(a, b, &r) ? UINT64_MAX : r;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t r = 0;
  return __builtin_mul_overflow(a, b, &r) ? UINT64_MAX : r;
}

std::vector<MixedSyllable> build_alphabet(int s_count, int walk_count, int exponent_bound) {
  std::vector<MixedSyllable> out;
  for (int i = 0; i < walk_count; ++i) {
    for (int e = 1; e <= exponent_bound; ++e) {
      out.push_back({Kind::x, i, e});
      out.push_back({Kind::x, i, -e});
    }
  }
  for (int i = 0; i < s_count; ++i) {
    out.push_back({Kind::s, i, 1});
    out.push_back({Kind::s, i, -1});
  }
  return out;
}

bool may_follow(const MixedSyllable* prev, const MixedSyllable& next) {
  if (prev == nullptr) return true;
  if (prev->kind == Kind::s) return next.kind == Kind::x;
  return next.kind == Kind::s || next.index != prev->index;
}

void check_bounds(int s_count, int walk_count, int max_syllables, int exponent_bound) {
  if (s_count < 0 || walk_count < 0 || max_syllables < 0 || exponent_bound < 1) {
    throw Error(ErrorCode::precondition, "enumeration bounds must be nonnegative, exponent bound >= 1");
  }
}

// Depth-first walk over the valid sequences of exactly `length` syllables in
// enumeration order. enter(depth, sym) fires on every node, leaf(sym) on the
// last syllable; leaf returns true to stop.
template <class Enter, class Leaf>
struct LevelWalk {
  const std::vector<MixedSyllable>& alphabet;
  int length;
  Enter& enter;
  Leaf& leaf;
  std::vector<const MixedSyllable*> stack;

  bool run(int depth) {
    const MixedSyllable* prev = depth == 0 ? nullptr : stack[static_cast<std::size_t>(depth - 1)];
    for (const MixedSyllable& sym : alphabet) {
      if (!may_follow(prev, sym)) continue;
      if (depth + 1 == length) {
        if (leaf(sym)) return true;
        continue;
      }
      stack[static_cast<std::size_t>(depth)] = &sym;
      enter(depth, sym);
      if (run(depth + 1)) return true;
    }
    return false;
  }
};

template <class Enter, class Leaf>
bool walk_level(const std::vector<MixedSyllable>& alphabet, int length, Enter&& enter, Leaf&& leaf) {
  if (length <= 0) return false;
  LevelWalk<std::remove_reference_t<Enter>, std::remove_reference_t<Leaf>> w{
      alphabet, length, enter, leaf, std::vector<const MixedSyllable*>(static_cast<std::size_t>(length))};
  return w.run(0);
}

MixedWord current_word(const std::vector<MixedSyllable>& prefix, int depth, const MixedSyllable& last) {
  MixedWord w;
  w.syllables.assign(prefix.begin(), prefix.begin() + depth);
  w.syllables.push_back(last);
  return w;
}

// Values of the alphabet symbols: s^{±1} or w^e, plus the arc length each
// contributes to the labeled path.
struct SymbolTable {
  std::vector<Word> value;
  std::vector<Word> inverse;
  std::vector<std::int64_t> value_length;
  std::vector<std::int64_t> arc;
};

void check_indices(const MixedWord& w, std::size_t s_count, std::size_t walk_count) {
  for (const MixedSyllable& y : w.syllables) {
    const std::size_t limit = y.kind == Kind::s ? s_count : walk_count;
    if (y.index < 0 || static_cast<std::size_t>(y.index) >= limit) {
      throw Error(ErrorCode::index_out_of_range,
                  std::string(y.kind == Kind::s ? "s" : "x") + std::to_string(y.index + 1) + " has no value");
    }
    if (y.exponent == 0) throw Error(ErrorCode::precondition, "syllable exponent 0");
  }
}

const Word& base_value(const MixedSyllable& y, std::span<const Word> s_values, std::span<const Word> walk_values) {
  return y.kind == Kind::s ? s_values[static_cast<std::size_t>(y.index)]
                           : walk_values[static_cast<std::size_t>(y.index)];
}

SymbolTable symbol_table(const GroupModel& model, const std::vector<MixedSyllable>& alphabet,
                         std::span<const Word> s_values, std::span<const Word> walk_values) {
  SymbolTable t;
  for (const MixedSyllable& y : alphabet) {
    const Word& base = base_value(y, s_values, walk_values);
    t.value.push_back(power(model, base, y.exponent));
    t.inverse.push_back(invert(model, t.value.back()));
    t.value_length.push_back(length(model, t.value.back()));
    t.arc.push_back(std::abs(static_cast<std::int64_t>(y.exponent)) * length(model, base));
  }
  return t;
}

std::size_t symbol_index(const std::vector<MixedSyllable>& alphabet, const MixedSyllable& sym) {
  return static_cast<std::size_t>(&sym - alphabet.data());
}

}  // namespace

std::string format_mixed_word(const MixedWord& w) {
  if (w.syllables.empty()) return "1";
  std::string out;
  for (const MixedSyllable& y : w.syllables) {
    if (!out.empty()) out += '.';
    out += y.kind == Kind::s ? 's' : 'x';
    out += std::to_string(y.index + 1) + "^" + std::to_string(y.exponent);
  }
  return out;
}

bool is_valid_mixed_word(const MixedWord& w, int s_count, int walk_count, int exponent_bound) {
  const MixedSyllable* prev = nullptr;
  for (const MixedSyllable& y : w.syllables) {
    if (y.kind == Kind::s) {
      if (y.index < 0 || y.index >= s_count || std::abs(y.exponent) != 1) return false;
    } else {
      if (y.index < 0 || y.index >= walk_count || y.exponent == 0 || std::abs(y.exponent) > exponent_bound) {
        return false;
      }
    }
    if (!may_follow(prev, y)) return false;
    prev = &y;
  }
  return true;
}

// -- enumerator ----------------------------------------------------------------

MixedWordEnumerator::MixedWordEnumerator(int s_count, int walk_count, int max_syllables, int exponent_bound,
                                         std::uint64_t budget)
    : s_count_(s_count),
      walk_count_(walk_count),
      max_syllables_(max_syllables),
      exponent_bound_(exponent_bound) {
  check_bounds(s_count, walk_count, max_syllables, exponent_bound);
  alphabet_ = build_alphabet(s_count, walk_count, exponent_bound);
  const auto n = static_cast<std::size_t>(max_syllables) + 1;
  const std::uint64_t ns = 2ULL * static_cast<std::uint64_t>(s_count);
  const std::uint64_t per_x = 2ULL * static_cast<std::uint64_t>(exponent_bound);
  const std::uint64_t nx = per_x * static_cast<std::uint64_t>(walk_count);
  after_s_.assign(n, 1);
  after_x_.assign(n, 1);
  level_.assign(n, 0);
  for (std::size_t r = 1; r < n; ++r) {
    after_s_[r] = sat_mul(nx, after_x_[r - 1]);
    after_x_[r] = sat_add(sat_mul(ns, after_s_[r - 1]), sat_mul(nx - per_x, after_x_[r - 1]));
    level_[r] = sat_add(sat_mul(ns, after_s_[r - 1]), sat_mul(nx, after_x_[r - 1]));
    total_ = sat_add(total_, level_[r]);
  }
  if (total_ > budget) {
    throw Error(ErrorCode::budget_exceeded,
                (total_ == UINT64_MAX ? std::string("more than 2^64") : std::to_string(total_)) +
                    " mixed words exceed the budget " + std::to_string(budget));
  }
}

std::uint64_t MixedWordEnumerator::count_with_length(int syllables) const {
  if (syllables < 1 || syllables > max_syllables_) return 0;
  return level_[static_cast<std::size_t>(syllables)];
}

std::uint64_t MixedWordEnumerator::completions(int remaining, Last last) const {
  const auto r = static_cast<std::size_t>(remaining);
  switch (last) {
    case Last::s:
      return after_s_[r];
    case Last::x:
      return after_x_[r];
    case Last::start:
      break;
  }
  return remaining == 0 ? 1 : level_[r];
}

MixedWord MixedWordEnumerator::at(std::uint64_t index) const {
  if (index >= total_) throw Error(ErrorCode::index_out_of_range, "mixed word index " + std::to_string(index));
  int len = 1;
  while (index >= level_[static_cast<std::size_t>(len)]) {
    index -= level_[static_cast<std::size_t>(len)];
    ++len;
  }
  MixedWord w;
  const MixedSyllable* prev = nullptr;
  for (int pos = 0; pos < len; ++pos) {
    const int remaining = len - pos - 1;
    for (const MixedSyllable& sym : alphabet_) {
      if (!may_follow(prev, sym)) continue;
      const std::uint64_t c = completions(remaining, sym.kind == Kind::s ? Last::s : Last::x);
      if (index < c) {
        w.syllables.push_back(sym);
        prev = &sym;
        break;
      }
      index -= c;
    }
  }
  return w;
}

bool MixedWordEnumerator::next(MixedWord& out) {
  if (cursor_ >= total_) return false;
  out = at(cursor_++);
  return true;
}

std::vector<MixedWord> enumerate_mixed_words(int s_count, int walk_count, int max_syllables, int exponent_bound,
                                             std::uint64_t budget) {
  const MixedWordEnumerator en(s_count, walk_count, max_syllables, exponent_bound, budget);
  std::vector<MixedWord> out;
  out.reserve(static_cast<std::size_t>(en.size()));
  std::vector<MixedSyllable> prefix(static_cast<std::size_t>(max_syllables));
  for (int len = 1; len <= max_syllables; ++len) {
    walk_level(
        en.alphabet(), len, [&](int depth, const MixedSyllable& sym) { prefix[static_cast<std::size_t>(depth)] = sym; },
        [&](const MixedSyllable& sym) {
          out.push_back(current_word(prefix, len - 1, sym));
          return false;
        });
  }
  return out;
}

Word evaluate(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
              std::span<const Word> walk_values) {
  check_indices(w, s_values.size(), walk_values.size());
  Word out;
  for (const MixedSyllable& y : w.syllables) {
    out = multiply(model, out, power(model, base_value(y, s_values, walk_values), y.exponent));
  }
  return out;
}

// -- relation search -------------------------------------------------------------

RelationReport relation_search(const GroupModel& model, std::span<const Word> s_values,
                               std::span<const Word> walk_values, int max_syllables, int exponent_bound,
                               std::uint64_t budget) {
  for (const Word& s : s_values) {
    if (reduce(model, s).empty()) throw Error(ErrorCode::precondition, "S-letters must be nontrivial");
  }
  const MixedWordEnumerator en(static_cast<int>(s_values.size()), static_cast<int>(walk_values.size()),
                               max_syllables, exponent_bound, budget);
  const auto& alphabet = en.alphabet();
  const SymbolTable table = symbol_table(model, alphabet, s_values, walk_values);

  RelationReport report;
  report.max_syllables = max_syllables;
  report.exponent_bound = exponent_bound;
  report.s_count = s_values.size();

  std::vector<MixedSyllable> prefix(static_cast<std::size_t>(std::max(max_syllables, 1)));
  std::vector<Word> partial(static_cast<std::size_t>(max_syllables) + 1);  // partial[d] = value of prefix[0..d)
  std::vector<std::int64_t> partial_length(partial.size(), 0);
  for (int len = 1; len <= max_syllables && !report.found; ++len) {
    walk_level(
        alphabet, len,
        [&](int depth, const MixedSyllable& sym) {
          const auto d = static_cast<std::size_t>(depth);
          prefix[d] = sym;
          partial[d + 1] = multiply(model, partial[d], table.value[symbol_index(alphabet, sym)]);
          partial_length[d + 1] = length(model, partial[d + 1]);
        },
        [&](const MixedSyllable& sym) {
          ++report.words_checked;
          const auto d = static_cast<std::size_t>(len - 1);
          const std::size_t k = symbol_index(alphabet, sym);
          // head * tail = e iff head = tail^{-1}
          if (partial_length[d] != table.value_length[k] || partial[d] != table.inverse[k]) return false;
          report.found = true;
          report.witness = current_word(prefix, len - 1, sym);
          report.syllable_length = len;
          return true;
        });
  }
  return report;
}

// -- theorem constants -------------------------------------------------------------

TheoremConstants theorem_constants(const Rational& n, const Rational& epsilon, const Rational& epsilon_prime,
                                   const Rational& drift, const Rational& delta) {
  if (!(epsilon_prime > 0 && epsilon_prime < epsilon && epsilon < 1)) {
    throw Error(ErrorCode::invalid_epsilon,
                "need 0 < eps' < eps < 1, got eps = " + to_string(epsilon) + ", eps' = " + to_string(epsilon_prime));
  }
  if (drift <= 0) throw Error(ErrorCode::precondition, "drift must be positive");
  if (n < 1) throw Error(ErrorCode::precondition, "n must be at least 1");
  if (delta < 0) throw Error(ErrorCode::precondition, "delta must be nonnegative");
  TheoremConstants t;
  t.n = n;
  t.epsilon = epsilon;
  t.epsilon_prime = epsilon_prime;
  t.drift = drift;
  t.delta = delta;
  t.c_prime = 24 * epsilon_prime * drift * n + 24 * delta + 2;
  t.morse = morse_bound(delta, QGConstants{Rational(2), t.c_prime});
  t.c0 = epsilon * drift * n + 4 * t.morse;
  t.c1 = 12 * (t.c0 + delta) + t.c_prime + 1;
  t.c_final = make_rational(5, 2) * t.morse + t.c1;
  return t;
}

// -- labeled paths -------------------------------------------------------------------

Path labeled_path(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
                  std::span<const Word> walk_values) {
  check_indices(w, s_values.size(), walk_values.size());
  std::vector<Path> pieces;
  Word at;
  pieces.push_back(geodesic_path(model, at, at));
  for (const MixedSyllable& y : w.syllables) {
    const Word& base = base_value(y, s_values, walk_values);
    const Word step = y.exponent > 0 ? base : invert(model, base);
    for (int i = 0; i < std::abs(y.exponent); ++i) {
      Word next = multiply(model, at, step);
      pieces.push_back(geodesic_path(model, at, next));
      at = std::move(next);
    }
  }
  return concatenate(model, pieces);
}

QGWordCheck qg_word_check(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
                          std::span<const Word> walk_values, const TheoremConstants& constants) {
  const Path p = labeled_path(model, w, s_values, walk_values);
  QGWordCheck out;
  out.measured = QGConstants{Rational(8), min_additive_constant(model, p, Rational(8))};
  out.paper_bound_holds = out.measured.c <= constants.c_final;
  out.endpoint_distance = length(model, p.back());
  out.path_length = p.length();
  return out;
}

QGScanResult qg_words_scan(const GroupModel& model, std::span<const Word> s_values,
                           std::span<const Word> walk_values, int max_syllables, int exponent_bound,
                           const TheoremConstants& constants, int measure_syllables, std::uint64_t budget) {
  const MixedWordEnumerator en(static_cast<int>(s_values.size()), static_cast<int>(walk_values.size()),
                               max_syllables, exponent_bound, budget);
  const auto& alphabet = en.alphabet();
  const SymbolTable table = symbol_table(model, alphabet, s_values, walk_values);
  // For a path of arc length L, (t - s)/8 - c_final <= 0 <= d for every
  // pair once L <= 8 c_final, so the bound holds without a pairwise scan.
  const std::int64_t free_length = to_int64(floor(8 * constants.c_final));

  QGScanResult res;
  std::vector<MixedSyllable> prefix(static_cast<std::size_t>(std::max(max_syllables, 1)));
  const auto slots = static_cast<std::size_t>(max_syllables) + 1;
  std::vector<Word> inverse_partial(slots);  // (value of prefix[0..d))^{-1}
  std::vector<std::int64_t> arc(slots, 0);

  for (int len = 1; len <= max_syllables; ++len) {
    walk_level(
        alphabet, len,
        [&](int depth, const MixedSyllable& sym) {
          const auto d = static_cast<std::size_t>(depth);
          const std::size_t k = symbol_index(alphabet, sym);
          prefix[d] = sym;
          inverse_partial[d + 1] = multiply(model, table.inverse[k], inverse_partial[d]);
          arc[d + 1] = arc[d] + table.arc[k];
        },
        [&](const MixedSyllable& sym) {
          ++res.words;
          const auto d = static_cast<std::size_t>(len - 1);
          const std::size_t k = symbol_index(alphabet, sym);
          const std::int64_t total_arc = arc[d] + table.arc[k];
          res.max_path_length = std::max(res.max_path_length, total_arc);

          bool holds = true;
          if (len <= measure_syllables || total_arc > free_length) {
            const MixedWord w = current_word(prefix, len - 1, sym);
            const QGWordCheck check = qg_word_check(model, w, s_values, walk_values, constants);
            holds = check.paper_bound_holds;
            if (len <= measure_syllables) {
              ++res.measured_words;
              res.max_measured_c = std::max(res.max_measured_c, check.measured.c);
            }
          }
          if (!holds) {
            ++res.bound_violations;
            if (!res.first_violation) res.first_violation = current_word(prefix, len - 1, sym);
          }
          if (inverse_partial[d] == table.value[k]) {  // reduced words: equal iff the product is trivial
            ++res.trivial_endpoints;
            if (!res.first_trivial) res.first_trivial = current_word(prefix, len - 1, sym);
          }
          return false;
        });
  }
  return res;
}

// -- certificate -------------------------------------------------------------------

bool free_product_certificate(const GroupModel& model, std::span<const Word> h_gens,
                              std::span<const Word> walk_values) {
  if (!model.is_free()) throw Error(ErrorCode::wrong_model, "free-product certificate needs a free group");
  if (!h_gens.empty()) {
    const CoreGraph h = stallings_core(model, h_gens);
    if (h.rank() != static_cast<std::int64_t>(h_gens.size())) {
      throw Error(ErrorCode::h_gens_not_basis, "H generators span a subgroup of rank " + std::to_string(h.rank()) +
                                                   ", not " + std::to_string(h_gens.size()));
    }
  }
  std::vector<Word> all(h_gens.begin(), h_gens.end());
  all.insert(all.end(), walk_values.begin(), walk_values.end());
  if (all.empty()) return true;
  return stallings_core(model, all).rank() == static_cast<std::int64_t>(all.size());
}

// -- profiles ------------------------------------------------------------------------

std::vector<Word> subgroup_orbit(const GroupModel& model, std::span<const Word> gens, int radius) {
  std::vector<Word> steps;
  for (const Word& g : gens) {
    const Word r = reduce(model, g);
    if (r.empty()) continue;
    steps.push_back(r);
    steps.push_back(invert(model, r));
  }
  std::set<Word> seen{Word{}};
  std::vector<Word> frontier{Word{}};
  for (int r = 0; r < radius && !frontier.empty(); ++r) {
    std::vector<Word> next;
    for (const Word& h : frontier) {
      for (const Word& s : steps) {
        Word x = multiply(model, h, s);
        if (seen.insert(x).second) next.push_back(std::move(x));
      }
    }
    frontier = std::move(next);
  }
  return {seen.begin(), seen.end()};
}

Rational set_neighborhood_diameter(const GroupModel& model, std::span<const Word> points,
                                   std::span<const Word> targets, const Rational& k) {
  if (targets.empty() || k < 0) return Rational(0);
  const std::int64_t radius = to_int64(floor(k));
  std::vector<const Word*> near;
  for (const Word& v : points) {
    if (distance_to_set(model, v, targets) <= radius) near.push_back(&v);
  }
  std::int64_t diam = 0;
  for (std::size_t i = 0; i < near.size(); ++i) {
    for (std::size_t j = i + 1; j < near.size(); ++j) diam = std::max(diam, distance(model, *near[i], *near[j]));
  }
  return Rational(diam);
}

namespace {

std::vector<Word> translate_all(const GroupModel& model, const Word& g, const std::vector<Word>& xs) {
  std::vector<Word> out;
  out.reserve(xs.size());
  for (const Word& x : xs) out.push_back(multiply(model, g, x));
  return out;
}

}  // namespace

TransversalityProfile transversality_profile(const GroupModel& model, const Word& f,
                                             std::span<const Word> target_gens, const Rational& k,
                                             std::span<const Word> coset_reps,
                                             std::pair<std::int64_t, std::int64_t> axis_range,
                                             int coset_truncation) {
  const AxisPath axis = axis_path(model, f, axis_range.first, axis_range.second);
  const std::vector<Word> orbit = subgroup_orbit(model, target_gens, coset_truncation);
  TransversalityProfile prof;
  prof.k = k;
  prof.axis_first = axis_range.first;
  prof.axis_last = axis_range.second;
  prof.coset_truncation = coset_truncation;
  for (const Word& g : coset_reps) {
    const std::vector<Word> targets = translate_all(model, g, orbit);
    Rational d = neighborhood_diameter(model, axis.path, targets, k);
    prof.max_diameter = std::max(prof.max_diameter, d);
    prof.records.push_back({g, std::move(d)});
  }
  return prof;
}

SeparationProfile separation_profile(const GroupModel& model, std::span<const Word> h_gens, const Rational& kappa,
                                     std::span<const Word> g_candidates, int orbit_truncation) {
  const std::vector<Word> orbit = subgroup_orbit(model, h_gens, orbit_truncation);
  SeparationProfile prof;
  prof.kappa = kappa;
  prof.orbit_truncation = orbit_truncation;

  std::optional<CoreGraph> core;
  if (model.is_free()) {
    core = stallings_core(model, h_gens);
    prof.membership_method = "stallings";
  } else {
    prof.membership_method = "truncated-orbit";
  }
  for (const Word& g : g_candidates) {
    const bool in_h = core ? core->member(model, g) : std::binary_search(orbit.begin(), orbit.end(), g);
    if (in_h) {
      ++prof.excluded_members;
      continue;
    }
    const std::vector<Word> targets = translate_all(model, g, orbit);
    Rational d = set_neighborhood_diameter(model, orbit, targets, kappa);
    prof.max_diameter = std::max(prof.max_diameter, d);
    prof.records.push_back({g, std::move(d)});
  }
  return prof;
}

// -- loxodromic products ---------------------------------------------------------------

LoxProduct lox_product_word(const GroupModel& model, std::span<const Word> y_values,
                            std::span<const std::pair<std::size_t, std::int64_t>> sequence) {
  if (sequence.empty()) throw Error(ErrorCode::precondition, "empty product");
  std::vector<std::int64_t> tau(y_values.size());
  for (std::size_t i = 0; i < y_values.size(); ++i) {
    tau[i] = translation_length(model, y_values[i]);
    if (tau[i] == 0) throw Error(ErrorCode::not_loxodromic, format_word(y_values[i]) + " is not loxodromic");
  }
  for (std::size_t i = 0; i < sequence.size(); ++i) {
    if (sequence[i].first >= y_values.size()) {
      throw Error(ErrorCode::index_out_of_range, "y index " + std::to_string(sequence[i].first));
    }
    if (sequence[i].second == 0) throw Error(ErrorCode::precondition, "exponent 0 in product");
    const std::size_t j = (i + 1) % sequence.size();
    if (sequence.size() > 1 && sequence[i].first == sequence[j].first) {
      throw Error(ErrorCode::adjacent_index, "positions " + std::to_string(i) + " and " + std::to_string(j) +
                                                 " use the same element");
    }
  }

  Rational lambda(1);
  std::vector<Path> pieces;
  Word at;
  pieces.push_back(geodesic_path(model, at, at));
  for (const auto& [idx, m] : sequence) {
    const Word& y = y_values[idx];
    lambda = std::max(lambda, make_rational(length(model, y), tau[idx]));
    const Word step = m > 0 ? y : invert(model, y);
    for (std::int64_t r = 0; r < std::abs(m); ++r) {
      Word next = multiply(model, at, step);
      pieces.push_back(geodesic_path(model, at, next));
      at = std::move(next);
    }
  }
  LoxProduct out;
  out.path = concatenate(model, pieces);
  out.z = std::move(at);
  out.qg_measured = QGConstants{lambda, min_additive_constant(model, out.path, lambda)};
  out.loxodromic = is_loxodromic(model, out.z);
  return out;
}

}  // namespace hypwalk
