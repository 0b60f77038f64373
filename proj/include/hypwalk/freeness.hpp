#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hypwalk/group.hpp"
#include "hypwalk/hypgeo.hpp"
#include "hypwalk/path.hpp"
#include "hypwalk/rational.hpp"

namespace hypwalk {

// -- mixed words ---------------------------------------------------------------

/// A syllable of a word in S ∪ {x_1..x_k}: s_i^{±1} or x_i^e with e != 0.
struct MixedSyllable {
  enum class Kind : std::uint8_t { s, x };
  Kind kind = Kind::x;
  int index = 0;
  int exponent = 1;

  friend auto operator<=>(const MixedSyllable&, const MixedSyllable&) = default;
};

/// Normal form in G * F(x_1..x_k) restricted to finitely many G-letters:
/// no two S-letters adjacent, adjacent X-syllables have distinct indices.
struct MixedWord {
  std::vector<MixedSyllable> syllables;
  friend bool operator==(const MixedWord&, const MixedWord&) = default;
};

/// "s1^-1.x2^3"; indices are 1-based in text.
std::string format_mixed_word(const MixedWord& w);
bool is_valid_mixed_word(const MixedWord& w, int s_count, int walk_count, int exponent_bound);

/// Restartable graded-lexicographic enumeration of every valid mixed word
/// with 1..max_syllables syllables. The per-syllable alphabet is ordered
/// x_1^{1}, x_1^{-1}, x_1^{2}, x_1^{-2}, ..., x_k^{-E}, then s_1^{+1},
/// s_1^{-1}, ..., s_l^{-1}.
class MixedWordEnumerator {
 public:
  MixedWordEnumerator(int s_count, int walk_count, int max_syllables, int exponent_bound,
                      std::uint64_t budget = 10'000'000);

  std::uint64_t size() const noexcept { return total_; }
  /// Number of words with exactly `syllables` syllables.
  std::uint64_t count_with_length(int syllables) const;
  /// The index-th word in enumeration order.
  MixedWord at(std::uint64_t index) const;

  void seek(std::uint64_t index) noexcept { cursor_ = index; }
  bool next(MixedWord& out);

  const std::vector<MixedSyllable>& alphabet() const noexcept { return alphabet_; }

 private:
  enum class Last { start, s, x };
  std::uint64_t completions(int remaining, Last last) const;

  int s_count_;
  int walk_count_;
  int max_syllables_;
  int exponent_bound_;
  std::vector<MixedSyllable> alphabet_;
  std::vector<std::uint64_t> after_s_;  // completions indexed by remaining syllables
  std::vector<std::uint64_t> after_x_;
  std::vector<std::uint64_t> level_;    // words of exactly r syllables
  std::uint64_t total_ = 0;
  std::uint64_t cursor_ = 0;
};

/// All words of the enumeration, in order. Throws budget_exceeded.
std::vector<MixedWord> enumerate_mixed_words(int s_count, int walk_count, int max_syllables,
                                             int exponent_bound, std::uint64_t budget = 10'000'000);

/// Substitutes s_i -> s_values[i], x_i -> walk_values[i] and reduces.
Word evaluate(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
              std::span<const Word> walk_values);

// -- relation search -----------------------------------------------------------

struct RelationReport {
  bool found = false;
  std::optional<MixedWord> witness;
  std::optional<int> syllable_length;
  int max_syllables = 0;
  int exponent_bound = 0;
  std::size_t s_count = 0;
  std::uint64_t words_checked = 0;
};

/// First word (in enumeration order) that evaluates to the identity.
/// s_values must be nontrivial elements.
RelationReport relation_search(const GroupModel& model, std::span<const Word> s_values,
                               std::span<const Word> walk_values, int max_syllables,
                               int exponent_bound, std::uint64_t budget = 10'000'000);

// -- quasi-geodesic words ------------------------------------------------------

struct TheoremConstants {
  Rational n, epsilon, epsilon_prime, drift, delta;
  Rational c_prime;  ///< 24 eps' D n + 24 delta + 2
  Rational morse;    ///< 92 * 2^2 * (c' + delta)
  Rational c0;       ///< eps D n + 4 M
  Rational c1;       ///< 12 (C0 + delta) + c' + 1
  Rational c_final;  ///< 5/2 M + C1
  QGConstants qg() const { return QGConstants{Rational(8), c_final}; }
};

/// Requires 0 < eps' < eps < 1 (invalid_epsilon), D > 0 and n >= 1.
TheoremConstants theorem_constants(const Rational& n, const Rational& epsilon,
                                   const Rational& epsilon_prime, const Rational& drift,
                                   const Rational& delta);

/// Path based at the identity labeled by W: one geodesic segment per group
/// letter, where x_i^e contributes |e| copies of walk_i^{sign e}.
Path labeled_path(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
                  std::span<const Word> walk_values);

struct QGWordCheck {
  bool paper_bound_holds = false;
  QGConstants measured;  ///< (8, least additive constant)
  std::int64_t endpoint_distance = 0;
  std::int64_t path_length = 0;
};

QGWordCheck qg_word_check(const GroupModel& model, const MixedWord& w, std::span<const Word> s_values,
                          std::span<const Word> walk_values, const TheoremConstants& constants);

struct QGScanResult {
  std::uint64_t words = 0;
  std::uint64_t bound_violations = 0;
  std::uint64_t trivial_endpoints = 0;   ///< words whose endpoint distance is 0
  std::uint64_t measured_words = 0;      ///< words with a full pairwise measurement
  Rational max_measured_c{0};            ///< over the measured words
  std::int64_t max_path_length = 0;
  std::optional<MixedWord> first_violation;
  std::optional<MixedWord> first_trivial;
};

/// Runs the (8, c_final) check and the endpoint test on every enumerated
/// word. The bound is decided exactly: when length/8 <= c_final it holds for
/// every pair; otherwise the full pairwise check runs. Words with at most
/// `measure_syllables` syllables always get the full measurement.
QGScanResult qg_words_scan(const GroupModel& model, std::span<const Word> s_values,
                           std::span<const Word> walk_values, int max_syllables, int exponent_bound,
                           const TheoremConstants& constants, int measure_syllables = 2,
                           std::uint64_t budget = 10'000'000);

// -- free-product certificate ----------------------------------------------------

/// In a free group, with H_gens a basis of H: <H, w_1..w_k> is H * <w_1..w_k>
/// with the walks freely independent iff the folded core of H_gens ∪ walks
/// has rank |H_gens| + k (free groups are Hopfian, so a generating set of
/// that size of a free group of that rank is a basis).
bool free_product_certificate(const GroupModel& model, std::span<const Word> h_gens,
                              std::span<const Word> walk_values);

// -- profiles --------------------------------------------------------------------

/// Elements of <gens> of word length <= radius in the generators and their
/// inverses, sorted.
std::vector<Word> subgroup_orbit(const GroupModel& model, std::span<const Word> gens, int radius);

/// diam { v in points : d(v, targets) <= K }.
Rational set_neighborhood_diameter(const GroupModel& model, std::span<const Word> points,
                                   std::span<const Word> targets, const Rational& k);

struct ProfileRecord {
  Word g;
  Rational diameter;
};

struct TransversalityProfile {
  std::vector<ProfileRecord> records;
  Rational max_diameter{0};
  Rational k;
  std::int64_t axis_first = 0;
  std::int64_t axis_last = 0;
  int coset_truncation = 0;
};

TransversalityProfile transversality_profile(const GroupModel& model, const Word& f,
                                             std::span<const Word> target_gens, const Rational& k,
                                             std::span<const Word> coset_reps,
                                             std::pair<std::int64_t, std::int64_t> axis_range,
                                             int coset_truncation);

struct SeparationProfile {
  std::vector<ProfileRecord> records;
  Rational max_diameter{0};
  Rational kappa;
  int orbit_truncation = 0;
  std::size_t excluded_members = 0;  ///< candidates found to lie in H
  std::string membership_method;     ///< "stallings" or "truncated-orbit"
};

/// Candidates in H are excluded: exactly via Stallings folding in free
/// groups, else by lookup in the truncated orbit.
SeparationProfile separation_profile(const GroupModel& model, std::span<const Word> h_gens,
                                     const Rational& kappa, std::span<const Word> g_candidates,
                                     int orbit_truncation);

// -- products of loxodromics -------------------------------------------------------

struct LoxProduct {
  Word z;
  Path path;
  QGConstants qg_measured;  ///< lambda = max |y_i| / tau(y_i), least c
  bool loxodromic = false;
};

/// z = y_{i_1}^{m_1} ... y_{i_t}^{m_t} with its labeled path through partial
/// products. Indices must differ cyclically; each y must be loxodromic.
LoxProduct lox_product_word(const GroupModel& model, std::span<const Word> y_values,
                            std::span<const std::pair<std::size_t, std::int64_t>> sequence);

}  // namespace hypwalk
