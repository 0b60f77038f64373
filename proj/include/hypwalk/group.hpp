#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hypwalk/rational.hpp"

namespace hypwalk {

/// One syllable of a normal form: a nonzero power of a factor generator.
/// Free-group factors accept any nonzero power; a cyclic factor of order m
/// stores powers in [1, m-1].
struct Letter {
  int factor = 0;
  int power = 1;

  friend auto operator<=>(const Letter&, const Letter&) = default;
};

/// A (usually reduced) word. Adjacent letters of a reduced word have
/// distinct factors; the empty word is the identity.
struct Word {
  std::vector<Letter> letters;

  Word() = default;
  Word(std::initializer_list<Letter> ls) : letters(ls) {}
  explicit Word(std::vector<Letter> ls) : letters(std::move(ls)) {}

  bool empty() const noexcept { return letters.empty(); }
  std::size_t syllables() const noexcept { return letters.size(); }

  friend auto operator<=>(const Word&, const Word&) = default;
  friend bool operator==(const Word&, const Word&) = default;
};

struct WordHash {
  std::size_t operator()(const Word& w) const noexcept;
};

enum class GroupKind { free_group, free_product };

/// Result of certifying the configured hyperbolicity constant.
struct DeltaValidation {
  int radius = 0;         ///< radius of the ball the four-point check ran on
  std::size_t points = 0;
  Rational four_point;    ///< exhaustive four-point constant on that ball
};

/// The Cayley graph of a free group F_k (standard basis) or of a free
/// product Z/m1 * ... * Z/ms with every nontrivial factor element as a
/// generator. Vertices are group elements; the basepoint is the identity.
class GroupModel {
 public:
  static GroupModel free_group(int rank);

  /// Builds the model and certifies `delta` with the four-point estimator
  /// on ball(5) (or the largest radius within `quadruple_budget`).
  static GroupModel free_product(std::vector<int> orders,
                                 Rational delta = Rational(1),
                                 std::uint64_t quadruple_budget = 2'000'000'000ULL);

  GroupKind kind() const noexcept { return kind_; }
  bool is_free() const noexcept { return kind_ == GroupKind::free_group; }
  int factors() const noexcept { return static_cast<int>(orders_.size()); }
  /// 0 for an infinite cyclic factor.
  int order(int factor) const { return orders_.at(static_cast<std::size_t>(factor)); }
  const std::vector<int>& orders() const noexcept { return orders_; }
  const Rational& delta() const noexcept { return delta_; }
  const std::optional<DeltaValidation>& delta_validation() const noexcept {
    return validation_;
  }

  // Trusted metadata: both families have trivial maximal finite normal
  // subgroup, and their actions on the Cayley graph are acylindrical.
  bool finite_radical_trivial() const noexcept { return true; }
  bool action_acylindrical() const noexcept { return true; }

  /// Generating set of the word metric: a^{+1}, a^{-1}, ... for free
  /// groups; every nontrivial element of every factor for free products.
  std::vector<Letter> generators() const;

  /// Normalized power for the factor, 0 meaning the letter vanishes.
  int normalize_power(int factor, int power) const;
  void check_letter(const Letter& l) const;
  bool valid_letter(const Letter& l) const noexcept;

  /// Contribution of one stored letter to the word length.
  std::int64_t letter_length(const Letter& l) const noexcept;

  /// "free(2)" / "product(2,3)".
  std::string spec() const;

 private:
  GroupModel(GroupKind kind, std::vector<int> orders, Rational delta)
      : kind_(kind), orders_(std::move(orders)), delta_(std::move(delta)) {}

  GroupKind kind_;
  std::vector<int> orders_;
  Rational delta_;
  std::optional<DeltaValidation> validation_;
};

/// Parses `free(k)` or `product(m1,m2,...)`.
GroupModel parse_group(std::string_view spec);

/// Syllable strings: `a^2.b^-1.a^1`; the identity is `1`.
Word parse_word(const GroupModel& model, std::string_view text);
std::string format_word(const Word& w);

// -- word arithmetic -------------------------------------------------------

/// Appends `x` to a reduced word, merging or cancelling at the junction.
void append_letter(const GroupModel& model, std::vector<Letter>& word, Letter x);

Word reduce(const GroupModel& model, const Word& w);
Word multiply(const GroupModel& model, const Word& g, const Word& h);
Word invert(const GroupModel& model, const Word& g);
Word power(const GroupModel& model, const Word& g, std::int64_t exponent);

/// Word length |g| in the model's generating set (g reduced).
std::int64_t length(const GroupModel& model, const Word& g);

/// d(g, h) = |g^{-1} h| without materializing the product.
std::int64_t distance(const GroupModel& model, const Word& g, const Word& h);

/// Single-generator steps spelling a reduced word: unit powers for free
/// groups, whole syllables for free products.
std::vector<Letter> unit_steps(const GroupModel& model, const Word& w);

struct CyclicReduction {
  Word conjugator;
  Word core;
};

/// g = conjugator * core * conjugator^{-1} with core cyclically reduced.
CyclicReduction cyclic_reduce(const GroupModel& model, const Word& g);

/// |core| when g acts loxodromically, else 0.
std::int64_t translation_length(const GroupModel& model, const Word& g);
inline bool is_loxodromic(const GroupModel& model, const Word& g) {
  return translation_length(model, g) > 0;
}

/// Reduced words of length <= r, ordered by length then lexicographically.
std::vector<Word> ball(const GroupModel& model, int radius,
                       std::size_t cap = 10'000'000);

}  // namespace hypwalk
