#include "hypwalk/group.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdlib>

#include "hypwalk/error.hpp"
#include "hypwalk/hypgeo.hpp"

namespace hypwalk {

std::size_t WordHash::operator()(const Word& w) const noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const Letter& l : w.letters) {
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.factor)) * 0x9E3779B97F4A7C15ULL;
    h *= 0x100000001b3ULL;
    h ^= static_cast<std::uint64_t>(static_cast<std::uint32_t>(l.power));
    h *= 0x100000001b3ULL;
  }
  return static_cast<std::size_t>(h);
}

// -- GroupModel ------------------------------------------------------------

GroupModel GroupModel::free_group(int rank) {
  if (rank < 2 || rank > 26) {
    throw Error(ErrorCode::invalid_model, "free group rank must be in [2, 26], got " + std::to_string(rank));
  }
  return GroupModel(GroupKind::free_group, std::vector<int>(static_cast<std::size_t>(rank), 0), Rational(0));
}

GroupModel GroupModel::free_product(std::vector<int> orders, Rational delta,
                                    std::uint64_t quadruple_budget) {
  if (orders.size() < 2 || orders.size() > 26) {
    throw Error(ErrorCode::invalid_model, "free product needs between 2 and 26 factors");
  }
  for (int m : orders) {
    if (m < 2) throw Error(ErrorCode::invalid_model, "factor orders must be >= 2");
  }
  if (orders.size() == 2 && orders[0] == 2 && orders[1] == 2) {
    throw Error(ErrorCode::invalid_model, "Z/2 * Z/2 is virtually cyclic (elementary)");
  }
  if (delta < 0) throw Error(ErrorCode::invalid_model, "delta must be nonnegative");

  GroupModel model(GroupKind::free_product, std::move(orders), std::move(delta));

  // Certify delta on the largest ball up to radius 5 whose quadruple count
  // fits the budget.
  std::vector<Word> points;
  int radius = 5;
  for (; radius >= 1; --radius) {
    points = ball(model, radius);
    const auto n = static_cast<long double>(points.size());
    const long double quads = n * (n - 1) * (n - 2) * (n - 3) / 24.0L;
    if (quads <= static_cast<long double>(quadruple_budget)) break;
  }
  Rational measured = four_point_delta(model, points, quadruple_budget);
  if (measured > 2 * model.delta_) {
    throw Error(ErrorCode::invalid_model,
                "four-point constant " + to_string(measured) + " on ball(" + std::to_string(radius) +
                    ") exceeds 2*delta = " + to_string(Rational(2 * model.delta_)));
  }
  model.validation_ = DeltaValidation{radius, points.size(), measured};
  return model;
}

std::vector<Letter> GroupModel::generators() const {
  std::vector<Letter> gens;
  for (int f = 0; f < factors(); ++f) {
    if (order(f) == 0) {
      gens.push_back({f, 1});
      gens.push_back({f, -1});
    } else {
      for (int p = 1; p < order(f); ++p) gens.push_back({f, p});
    }
  }
  return gens;
}

int GroupModel::normalize_power(int factor, int power) const {
  if (factor < 0 || factor >= factors()) {
    throw Error(ErrorCode::invalid_letter, "factor index " + std::to_string(factor) + " out of range");
  }
  const int m = orders_[static_cast<std::size_t>(factor)];
  if (m == 0) return power;
  return ((power % m) + m) % m;
}

bool GroupModel::valid_letter(const Letter& l) const noexcept {
  if (l.factor < 0 || l.factor >= factors() || l.power == 0) return false;
  const int m = orders_[static_cast<std::size_t>(l.factor)];
  return m == 0 || (l.power >= 1 && l.power < m);
}

void GroupModel::check_letter(const Letter& l) const {
  if (!valid_letter(l)) {
    throw Error(ErrorCode::invalid_letter,
                "letter (" + std::to_string(l.factor) + ", " + std::to_string(l.power) + ") is not valid for " + spec());
  }
}

std::int64_t GroupModel::letter_length(const Letter& l) const noexcept {
  return kind_ == GroupKind::free_group ? std::abs(static_cast<std::int64_t>(l.power)) : 1;
}

std::string GroupModel::spec() const {
  std::string out = kind_ == GroupKind::free_group ? "free(" + std::to_string(factors()) : "product(";
  if (kind_ == GroupKind::free_product) {
    for (std::size_t i = 0; i < orders_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(orders_[i]);
    }
  }
  return out + ")";
}

// -- parsing ---------------------------------------------------------------

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view s, std::string_view context) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  int value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) {
    throw Error(ErrorCode::parse_error, "expected an integer in '" + std::string(context) + "'");
  }
  return value;
}

}  // namespace

GroupModel parse_group(std::string_view spec) {
  const std::string_view text = trim(spec);
  const auto open = text.find('(');
  if (open == std::string_view::npos || text.back() != ')') {
    throw Error(ErrorCode::parse_error, "group spec must look like free(k) or product(m1,...): '" + std::string(spec) + "'");
  }
  const std::string_view head = trim(text.substr(0, open));
  std::string_view body = text.substr(open + 1, text.size() - open - 2);
  if (head == "free") return GroupModel::free_group(parse_int(body, spec));
  if (head == "product") {
    std::vector<int> orders;
    while (true) {
      const auto comma = body.find(',');
      orders.push_back(parse_int(body.substr(0, comma), spec));
      if (comma == std::string_view::npos) break;
      body.remove_prefix(comma + 1);
    }
    return GroupModel::free_product(std::move(orders));
  }
  throw Error(ErrorCode::parse_error, "unknown group family '" + std::string(head) + "'");
}

Word parse_word(const GroupModel& model, std::string_view text) {
  text = trim(text);
  Word raw;
  if (text.empty() || text == "1") return raw;
  while (true) {
    const auto dot = text.find('.');
    std::string_view token = trim(text.substr(0, dot));
    if (token.empty() || !std::islower(static_cast<unsigned char>(token.front()))) {
      throw Error(ErrorCode::parse_error, "bad syllable in word '" + std::string(text) + "'");
    }
    Letter l{token.front() - 'a', 1};
    token.remove_prefix(1);
    if (!token.empty()) {
      if (token.front() != '^') throw Error(ErrorCode::parse_error, "expected '^' in syllable '" + std::string(token) + "'");
      l.power = parse_int(token.substr(1), token);
    }
    if (l.factor >= model.factors() || l.power == 0) {
      throw Error(ErrorCode::invalid_letter, "syllable out of range for " + model.spec() + " in '" + std::string(text) + "'");
    }
    raw.letters.push_back(l);
    if (dot == std::string_view::npos) break;
    text.remove_prefix(dot + 1);
  }
  return reduce(model, raw);
}

std::string format_word(const Word& w) {
  if (w.empty()) return "1";
  std::string out;
  for (std::size_t i = 0; i < w.letters.size(); ++i) {
    if (i) out += '.';
    out += static_cast<char>('a' + w.letters[i].factor);
    out += '^';
    out += std::to_string(w.letters[i].power);
  }
  return out;
}

// -- arithmetic ------------------------------------------------------------

void append_letter(const GroupModel& model, std::vector<Letter>& word, Letter x) {
  const int p = model.normalize_power(x.factor, x.power);
  if (p == 0) return;
  if (!word.empty() && word.back().factor == x.factor) {
    const int q = model.normalize_power(x.factor, word.back().power + p);
    if (q == 0) {
      word.pop_back();
    } else {
      word.back().power = q;
    }
  } else {
    word.push_back({x.factor, p});
  }
}

Word reduce(const GroupModel& model, const Word& w) {
  Word out;
  out.letters.reserve(w.letters.size());
  for (const Letter& l : w.letters) {
    if (l.factor < 0 || l.factor >= model.factors() || l.power == 0) {
      throw Error(ErrorCode::invalid_letter,
                  "letter (" + std::to_string(l.factor) + ", " + std::to_string(l.power) + ") invalid for " + model.spec());
    }
    append_letter(model, out.letters, l);
  }
  return out;
}

Word multiply(const GroupModel& model, const Word& g, const Word& h) {
  Word out = g;
  out.letters.reserve(g.letters.size() + h.letters.size());
  for (const Letter& l : h.letters) append_letter(model, out.letters, l);
  return out;
}

Word invert(const GroupModel& model, const Word& g) {
  Word out;
  out.letters.reserve(g.letters.size());
  for (auto it = g.letters.rbegin(); it != g.letters.rend(); ++it) {
    out.letters.push_back({it->factor, model.normalize_power(it->factor, -it->power)});
  }
  return out;
}

Word power(const GroupModel& model, const Word& g, std::int64_t exponent) {
  const Word base = exponent < 0 ? invert(model, g) : g;
  Word out;
  for (std::int64_t i = 0; i < std::abs(exponent); ++i) {
    for (const Letter& l : base.letters) append_letter(model, out.letters, l);
  }
  return out;
}

std::int64_t length(const GroupModel& model, const Word& g) {
  if (!model.is_free()) return static_cast<std::int64_t>(g.letters.size());
  std::int64_t total = 0;
  for (const Letter& l : g.letters) total += std::abs(static_cast<std::int64_t>(l.power));
  return total;
}

std::int64_t distance(const GroupModel& model, const Word& g, const Word& h) {
  const auto& a = g.letters;
  const auto& b = h.letters;
  const std::size_t common = std::min(a.size(), b.size());
  std::size_t i = 0;
  while (i < common && a[i] == b[i]) ++i;
  if (model.is_free()) {
    std::int64_t shared = 0;
    for (std::size_t j = 0; j < i; ++j) shared += std::abs(static_cast<std::int64_t>(a[j].power));
    if (i < common && a[i].factor == b[i].factor && (a[i].power > 0) == (b[i].power > 0)) {
      shared += std::min(std::abs(static_cast<std::int64_t>(a[i].power)),
                         std::abs(static_cast<std::int64_t>(b[i].power)));
    }
    return length(model, g) + length(model, h) - 2 * shared;
  }
  const auto la = static_cast<std::int64_t>(a.size());
  const auto lb = static_cast<std::int64_t>(b.size());
  const auto ii = static_cast<std::int64_t>(i);
  // Two distinct syllables of one factor merge into a single syllable of g^{-1}h.
  if (i < common && a[i].factor == b[i].factor) return la + lb - 2 * ii - 1;
  return la + lb - 2 * ii;
}

std::vector<Letter> unit_steps(const GroupModel& model, const Word& w) {
  if (!model.is_free()) return w.letters;
  std::vector<Letter> steps;
  for (const Letter& l : w.letters) {
    const int sign = l.power > 0 ? 1 : -1;
    for (int k = 0; k < std::abs(l.power); ++k) steps.push_back({l.factor, sign});
  }
  return steps;
}

CyclicReduction cyclic_reduce(const GroupModel& model, const Word& g) {
  CyclicReduction out;
  if (model.is_free()) {
    std::vector<Letter> steps = unit_steps(model, g);
    std::size_t lo = 0;
    std::size_t hi = steps.size();
    while (hi - lo >= 2 && steps[lo].factor == steps[hi - 1].factor &&
           steps[lo].power == -steps[hi - 1].power) {
      append_letter(model, out.conjugator.letters, steps[lo]);
      ++lo;
      --hi;
    }
    for (std::size_t i = lo; i < hi; ++i) append_letter(model, out.core.letters, steps[i]);
    return out;
  }
  std::vector<Letter> core = g.letters;
  // g = x u y with x, y in one factor  =>  g = x (u (y x)) x^{-1}.
  while (core.size() >= 2 && core.front().factor == core.back().factor) {
    const Letter x = core.front();
    const Letter y = core.back();
    append_letter(model, out.conjugator.letters, x);
    std::vector<Letter> next(core.begin() + 1, core.end() - 1);
    append_letter(model, next, {y.factor, y.power + x.power});
    core = std::move(next);
  }
  out.core.letters = std::move(core);
  return out;
}

std::int64_t translation_length(const GroupModel& model, const Word& g) {
  const CyclicReduction cr = cyclic_reduce(model, g);
  if (model.is_free()) return length(model, cr.core);
  return cr.core.letters.size() >= 2 ? length(model, cr.core) : 0;
}

std::vector<Word> ball(const GroupModel& model, int radius, std::size_t cap) {
  if (radius < 0) throw Error(ErrorCode::precondition, "ball radius must be nonnegative");
  const std::vector<Letter> gens = model.generators();
  std::vector<Word> out{Word{}};
  std::vector<Word> sphere{Word{}};
  for (int r = 0; r < radius; ++r) {
    std::vector<Word> next;
    for (const Word& w : sphere) {
      for (const Letter& x : gens) {
        if (!w.empty()) {
          const Letter& last = w.letters.back();
          if (last.factor == x.factor && (!model.is_free() || (last.power > 0) != (x.power > 0))) continue;
        }
        if (out.size() + next.size() + 1 > cap) {
          throw Error(ErrorCode::budget_exceeded,
                      "ball(" + std::to_string(radius) + ") exceeds the element cap " + std::to_string(cap));
        }
        Word extended = w;
        append_letter(model, extended.letters, x);
        next.push_back(std::move(extended));
      }
    }
    std::sort(next.begin(), next.end());
    out.insert(out.end(), next.begin(), next.end());
    sphere = std::move(next);
  }
  return out;
}

}  // namespace hypwalk
