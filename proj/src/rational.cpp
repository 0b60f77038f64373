#include "hypwalk/rational.hpp"

#include <cctype>
#include <limits>

#include "hypwalk/error.hpp"

namespace hypwalk {

std::string to_string(const Rational& r) {
  const BigInt& num = boost::multiprecision::numerator(r);
  const BigInt& den = boost::multiprecision::denominator(r);
  if (den == 1) return num.str();
  return num.str() + "/" + den.str();
}

double to_double(const Rational& r) { return r.convert_to<double>(); }

namespace {

BigInt parse_integer(std::string_view text, std::string_view whole) {
  if (text.empty()) throw Error(ErrorCode::parse_error, "empty number in '" + std::string(whole) + "'");
  for (char ch : text) {
    if (!std::isdigit(static_cast<unsigned char>(ch))) {
      throw Error(ErrorCode::parse_error, "not a number: '" + std::string(whole) + "'");
    }
  }
  return BigInt(std::string(text));
}

}  // namespace

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  bool negative = false;
  if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  Rational value;
  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    BigInt den = parse_integer(text.substr(slash + 1), whole);
    if (den == 0) throw Error(ErrorCode::parse_error, "zero denominator in '" + std::string(whole) + "'");
    value = Rational(parse_integer(text.substr(0, slash), whole), den);
  } else if (auto dot = text.find('.'); dot != std::string_view::npos) {
    std::string_view int_part = text.substr(0, dot);
    std::string_view frac_part = text.substr(dot + 1);
    BigInt ip = int_part.empty() ? BigInt(0) : parse_integer(int_part, whole);
    BigInt fp = frac_part.empty() ? BigInt(0) : parse_integer(frac_part, whole);
    BigInt scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    value = Rational(ip * scale + fp, scale);
  } else {
    value = Rational(parse_integer(text, whole));
  }
  return negative ? Rational(-value) : value;
}

Rational floor(const Rational& r) {
  BigInt num = boost::multiprecision::numerator(r);
  BigInt den = boost::multiprecision::denominator(r);
  BigInt q = num / den;  // truncates toward zero
  if (num < 0 && q * den != num) q -= 1;
  return Rational(q);
}

Rational ceil(const Rational& r) { return -floor(Rational(-r)); }

std::int64_t to_int64(const Rational& integral) {
  const BigInt& num = boost::multiprecision::numerator(integral);
  if (boost::multiprecision::denominator(integral) != 1 ||
      num > std::numeric_limits<std::int64_t>::max() ||
      num < std::numeric_limits<std::int64_t>::min()) {
    throw Error(ErrorCode::precondition, "value " + to_string(integral) + " is not a 64-bit integer");
  }
  return num.convert_to<std::int64_t>();
}

}  // namespace hypwalk
