#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

namespace hypwalk {

/// Exact rational arithmetic. Constants in the quasi-geodesic chain reach
/// 10^6..10^7 with fractional inputs, so nothing in that path may round.
using Rational = boost::multiprecision::cpp_rational;
using BigInt = boost::multiprecision::cpp_int;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  return Rational(BigInt(num), BigInt(den));
}

/// "p/q" or "p" when the denominator is 1.
std::string to_string(const Rational& r);
double to_double(const Rational& r);

/// Accepts integers ("3", "-2"), fractions ("1/10") and finite decimals
/// ("0.05", "-1.25e-1" is not supported). Decimals are converted exactly.
Rational parse_rational(std::string_view text);

Rational ceil(const Rational& r);
Rational floor(const Rational& r);
std::int64_t to_int64(const Rational& integral);

}  // namespace hypwalk
