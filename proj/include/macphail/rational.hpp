#pragma once

#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>

namespace macphail {

// Exact rational with int64 components, used to carry decimal CLI inputs
// like r = 1.9 without binary rounding. The divergence onset block
// k0 = floor(2r/(2-r)) + 1 is discontinuous in r, so the decision must be
// made on the decimal value the user typed, not on its nearest double.
struct Rational {
  int64_t num = 0;
  int64_t den = 1;

  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
};

inline Rational make_rational(int64_t num, int64_t den) {
  if (den == 0) throw std::invalid_argument("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

// Accepts "[-]digits[.digits]". Total significant digits capped at 18 so
// numerator and denominator stay in int64.
inline Rational parse_decimal(std::string_view s) {
  if (s.empty()) throw std::invalid_argument("empty decimal literal");
  bool negative = false;
  size_t pos = 0;
  if (s[0] == '-' || s[0] == '+') {
    negative = s[0] == '-';
    pos = 1;
  }
  int64_t num = 0;
  int64_t den = 1;
  bool seen_dot = false;
  bool seen_digit = false;
  int digits = 0;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("two decimal points in '" + std::string(s) + "'");
      seen_dot = true;
      continue;
    }
    if (c < '0' || c > '9')
      throw std::invalid_argument("bad character in decimal '" + std::string(s) + "'");
    seen_digit = true;
    if (++digits > 18) throw std::invalid_argument("decimal '" + std::string(s) + "' has too many digits");
    num = num * 10 + (c - '0');
    if (seen_dot) den *= 10;
  }
  if (!seen_digit) throw std::invalid_argument("no digits in decimal '" + std::string(s) + "'");
  return make_rational(negative ? -num : num, den);
}

}  // namespace macphail
