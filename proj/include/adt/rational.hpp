#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adt/error.hpp"

namespace adt {

// Exact probabilities and values. GMP keeps every value in lowest terms
// with a positive denominator.
using Rational = boost::multiprecision::mpq_rational;
using Integer = boost::multiprecision::mpz_int;

inline Integer numerator_of(const Rational& q) { return boost::multiprecision::numerator(q); }
inline Integer denominator_of(const Rational& q) { return boost::multiprecision::denominator(q); }

inline Rational abs(const Rational& q) { return q < 0 ? Rational(-q) : q; }

inline Rational pow(const Rational& base, unsigned exponent) {
  Rational result = 1;
  for (unsigned i = 0; i < exponent; ++i) result *= base;
  return result;
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline bool is_integer(const Rational& q) { return denominator_of(q) == 1; }

inline Integer lcm(const Integer& a, const Integer& b) {
  if (a == 0 || b == 0) return 0;
  return boost::multiprecision::lcm(a, b);
}

// "a/b", "a" or a plain decimal such as "-0.25".
// q^(1/n) when it is rational.
inline std::optional<Rational> exact_root(const Rational& q, unsigned n) {
  if (q < 0 || n == 0) return std::nullopt;
  if (n == 1) return q;
  Integer num = numerator_of(q);
  Integer den = denominator_of(q);
  Integer rn;
  Integer rd;
  bool exact_num = mpz_root(rn.backend().data(), num.backend().data(), n) != 0;
  bool exact_den = mpz_root(rd.backend().data(), den.backend().data(), n) != 0;
  if (!exact_num || !exact_den) return std::nullopt;
  return Rational(rn, rd);
}

inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  if (s.empty()) throw Error(ErrorCode::kMalformedDocument, "empty rational literal");
  try {
    if (s.find('.') != std::string::npos || s.find('e') != std::string::npos ||
        s.find('E') != std::string::npos) {
      // Exact decimal expansion; exponents are not supported.
      bool negative = false;
      std::size_t pos = 0;
      if (s[0] == '-' || s[0] == '+') {
        negative = s[0] == '-';
        pos = 1;
      }
      Integer digits = 0;
      Integer scale = 1;
      bool seen_point = false;
      bool any_digit = false;
      for (; pos < s.size(); ++pos) {
        char c = s[pos];
        if (c == '.' && !seen_point) {
          seen_point = true;
        } else if (c >= '0' && c <= '9') {
          digits = digits * 10 + (c - '0');
          if (seen_point) scale *= 10;
          any_digit = true;
        } else {
          throw Error(ErrorCode::kMalformedDocument, "bad numeric literal '" + s + "'");
        }
      }
      if (!any_digit) throw Error(ErrorCode::kMalformedDocument, "bad numeric literal '" + s + "'");
      Rational q(digits, scale);
      return negative ? Rational(-q) : q;
    }
    auto slash = s.find('/');
    if (slash != std::string::npos) {
      Integer num(s.substr(0, slash));
      Integer den(s.substr(slash + 1));
      if (den == 0) throw Error(ErrorCode::kMalformedDocument, "zero denominator in '" + s + "'");
      return Rational(num, den);
    }
    return Rational(Integer(s));
  } catch (const Error&) {
    throw;
  } catch (const std::exception&) {
    throw Error(ErrorCode::kMalformedDocument, "bad numeric literal '" + s + "'");
  }
}

// Parses a decimal and rounds it half away from zero to `decimals` fractional digits.
inline Rational parse_decimal(std::string_view text, int decimals) {
  Rational exact = parse_rational(text);
  Integer scale = 1;
  for (int i = 0; i < decimals; ++i) scale *= 10;
  Rational scaled = exact * scale;
  Integer num = numerator_of(scaled);
  Integer den = denominator_of(scaled);
  if (den == 1) return exact;
  bool negative = num < 0;
  Integer mag = negative ? Integer(-num) : num;
  Integer rounded = (2 * mag + den) / (2 * den);
  if (negative) rounded = -rounded;
  return Rational(rounded, scale);
}

inline std::string to_string(const Rational& q) { return q.str(); }

// Decimal rendering rounded half away from zero, trailing zeros trimmed.
inline std::string to_decimal_string(const Rational& q, int digits = 12) {
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(q) * scale;
  Integer num = numerator_of(scaled);
  Integer den = denominator_of(scaled);
  Integer rounded = (2 * num + den) / (2 * den);
  Integer whole = rounded / scale;
  Integer frac = rounded % scale;
  std::string out = (q < 0 && rounded != 0) ? "-" : "";
  out += whole.str();
  if (frac != 0) {
    std::string f = frac.str();
    f.insert(0, static_cast<std::size_t>(digits) - f.size(), '0');
    while (!f.empty() && f.back() == '0') f.pop_back();
    out += "." + f;
  }
  return out;
}

using Value = std::vector<Rational>;

inline std::string to_string(const Value& v) {
  std::string out = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += ",";
    out += to_string(v[i]);
  }
  return out + ")";
}

}  // namespace adt
