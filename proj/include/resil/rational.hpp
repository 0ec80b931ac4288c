#pragma once

#include <boost/multiprecision/gmp.hpp>

#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace resil {

using Integer = boost::multiprecision::mpz_int;

/// Exact rational in lowest terms with positive denominator (GMP backed).
using Rational = boost::multiprecision::mpq_rational;

inline Rational make_rational(std::int64_t num, std::int64_t den = 1) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  return Rational(Integer(num), Integer(den));
}

namespace detail {

inline bool all_digits(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isdigit(static_cast<unsigned char>(c))) return false;
  return true;
}

// GMP reads a leading 0 as an octal prefix, so strip leading zeros first.
inline Integer decimal_integer(std::string_view digits) {
  auto first = digits.find_first_not_of('0');
  return first == std::string_view::npos ? Integer(0) : Integer(std::string(digits.substr(first)));
}

inline std::optional<Integer> parse_integer(std::string_view s) {
  bool negative = false;
  if (!s.empty() && (s.front() == '-' || s.front() == '+')) {
    negative = s.front() == '-';
    s.remove_prefix(1);
  }
  if (!all_digits(s)) return std::nullopt;
  Integer value = decimal_integer(s);
  return negative ? Integer(-value) : value;
}

}  // namespace detail

/// Accepts "a/b" fractions and terminating decimals ("0.25", "-3", "1.").
/// Returns nullopt for anything else, including a zero denominator.
inline std::optional<Rational> parse_rational(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
  if (text.empty()) return std::nullopt;

  if (auto slash = text.find('/'); slash != std::string_view::npos) {
    auto num = detail::parse_integer(text.substr(0, slash));
    auto den_text = text.substr(slash + 1);
    if (!num || !detail::all_digits(den_text)) return std::nullopt;
    Integer den = detail::decimal_integer(den_text);
    if (den == 0) return std::nullopt;
    return Rational(*num, den);
  }

  bool negative = false;
  if (text.front() == '-' || text.front() == '+') {
    negative = text.front() == '-';
    text.remove_prefix(1);
  }
  auto dot = text.find('.');
  std::string_view whole = text.substr(0, dot);
  std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
  if (whole.empty() && frac.empty()) return std::nullopt;
  if (!whole.empty() && !detail::all_digits(whole)) return std::nullopt;
  if (!frac.empty() && !detail::all_digits(frac)) return std::nullopt;

  std::string digits = std::string(whole) + std::string(frac);
  Integer num = detail::decimal_integer(digits);
  Integer den = 1;
  for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
  if (negative) num = -num;
  return Rational(num, den);
}

inline Rational parse_rational_or_throw(std::string_view text) {
  auto q = parse_rational(text);
  if (!q) throw std::invalid_argument("not a fraction or decimal: '" + std::string(text) + "'");
  return *q;
}

/// "n/d", or just "n" for integers.
inline std::string to_string(const Rational& q) {
  if (denominator(q) == 1) return numerator(q).str();
  return numerator(q).str() + "/" + denominator(q).str();
}

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

/// Decimal rendering rounded half away from zero to `digits` places; computed exactly.
inline std::string to_decimal(const Rational& q, int digits = 6) {
  Integer scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  Rational scaled = abs(q) * Rational(scale) + Rational(Integer(1), Integer(2));
  Integer rounded = numerator(scaled) / denominator(scaled);
  std::string s = rounded.str();
  if (digits > 0) {
    if (s.size() <= static_cast<std::size_t>(digits)) s.insert(0, static_cast<std::size_t>(digits) + 1 - s.size(), '0');
    s.insert(s.size() - static_cast<std::size_t>(digits), ".");
  }
  if (q < 0 && rounded != 0) s.insert(0, "-");
  return s;
}

}  // namespace resil
