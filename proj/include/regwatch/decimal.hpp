#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace regwatch {

// Exact decimal value: coefficient * 10^exponent, sign carried separately.
// Monetary thresholds are compared in rules, so binary floating point is off
// the table. Normalized form strips trailing zeros from the coefficient,
// which makes "0.5 billion" and "500 million" bit-identical (5 * 10^8).
class Decimal {
 public:
  Decimal() = default;

  // Accepts: optional leading '-', digits with ',' separators (must sit
  // between digits), at most one '.'. Rejects empty, stray separators, and
  // anything beyond 30 significant digits.
  static std::optional<Decimal> parse(std::string_view numeral);
  static Decimal from_int(long long value);

  Decimal scaled_by_pow10(int k) const;

  bool is_zero() const { return coefficient_ == 0; }
  bool is_negative() const { return negative_; }

  bool operator==(const Decimal& other) const;
  std::strong_ordering operator<=>(const Decimal& other) const;

  // Plain decimal rendering, no exponent notation: "3000000000", "10.5",
  // "0.05". Canonical for golden files.
  std::string to_string() const;

  // (numerator, denominator) with denominator a power of ten; fails if the
  // value does not fit signed 64-bit after reduction.
  std::optional<std::pair<long long, long long>> to_int64_rational() const;

 private:
  void normalize();

  bool negative_ = false;
  unsigned __int128 coefficient_ = 0;
  int exponent_ = 0;
};

// Exact ratio of two integers, reduced, denominator positive. Backed by
// 128-bit integers; overflow throws ArithmeticOverflow rather than wrapping.
class Rational {
 public:
  Rational() : num_(0), den_(1) {}
  Rational(long long num, long long den);

  static Rational from_decimal(const Decimal& d);

  Rational operator+(const Rational& other) const;
  Rational operator/(long long divisor) const;
  Rational operator*(long long factor) const;

  bool operator==(const Rational& other) const;
  std::strong_ordering operator<=>(const Rational& other) const;

  // "5/6" when the reduced denominator is not 1, else just the integer.
  std::string to_string() const;
  static std::optional<Rational> parse(std::string_view text);

  bool is_zero() const { return num_ == 0; }

 private:
  Rational(__int128 num, __int128 den, bool reduce_now);
  void reduce();

  __int128 num_;
  __int128 den_;
};

}  // namespace regwatch
