#include "regwatch/decimal.hpp"

#include <algorithm>
#include <cctype>

#include "regwatch/errors.hpp"

namespace regwatch {

namespace {

constexpr int kMaxSignificantDigits = 30;

int digit_count(unsigned __int128 v) {
  int n = 0;
  while (v != 0) {
    v /= 10;
    ++n;
  }
  return n;
}

unsigned __int128 pow10_u128(int k) {
  unsigned __int128 r = 1;
  while (k-- > 0) r *= 10;
  return r;
}

std::string u128_to_string(unsigned __int128 v) {
  if (v == 0) return "0";
  std::string out;
  while (v != 0) {
    out.push_back(static_cast<char>('0' + static_cast<int>(v % 10)));
    v /= 10;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

__int128 gcd_i128(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

std::string i128_to_string(__int128 v) {
  if (v == 0) return "0";
  bool neg = v < 0;
  unsigned __int128 mag = neg ? static_cast<unsigned __int128>(-(v + 1)) + 1
                              : static_cast<unsigned __int128>(v);
  std::string out = u128_to_string(mag);
  return neg ? "-" + out : out;
}

constexpr __int128 kI128Max = (~static_cast<unsigned __int128>(0)) >> 1;

__int128 checked_mul(__int128 a, __int128 b) {
  if (a == 0 || b == 0) return 0;
  __int128 r = a * b;
  if (r / b != a) throw Error(ErrorCode::arithmetic_overflow, "rational multiply");
  return r;
}

__int128 checked_add(__int128 a, __int128 b) {
  if (b > 0 && a > kI128Max - b) throw Error(ErrorCode::arithmetic_overflow, "rational add");
  if (b < 0 && a < -kI128Max - 1 - b) throw Error(ErrorCode::arithmetic_overflow, "rational add");
  return a + b;
}

}  // namespace

void Decimal::normalize() {
  if (coefficient_ == 0) {
    exponent_ = 0;
    negative_ = false;
    return;
  }
  while (coefficient_ % 10 == 0) {
    coefficient_ /= 10;
    ++exponent_;
  }
}

std::optional<Decimal> Decimal::parse(std::string_view numeral) {
  Decimal out;
  size_t i = 0;
  if (i < numeral.size() && numeral[i] == '-') {
    out.negative_ = true;
    ++i;
  }
  bool seen_digit = false;
  bool seen_dot = false;
  int fraction_digits = 0;
  int significant = 0;
  for (; i < numeral.size(); ++i) {
    char c = numeral[i];
    if (c >= '0' && c <= '9') {
      if (significant >= kMaxSignificantDigits) return std::nullopt;
      out.coefficient_ = out.coefficient_ * 10 + static_cast<unsigned>(c - '0');
      if (out.coefficient_ != 0) ++significant;
      seen_digit = true;
      if (seen_dot) ++fraction_digits;
    } else if (c == ',') {
      // Group separator: digits on both sides, never after the point.
      if (seen_dot || !seen_digit || i + 1 >= numeral.size() ||
          !std::isdigit(static_cast<unsigned char>(numeral[i + 1]))) {
        return std::nullopt;
      }
    } else if (c == '.') {
      if (seen_dot) return std::nullopt;
      seen_dot = true;
    } else {
      return std::nullopt;
    }
  }
  if (!seen_digit) return std::nullopt;
  out.exponent_ = -fraction_digits;
  out.normalize();
  return out;
}

Decimal Decimal::from_int(long long value) {
  Decimal out;
  if (value < 0) {
    out.negative_ = true;
    out.coefficient_ = static_cast<unsigned __int128>(-(value + 1)) + 1;
  } else {
    out.coefficient_ = static_cast<unsigned __int128>(value);
  }
  out.normalize();
  return out;
}

Decimal Decimal::scaled_by_pow10(int k) const {
  Decimal out = *this;
  if (!out.is_zero()) out.exponent_ += k;
  return out;
}

bool Decimal::operator==(const Decimal& other) const {
  return negative_ == other.negative_ && coefficient_ == other.coefficient_ &&
         exponent_ == other.exponent_;
}

std::strong_ordering Decimal::operator<=>(const Decimal& other) const {
  if (is_zero() && other.is_zero()) return std::strong_ordering::equal;
  if (negative_ != other.negative_) {
    return negative_ ? std::strong_ordering::less : std::strong_ordering::greater;
  }
  // Same sign: compare magnitudes, flip for negatives.
  auto flip = [this](std::strong_ordering o) {
    if (!negative_) return o;
    if (o == std::strong_ordering::less) return std::strong_ordering::greater;
    if (o == std::strong_ordering::greater) return std::strong_ordering::less;
    return o;
  };
  if (is_zero()) return flip(std::strong_ordering::less);
  if (other.is_zero()) return flip(std::strong_ordering::greater);
  int total_a = digit_count(coefficient_) + exponent_;
  int total_b = digit_count(other.coefficient_) + other.exponent_;
  if (total_a != total_b) {
    return flip(total_a < total_b ? std::strong_ordering::less
                                  : std::strong_ordering::greater);
  }
  // Equal magnitude in digits: align coefficients. The exponent gap is at
  // most the digit-count gap (<= 30), so this cannot overflow 128 bits.
  unsigned __int128 a = coefficient_;
  unsigned __int128 b = other.coefficient_;
  if (exponent_ > other.exponent_) {
    a *= pow10_u128(exponent_ - other.exponent_);
  } else if (other.exponent_ > exponent_) {
    b *= pow10_u128(other.exponent_ - exponent_);
  }
  if (a == b) return std::strong_ordering::equal;
  return flip(a < b ? std::strong_ordering::less : std::strong_ordering::greater);
}

std::string Decimal::to_string() const {
  if (is_zero()) return "0";
  std::string digits = u128_to_string(coefficient_);
  std::string out;
  if (exponent_ >= 0) {
    out = digits + std::string(static_cast<size_t>(exponent_), '0');
  } else {
    size_t frac = static_cast<size_t>(-exponent_);
    if (digits.size() <= frac) {
      out = "0." + std::string(frac - digits.size(), '0') + digits;
    } else {
      out = digits.substr(0, digits.size() - frac) + "." +
            digits.substr(digits.size() - frac);
    }
  }
  return negative_ ? "-" + out : out;
}

std::optional<std::pair<long long, long long>> Decimal::to_int64_rational() const {
  __int128 num;
  __int128 den = 1;
  num = static_cast<__int128>(coefficient_);
  if (exponent_ >= 0) {
    for (int k = 0; k < exponent_; ++k) {
      num *= 10;
      if (num > kI128Max / 16) return std::nullopt;
    }
  } else {
    den = static_cast<__int128>(pow10_u128(-exponent_));
  }
  __int128 g = gcd_i128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (negative_) num = -num;
  constexpr __int128 kMax = 0x7FFFFFFFFFFFFFFFLL;
  if (num > kMax || num < -kMax || den > kMax) return std::nullopt;
  return std::make_pair(static_cast<long long>(num), static_cast<long long>(den));
}

Rational::Rational(long long num, long long den) : num_(num), den_(den) {
  if (den == 0) throw Error(ErrorCode::arithmetic_overflow, "zero denominator");
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  reduce();
}

Rational::Rational(__int128 num, __int128 den, bool) : num_(num), den_(den) {
  if (den_ < 0) {
    num_ = -num_;
    den_ = -den_;
  }
  reduce();
}

void Rational::reduce() {
  if (num_ == 0) {
    den_ = 1;
    return;
  }
  __int128 g = gcd_i128(num_, den_);
  num_ /= g;
  den_ /= g;
}

Rational Rational::from_decimal(const Decimal& d) {
  auto r = d.to_int64_rational();
  if (!r) throw Error(ErrorCode::arithmetic_overflow, "decimal out of rational range");
  return Rational(r->first, r->second);
}

Rational Rational::operator+(const Rational& other) const {
  __int128 g = gcd_i128(den_, other.den_);
  __int128 lhs_scale = other.den_ / g;
  __int128 rhs_scale = den_ / g;
  __int128 num = checked_add(checked_mul(num_, lhs_scale), checked_mul(other.num_, rhs_scale));
  __int128 den = checked_mul(den_, lhs_scale);
  return Rational(num, den, true);
}

Rational Rational::operator/(long long divisor) const {
  if (divisor == 0) throw Error(ErrorCode::arithmetic_overflow, "divide by zero");
  return Rational(num_, checked_mul(den_, static_cast<__int128>(divisor)), true);
}

Rational Rational::operator*(long long factor) const {
  return Rational(checked_mul(num_, static_cast<__int128>(factor)), den_, true);
}

bool Rational::operator==(const Rational& other) const {
  return num_ == other.num_ && den_ == other.den_;
}

std::strong_ordering Rational::operator<=>(const Rational& other) const {
  __int128 lhs = checked_mul(num_, other.den_);
  __int128 rhs = checked_mul(other.num_, den_);
  if (lhs == rhs) return std::strong_ordering::equal;
  return lhs < rhs ? std::strong_ordering::less : std::strong_ordering::greater;
}

std::string Rational::to_string() const {
  if (den_ == 1) return i128_to_string(num_);
  return i128_to_string(num_) + "/" + i128_to_string(den_);
}

std::optional<Rational> Rational::parse(std::string_view text) {
  auto parse_int = [](std::string_view s, long long& out) -> bool {
    if (s.empty()) return false;
    bool neg = false;
    size_t i = 0;
    if (s[0] == '-') {
      neg = true;
      i = 1;
      if (s.size() == 1) return false;
    }
    long long v = 0;
    for (; i < s.size(); ++i) {
      if (s[i] < '0' || s[i] > '9') return false;
      if (v > (0x7FFFFFFFFFFFFFFFLL - 9) / 10) return false;
      v = v * 10 + (s[i] - '0');
    }
    out = neg ? -v : v;
    return true;
  };
  size_t slash = text.find('/');
  long long num = 0;
  long long den = 1;
  if (slash == std::string_view::npos) {
    if (!parse_int(text, num)) return std::nullopt;
  } else {
    if (!parse_int(text.substr(0, slash), num)) return std::nullopt;
    if (!parse_int(text.substr(slash + 1), den)) return std::nullopt;
    if (den == 0) return std::nullopt;
  }
  return Rational(num, den);
}

}  // namespace regwatch
