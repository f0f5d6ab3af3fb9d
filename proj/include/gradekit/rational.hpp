#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace gradekit {

/// Exact rational number on int64 numerator/denominator, always normalized
/// (gcd 1, denominator positive). Scores and rubric points are kept exact so
/// that tally cross-checks never trip over binary floating-point artifacts.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n), den_(1) {}  // NOLINT implicit
  Rational(std::int64_t num, std::int64_t den);

  // Parses decimal text such as "0.25", "-1.5", "2", "1e-3". Throws
  // std::invalid_argument on malformed input.
  static Rational from_decimal(std::string_view text);
  // Exact value of the shortest decimal that round-trips the double, so
  // JSON 0.1 becomes 1/10 rather than the underlying binary fraction.
  static Rational from_double(double v);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }
  // Fixed-point rendering, round-half-away-from-zero. digits in [0, 18].
  std::string to_decimal(int digits = 4) const;
  // Like to_decimal but with trailing zeros (and a bare '.') removed.
  std::string to_decimal_trimmed(int max_digits = 9) const;

  Rational operator-() const { return Rational(-num_, den_); }
  friend Rational operator+(const Rational& a, const Rational& b);
  friend Rational operator-(const Rational& a, const Rational& b);
  friend Rational operator*(const Rational& a, const Rational& b);
  friend bool operator==(const Rational& a, const Rational& b) {
    return a.num_ == b.num_ && a.den_ == b.den_;
  }
  friend bool operator!=(const Rational& a, const Rational& b) { return !(a == b); }
  friend bool operator<(const Rational& a, const Rational& b);
  friend bool operator<=(const Rational& a, const Rational& b) { return a < b || a == b; }
  friend bool operator>(const Rational& a, const Rational& b) { return b < a; }
  friend bool operator>=(const Rational& a, const Rational& b) { return b <= a; }

  Rational abs() const { return num_ < 0 ? -*this : *this; }

  static Rational min(const Rational& a, const Rational& b) { return a < b ? a : b; }
  static Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

 private:
  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

}  // namespace gradekit
