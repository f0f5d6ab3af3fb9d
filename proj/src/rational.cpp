#include "gradekit/rational.hpp"

#include <cctype>
#include <cstdlib>
#include <numeric>
#include <stdexcept>

#include "gradekit/util.hpp"

namespace gradekit {

namespace {

using i128 = __int128;

std::int64_t checked_narrow(i128 v) {
  if (v > INT64_MAX || v < INT64_MIN) {
    throw std::overflow_error("rational arithmetic overflow");
  }
  return static_cast<std::int64_t>(v);
}

i128 gcd128(i128 a, i128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    i128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

// normalizes in 128-bit then narrows; (num, den) need not be reduced
Rational make_normalized(i128 num, i128 den) {
  if (den == 0) {
    throw std::invalid_argument("rational with zero denominator");
  }
  if (den < 0) {
    num = -num;
    den = -den;
  }
  i128 g = gcd128(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational(checked_narrow(num), checked_narrow(den));
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  if (den == 0) {
    throw std::invalid_argument("rational with zero denominator");
  }
  i128 n = num;
  i128 d = den;
  if (d < 0) {
    n = -n;
    d = -d;
  }
  i128 g = gcd128(n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  num_ = checked_narrow(n);
  den_ = checked_narrow(d);
}

Rational Rational::from_decimal(std::string_view text) {
  std::string s = trim(text);
  if (s.empty()) {
    throw std::invalid_argument("empty decimal literal");
  }
  size_t pos = 0;
  bool negative = false;
  if (s[pos] == '+' || s[pos] == '-') {
    negative = (s[pos] == '-');
    ++pos;
  }
  i128 mantissa = 0;
  int frac_digits = 0;
  bool any_digit = false;
  bool seen_dot = false;
  for (; pos < s.size(); ++pos) {
    char c = s[pos];
    if (c == '.') {
      if (seen_dot) throw std::invalid_argument("malformed decimal: " + s);
      seen_dot = true;
      continue;
    }
    if (c == 'e' || c == 'E') break;
    if (!std::isdigit(static_cast<unsigned char>(c))) {
      throw std::invalid_argument("malformed decimal: " + s);
    }
    mantissa = mantissa * 10 + (c - '0');
    if (mantissa > (i128(INT64_MAX) * 1000000)) {
      throw std::overflow_error("decimal literal too large: " + s);
    }
    if (seen_dot) ++frac_digits;
    any_digit = true;
  }
  if (!any_digit) {
    throw std::invalid_argument("malformed decimal: " + s);
  }
  int exponent = 0;
  if (pos < s.size()) {  // at 'e'/'E'
    ++pos;
    bool exp_neg = false;
    if (pos < s.size() && (s[pos] == '+' || s[pos] == '-')) {
      exp_neg = (s[pos] == '-');
      ++pos;
    }
    if (pos >= s.size()) throw std::invalid_argument("malformed exponent: " + s);
    int e = 0;
    for (; pos < s.size(); ++pos) {
      if (!std::isdigit(static_cast<unsigned char>(s[pos]))) {
        throw std::invalid_argument("malformed exponent: " + s);
      }
      e = e * 10 + (s[pos] - '0');
      if (e > 40) throw std::overflow_error("exponent out of range: " + s);
    }
    exponent = exp_neg ? -e : e;
  }
  i128 num = negative ? -mantissa : mantissa;
  i128 den = 1;
  int net = exponent - frac_digits;
  while (net > 0) {
    num *= 10;
    if (num > i128(INT64_MAX) * 1000000 || num < i128(INT64_MIN) * 1000000) {
      throw std::overflow_error("decimal literal too large: " + s);
    }
    --net;
  }
  while (net < 0) {
    den *= 10;
    if (den > i128(INT64_MAX)) {
      throw std::overflow_error("decimal literal too small: " + s);
    }
    ++net;
  }
  return make_normalized(num, den);
}

Rational Rational::from_double(double v) { return from_decimal(shortest_double(v)); }

std::string Rational::to_decimal(int digits) const {
  if (digits < 0 || digits > 18) {
    throw std::invalid_argument("to_decimal digits out of range");
  }
  i128 scale = 1;
  for (int i = 0; i < digits; ++i) scale *= 10;
  i128 num = num_;
  bool negative = num < 0;
  if (negative) num = -num;
  // round half away from zero
  i128 scaled = (num * scale * 2 + den_) / (i128(den_) * 2);
  i128 whole = scaled / scale;
  i128 frac = scaled % scale;
  std::string out;
  if (negative && scaled != 0) out.push_back('-');
  out += std::to_string(static_cast<long long>(whole));
  if (digits > 0) {
    std::string f = std::to_string(static_cast<long long>(frac));
    out.push_back('.');
    out += std::string(static_cast<size_t>(digits) - f.size(), '0');
    out += f;
  }
  return out;
}

std::string Rational::to_decimal_trimmed(int max_digits) const {
  std::string s = to_decimal(max_digits);
  if (s.find('.') == std::string::npos) return s;
  size_t end = s.size();
  while (end > 0 && s[end - 1] == '0') --end;
  if (end > 0 && s[end - 1] == '.') --end;
  return s.substr(0, end);
}

Rational operator+(const Rational& a, const Rational& b) {
  return make_normalized(i128(a.num_) * b.den_ + i128(b.num_) * a.den_, i128(a.den_) * b.den_);
}

Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }

Rational operator*(const Rational& a, const Rational& b) {
  return make_normalized(i128(a.num_) * b.num_, i128(a.den_) * b.den_);
}

bool operator<(const Rational& a, const Rational& b) {
  return i128(a.num_) * b.den_ < i128(b.num_) * a.den_;
}

}  // namespace gradekit
