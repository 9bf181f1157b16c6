#pragma once

// Exact rational scalars. Every coefficient in the engine (discrepancies,
// boundary coefficients, thresholds, intersection numbers) is a Rational;
// there is no conversion to or from floating point.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace mmp {

using BigInt = mpz_class;

/// Arbitrary-precision fraction, always in lowest terms with a positive
/// denominator. Zero is 0/1.
class Rational {
 public:
  Rational() : value_(0) {}
  Rational(int n) : value_(static_cast<long>(n)) {}
  Rational(long n) : value_(n) {}
  Rational(long long n);
  Rational(const BigInt& n) : value_(n) {}
  Rational(const BigInt& num, const BigInt& den);
  Rational(long long num, long long den);

  /// Parses "p/q" or "p" (optional leading '-'). Throws std::invalid_argument
  /// on malformed text or a zero denominator.
  static Rational parse(std::string_view text);

  BigInt numerator() const { return value_.get_num(); }
  BigInt denominator() const { return value_.get_den(); }

  int sign() const { return sgn(value_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return value_.get_den() == 1; }

  BigInt floor() const;
  BigInt ceil() const;
  Rational abs() const;
  Rational reciprocal() const;

  /// Canonical text: "p" for integers, "p/q" otherwise.
  std::string str() const;

  /// Value as a signed 64-bit integer; throws std::overflow_error if the value
  /// is not an integer in range.
  std::int64_t to_int64() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational& a, const Rational& b) { return cmp(a.value_, b.value_) == 0; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return cmp(a.value_, b.value_) <=> 0;
  }

  const mpq_class& raw() const { return value_; }

 private:
  explicit Rational(mpq_class v) : value_(std::move(v)) {}
  mpq_class value_;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

BigInt lcm(const BigInt& a, const BigInt& b);
BigInt gcd(const BigInt& a, const BigInt& b);
std::int64_t to_int64(const BigInt& v);

}  // namespace mmp
