#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

#include <gmpxx.h>

namespace fatou {

using Integer = mpz_class;

/// Exact rational number, always kept in lowest terms with a positive
/// denominator. Division by zero throws std::domain_error.
class Rational {
 public:
  Rational() = default;
  Rational(int value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  Rational(long long value);  // NOLINT(google-explicit-constructor)
  Rational(unsigned long value) : q_(value) {}  // NOLINT(google-explicit-constructor)
  explicit Rational(const Integer& value) : q_(value) {}
  Rational(const Integer& num, const Integer& den);
  Rational(long long num, long long den);

  /// Parses "p", "-p", "p/q" or "-p/q" (decimal digits only, no spaces).
  /// Throws std::invalid_argument on malformed text and std::domain_error
  /// on a zero denominator.
  static Rational parse(std::string_view text);

  /// 2^exponent for any signed exponent.
  static Rational pow2(long exponent);

  Integer numerator() const { return q_.get_num(); }
  Integer denominator() const { return q_.get_den(); }

  int sign() const { return sgn(q_); }
  bool is_zero() const { return sign() == 0; }
  bool is_integer() const { return q_.get_den() == 1; }

  Rational abs() const;
  /// max(x, 0)
  Rational positive_part() const;
  /// max(-x, 0)
  Rational negative_part() const;
  Integer floor() const;
  Integer ceil() const;

  /// "p/q", or "p" when the denominator is 1.
  std::string str() const;
  std::size_t hash() const;

  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }
  Rational operator-() const;

  friend bool operator==(const Rational& a, const Rational& b) { return a.q_ == b.q_; }
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    const int c = cmp(a.q_, b.q_);
    return c < 0 ? std::strong_ordering::less
                 : (c > 0 ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

  friend std::ostream& operator<<(std::ostream& os, const Rational& r);

 private:
  mpq_class q_;
};

inline const Rational& min(const Rational& a, const Rational& b) { return b < a ? b : a; }
inline const Rational& max(const Rational& a, const Rational& b) { return a < b ? b : a; }

struct RationalHash {
  std::size_t operator()(const Rational& r) const { return r.hash(); }
};

}  // namespace fatou
