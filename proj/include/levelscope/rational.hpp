#pragma once

// Exact rational numbers over 64-bit integers. Products are formed in 128
// bits and reduced before narrowing; a result that still does not fit raises
// DomainError instead of wrapping.

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace levelscope {

class Rational {
 public:
  constexpr Rational() = default;
  // Implicit so that integers mix freely with rationals in expressions.
  constexpr Rational(std::int64_t value) : num_(value) {}  // NOLINT
  Rational(std::int64_t numerator, std::int64_t denominator);

  std::int64_t numerator() const { return num_; }
  std::int64_t denominator() const { return den_; }

  Rational operator-() const;
  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& lhs, const Rational& rhs) {
    const __int128 l = static_cast<__int128>(lhs.num_) * rhs.den_;
    const __int128 r = static_cast<__int128>(rhs.num_) * lhs.den_;
    return l < r ? std::strong_ordering::less
                 : (l > r ? std::strong_ordering::greater : std::strong_ordering::equal);
  }

 private:
  static Rational from_wide(__int128 numerator, __int128 denominator);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;  // always positive; gcd(num_, den_) == 1
};

// Parses "a/b", "a" or a terminating decimal such as "0.5".
Rational parse_rational(std::string_view text);

// "a/b", or "a" when the denominator is one.
std::string to_string(const Rational& value);

double to_double(const Rational& value);

// Largest integer not greater than value.
std::int64_t floor(const Rational& value);

inline Rational abs(const Rational& value) { return value < 0 ? -value : value; }

}  // namespace levelscope
