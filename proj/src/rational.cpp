#include "levelscope/rational.hpp"

#include <cctype>
#include <charconv>
#include <cmath>

#include "levelscope/error.hpp"

namespace levelscope {
namespace {

__int128 wide_gcd(__int128 a, __int128 b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    const __int128 t = a % b;
    a = b;
    b = t;
  }
  return a;
}

constexpr __int128 kMax = INT64_MAX;

std::int64_t parse_int(std::string_view text, std::string_view whole) {
  std::int64_t value = 0;
  const auto* begin = text.data();
  const auto* end = text.data() + text.size();
  if (!text.empty() && text.front() == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc{} || ptr != end || begin == end) {
    throw DomainError("not a rational number: '" + std::string(whole) + "'");
  }
  return value;
}

std::string_view trim(std::string_view text) {
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) {
    text.remove_prefix(1);
  }
  while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) {
    text.remove_suffix(1);
  }
  return text;
}

}  // namespace

Rational::Rational(std::int64_t numerator, std::int64_t denominator) {
  *this = from_wide(numerator, denominator);
}

Rational Rational::from_wide(__int128 numerator, __int128 denominator) {
  if (denominator == 0) throw DomainError("rational with zero denominator");
  if (denominator < 0) {
    numerator = -numerator;
    denominator = -denominator;
  }
  const __int128 g = wide_gcd(numerator, denominator);
  if (g > 1) {
    numerator /= g;
    denominator /= g;
  }
  if (numerator > kMax || numerator < -kMax || denominator > kMax) {
    throw DomainError("rational overflow beyond 64-bit range");
  }
  Rational result;
  result.num_ = static_cast<std::int64_t>(numerator);
  result.den_ = static_cast<std::int64_t>(denominator);
  return result;
}

Rational Rational::operator-() const { return from_wide(-static_cast<__int128>(num_), den_); }

Rational& Rational::operator+=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_ + static_cast<__int128>(rhs.num_) * den_,
                    static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) { return *this += -rhs; }

Rational& Rational::operator*=(const Rational& rhs) {
  *this = from_wide(static_cast<__int128>(num_) * rhs.num_, static_cast<__int128>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw DomainError("division by zero rational");
  *this = from_wide(static_cast<__int128>(num_) * rhs.den_, static_cast<__int128>(den_) * rhs.num_);
  return *this;
}

Rational parse_rational(std::string_view text) {
  const std::string_view whole = text;
  text = trim(text);
  if (const auto slash = text.find('/'); slash != std::string_view::npos) {
    const auto num = parse_int(trim(text.substr(0, slash)), whole);
    const auto den = parse_int(trim(text.substr(slash + 1)), whole);
    if (den == 0) throw DomainError("zero denominator in '" + std::string(whole) + "'");
    return Rational(num, den);
  }
  if (const auto dot = text.find('.'); dot != std::string_view::npos) {
    const bool negative = !text.empty() && text.front() == '-';
    auto int_part = text.substr(0, dot);
    if (int_part == "-" || int_part == "+") int_part = "0";
    const auto frac_part = text.substr(dot + 1);
    if (frac_part.size() > 15) throw DomainError("too many decimals: '" + std::string(whole) + "'");
    std::int64_t scale = 1;
    for (std::size_t i = 0; i < frac_part.size(); ++i) scale *= 10;
    const auto whole_units = int_part.empty() ? 0 : parse_int(int_part, whole);
    const auto frac_units = frac_part.empty() ? 0 : parse_int(frac_part, whole);
    Rational result(std::abs(whole_units));
    result += Rational(frac_units, scale);
    return negative ? -result : result;
  }
  return Rational(parse_int(text, whole));
}

std::string to_string(const Rational& value) {
  if (value.denominator() == 1) return std::to_string(value.numerator());
  return std::to_string(value.numerator()) + "/" + std::to_string(value.denominator());
}

double to_double(const Rational& value) {
  return static_cast<double>(value.numerator()) / static_cast<double>(value.denominator());
}

std::int64_t floor(const Rational& value) {
  const auto num = value.numerator();
  const auto den = value.denominator();  // always positive
  auto q = num / den;
  if (num % den != 0 && num < 0) --q;
  return q;
}

}  // namespace levelscope
