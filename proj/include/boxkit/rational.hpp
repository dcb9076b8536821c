#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <stdexcept>
#include <string>
#include <string_view>

namespace boxkit {

// All probabilities in the library are exact rationals over arbitrary-precision
// integers. Boost's cpp_rational keeps values canonical: gcd-reduced, positive
// denominator. There is no floating point anywhere in core computations.
using Int = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Renders a rational as "num/den", denominator always present: "1/3", "0/1", "-2/5".
inline std::string to_fraction_string(const Rational& value) {
  return numerator(value).str() + "/" + denominator(value).str();
}

/// Parses "num/den" or a bare integer "num". The denominator must be a positive integer.
inline Rational parse_fraction(std::string_view text) {
  const auto fail = [&]() -> Rational {
    throw std::invalid_argument("not a fraction: '" + std::string(text) + "'");
  };
  if (text.empty()) return fail();

  const std::size_t slash = text.find('/');
  std::string_view num_part = text.substr(0, slash == std::string_view::npos ? text.size() : slash);
  std::string_view den_part = slash == std::string_view::npos ? std::string_view("1") : text.substr(slash + 1);

  const auto all_digits = [](std::string_view s) {
    if (s.empty()) return false;
    for (char c : s) {
      if (c < '0' || c > '9') return false;
    }
    return true;
  };

  bool negative = false;
  if (!num_part.empty() && (num_part.front() == '-' || num_part.front() == '+')) {
    negative = num_part.front() == '-';
    num_part.remove_prefix(1);
  }
  if (!all_digits(num_part) || !all_digits(den_part)) return fail();

  Int num{std::string(num_part)};
  Int den{std::string(den_part)};
  if (den == 0) throw std::invalid_argument("zero denominator in fraction: '" + std::string(text) + "'");
  if (negative) num = -num;
  return Rational(num, den);
}

}  // namespace boxkit
