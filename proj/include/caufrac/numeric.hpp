#pragma once

#include <gmpxx.h>

#include <cmath>
#include <string>
#include <string_view>

namespace caufrac {

using Rational = mpq_class;

enum class Arithmetic { rational, floating };

/// Float-mode comparison tolerance used unless a caller overrides it.
inline constexpr double kDefaultTolerance = 1e-9;

std::string arithmetic_name(Arithmetic mode);

/// Parses "p/q" or an integer literal. Throws ParseError.
Rational parse_rational(std::string_view text);

/// "p/q", or "p" when the denominator is 1.
std::string format_rational(const Rational& value);

/// Nearest double (mpq_get_d truncates instead).
double rational_to_double(const Rational& value);

template <class T>
struct NumTraits;

template <>
struct NumTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr Arithmetic mode = Arithmetic::rational;

  static bool is_zero(const Rational& x, double /*tol*/) { return sgn(x) == 0; }
  static bool leq(const Rational& a, const Rational& b, double /*tol*/) { return a <= b; }
  static bool eq(const Rational& a, const Rational& b, double /*tol*/) { return a == b; }
  static bool positive(const Rational& x, double /*tol*/) { return sgn(x) > 0; }
  static Rational abs(const Rational& x) { return ::abs(x); }
  static double to_double(const Rational& x) { return rational_to_double(x); }
  static Rational from_rational(const Rational& x) { return x; }
};

template <>
struct NumTraits<double> {
  static constexpr bool exact = false;
  static constexpr Arithmetic mode = Arithmetic::floating;

  static bool is_zero(double x, double tol) { return std::fabs(x) <= tol; }
  static bool leq(double a, double b, double tol) { return a <= b + tol; }
  static bool eq(double a, double b, double tol) { return std::fabs(a - b) <= tol; }
  static bool positive(double x, double tol) { return x > tol; }
  static double abs(double x) { return std::fabs(x); }
  static double to_double(double x) { return x; }
  static double from_rational(const Rational& x) { return rational_to_double(x); }
};

template <class T>
concept Scalar = requires { NumTraits<T>::exact; };

}  // namespace caufrac
