#include "caufrac/numeric.hpp"

#include <cctype>
#include <cstdlib>

#include "caufrac/errors.hpp"

namespace caufrac {

std::string arithmetic_name(Arithmetic mode) {
  return mode == Arithmetic::rational ? "rational" : "float";
}

Rational parse_rational(std::string_view text) {
  auto fail = [&] { throw ParseError("not a rational literal: '" + std::string(text) + "'"); };
  if (text.empty()) fail();
  std::size_t slash = text.npos;
  for (std::size_t k = 0; k < text.size(); ++k) {
    char c = text[k];
    if (c == '/') {
      if (slash != text.npos) fail();
      slash = k;
    } else if (c == '-' || c == '+') {
      if (k != 0) fail();
    } else if (!std::isdigit(static_cast<unsigned char>(c))) {
      fail();
    }
  }
  std::string_view num = slash == text.npos ? text : text.substr(0, slash);
  std::string_view den = slash == text.npos ? std::string_view("1") : text.substr(slash + 1);
  if (num.empty() || num == "-" || num == "+" || den.empty()) fail();
  std::string num_str(num);
  if (num_str.front() == '+') num_str.erase(0, 1);
  mpz_class n(num_str, 10);
  mpz_class d(std::string(den), 10);
  if (d == 0) throw ParseError("zero denominator in '" + std::string(text) + "'");
  Rational out(n, d);
  out.canonicalize();
  return out;
}

std::string format_rational(const Rational& value) { return value.get_str(10); }

double rational_to_double(const Rational& value) {
  const mpz_class& num = value.get_num();
  const mpz_class& den = value.get_den();
  // Both operands exact in binary: one IEEE division rounds correctly.
  if (mpz_sizeinbase(num.get_mpz_t(), 2) <= 53 && mpz_sizeinbase(den.get_mpz_t(), 2) <= 53) {
    return num.get_d() / den.get_d();
  }
  // Otherwise 40 significant digits, rounded once more by strtod.
  mpf_class wide(value, 256);
  mp_exp_t exponent = 0;
  const std::string digits = wide.get_str(exponent, 10, 40);
  if (digits.empty()) return 0.0;
  const bool negative = digits.front() == '-';
  const std::string mantissa = negative ? digits.substr(1) : digits;
  const std::string text = std::string(negative ? "-" : "") + "0." + mantissa + "e" +
                           std::to_string(exponent);
  return std::strtod(text.c_str(), nullptr);
}

}  // namespace caufrac
