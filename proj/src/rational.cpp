#include "cbn/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace cbn {

namespace {

mpz_class pow10(unsigned long exponent) {
  mpz_class result;
  mpz_ui_pow_ui(result.get_mpz_t(), 10, exponent);
  return result;
}

}  // namespace

Rational parse_decimal(std::string_view text) {
  if (!text.empty() && text.back() == '?') text.remove_suffix(1);
  if (text.empty()) throw std::invalid_argument("empty numeric literal");

  bool negative = false;
  std::size_t pos = 0;
  if (text[pos] == '-' || text[pos] == '+') {
    negative = text[pos] == '-';
    ++pos;
  }

  std::string digits;
  long fraction_digits = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (; pos < text.size(); ++pos) {
    char c = text[pos];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits.push_back(c);
      seen_digit = true;
      if (seen_point) ++fraction_digits;
    } else if (c == '.' && !seen_point) {
      seen_point = true;
    } else {
      break;
    }
  }
  if (!seen_digit) throw std::invalid_argument("malformed numeric literal: " + std::string(text));

  long exponent = 0;
  if (pos < text.size() && (text[pos] == 'e' || text[pos] == 'E')) {
    ++pos;
    std::string exp_text(text.substr(pos));
    if (exp_text.empty()) throw std::invalid_argument("malformed exponent: " + std::string(text));
    std::size_t used = 0;
    try {
      exponent = std::stol(exp_text, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("malformed exponent: " + std::string(text));
    }
    pos += used;
  }
  if (pos != text.size()) throw std::invalid_argument("malformed numeric literal: " + std::string(text));

  mpz_class numerator(digits, 10);
  long scale = exponent - fraction_digits;
  Rational result;
  if (scale >= 0) {
    result = Rational(numerator * pow10(static_cast<unsigned long>(scale)));
  } else {
    result = Rational(numerator, pow10(static_cast<unsigned long>(-scale)));
  }
  result.canonicalize();
  if (negative) result = -result;
  return result;
}

bool is_finite_decimal(const Rational& value) {
  mpz_class den = value.get_den();
  while (mpz_divisible_ui_p(den.get_mpz_t(), 2)) den /= 2;
  while (mpz_divisible_ui_p(den.get_mpz_t(), 5)) den /= 5;
  return den == 1;
}

std::string to_string(const Rational& value) {
  if (value.get_den() == 1) return value.get_num().get_str();
  if (!is_finite_decimal(value)) return value.get_str();

  // Smallest k with den | 10^k.
  unsigned long k = 0;
  mpz_class scale = 1;
  while (!mpz_divisible_p(scale.get_mpz_t(), value.get_den_mpz_t())) {
    scale *= 10;
    ++k;
  }
  mpz_class scaled = abs(value.get_num()) * (scale / value.get_den());
  std::string text = scaled.get_str();
  if (text.size() <= k) text.insert(0, k - text.size() + 1, '0');
  text.insert(text.size() - k, ".");
  if (value < 0) text.insert(0, "-");
  return text;
}

Rational round_significant(const Rational& value, int significant_digits) {
  if (value == 0) return value;
  Rational magnitude = abs(value);
  // Find e with 10^(e-1) <= magnitude < 10^e.
  long e = static_cast<long>(mpz_sizeinbase(magnitude.get_num_mpz_t(), 10)) -
           static_cast<long>(mpz_sizeinbase(magnitude.get_den_mpz_t(), 10));
  auto power = [](long p) {
    return p >= 0 ? Rational(pow10(static_cast<unsigned long>(p)))
                  : Rational(mpz_class(1), pow10(static_cast<unsigned long>(-p)));
  };
  while (magnitude >= power(e)) ++e;
  while (magnitude < power(e - 1)) --e;

  long shift = significant_digits - e;
  Rational scaled = magnitude * power(shift);
  // Round half away from zero.
  mpz_class q = scaled.get_num() / scaled.get_den();
  Rational frac = scaled - Rational(q);
  if (frac * 2 >= 1) q += 1;
  Rational result = Rational(q) / power(shift);
  result.canonicalize();
  return value < 0 ? Rational(-result) : result;
}

std::string to_decimal(const Rational& value, int significant_digits) {
  return to_string(round_significant(value, significant_digits));
}

double to_double(const Rational& value) { return value.get_d(); }

Rational abs(const Rational& value) { return value < 0 ? Rational(-value) : value; }

}  // namespace cbn
