#pragma once

#include <gmpxx.h>

#include <map>
#include <string>
#include <string_view>

namespace cbn {

/// Exact rational number. GMP keeps it canonical (gcd 1, positive denominator).
using Rational = mpq_class;

/// Variable name -> exact value.
using Assignment = std::map<std::string, Rational, std::less<>>;

/// Parses an integer or decimal literal ("3", "0.05", "-1.25", "2.5e-3")
/// exactly. A trailing '?' (approximation marker some solvers print) is
/// ignored. Throws std::invalid_argument on malformed input.
Rational parse_decimal(std::string_view text);

/// True iff the value has a finite decimal expansion.
bool is_finite_decimal(const Rational& value);

/// Exact decimal text for finite decimals, "n/d" otherwise.
std::string to_string(const Rational& value);

/// Rounded decimal text with the given number of significant digits.
std::string to_decimal(const Rational& value, int significant_digits = 12);

/// Rounds to the given number of significant decimal digits (half away
/// from zero). Zero stays zero.
Rational round_significant(const Rational& value, int significant_digits);

double to_double(const Rational& value);

Rational abs(const Rational& value);

}  // namespace cbn
