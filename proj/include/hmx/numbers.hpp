#pragma once

#include <gmpxx.h>

#include <string>
#include <vector>

namespace hmx {

using Int = mpz_class;
using Rational = mpq_class;

std::string to_string(const Int& v);
/// "p/q" in lowest terms, or "p" when the denominator is 1.
std::string to_string(const Rational& v);

Int parse_int(const std::string& s);
/// Accepts "p", "p/q" and "-p/q"; throws Error(ParseError).
Rational parse_rational(const std::string& s);

Rational floor_rational(const Rational& v);
/// Representative of v modulo 1 in [0,1).
Rational frac(const Rational& v);

using RatVec = std::vector<Rational>;
using IntVec = std::vector<Int>;

}  // namespace hmx
