#include "hmx/numbers.hpp"

#include "hmx/error.hpp"

namespace hmx {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidSequence: return "InvalidSequence";
    case ErrorKind::NoLift: return "NoLift";
    case ErrorKind::NonGenericArrangement: return "NonGenericArrangement";
    case ErrorKind::NonUnimodularFlat: return "NonUnimodularFlat";
    case ErrorKind::CompletionBlowup: return "CompletionBlowup";
    case ErrorKind::NonMonicRelation: return "NonMonicRelation";
    case ErrorKind::DegreeOverflow: return "DegreeOverflow";
    case ErrorKind::NotCentral: return "NotCentral";
    case ErrorKind::IllTypedMap: return "IllTypedMap";
    case ErrorKind::NoSpanningForest: return "NoSpanningForest";
    case ErrorKind::NotComposable: return "NotComposable";
    case ErrorKind::NotAdjacent: return "NotAdjacent";
    case ErrorKind::SideUnspecified: return "SideUnspecified";
    case ErrorKind::FunctorialityFailure: return "FunctorialityFailure";
    case ErrorKind::NonTransverseCut: return "NonTransverseCut";
    case ErrorKind::StepFailure: return "StepFailure";
    case ErrorKind::ParseError: return "ParseError";
  }
  return "Unknown";
}

std::string to_string(const Int& v) { return v.get_str(); }

std::string to_string(const Rational& v) {
  Rational c = v;
  c.canonicalize();
  if (c.get_den() == 1) return c.get_num().get_str();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Int parse_int(const std::string& s) {
  Int v;
  if (s.empty() || v.set_str(s, 10) != 0) throw Error(ErrorKind::ParseError, "not an integer: '" + s + "'");
  return v;
}

Rational parse_rational(const std::string& s) {
  auto slash = s.find('/');
  if (slash == std::string::npos) return Rational(parse_int(s));
  Int num = parse_int(s.substr(0, slash));
  Int den = parse_int(s.substr(slash + 1));
  if (den == 0) throw Error(ErrorKind::ParseError, "zero denominator: '" + s + "'");
  Rational r(num, den);
  r.canonicalize();
  return r;
}

Rational floor_rational(const Rational& v) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), v.get_num_mpz_t(), v.get_den_mpz_t());
  return Rational(q);
}

Rational frac(const Rational& v) { return v - floor_rational(v); }

}  // namespace hmx
