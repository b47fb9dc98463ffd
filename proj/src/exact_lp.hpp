#pragma once

// Small dense exact simplex over the rationals. Internal to the library.

#include <vector>

#include "hmx/numbers.hpp"

namespace hmx::lp {

enum class Sense { LessEq, Equal, GreaterEq };

struct Constraint {
  RatVec coeffs;
  Sense sense;
  Rational rhs;
};

struct Program {
  std::size_t num_vars = 0;
  std::vector<bool> is_free;  // variables not marked free are >= 0
  std::vector<Constraint> constraints;
  RatVec objective;  // maximized
};

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
  Status status = Status::Infeasible;
  Rational value;
  RatVec x;
};

Solution maximize(const Program& prog);

/// Finds a point satisfying the equalities, the non-strict inequalities and every strict
/// inequality `strict[i] . u + strict_rhs[i] > 0`. Variables are free unless bounds are given as
/// constraints. Returns false when no such point exists. The point maximizes the common slack
/// (capped at 1), which makes it deterministic and well inside the region.
bool find_strict_point(std::size_t dim, const std::vector<Constraint>& hard, const std::vector<RatVec>& strict,
                       const RatVec& strict_rhs, RatVec& point);

}  // namespace hmx::lp
