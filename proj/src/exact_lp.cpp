#include "exact_lp.hpp"

#include <stdexcept>

namespace hmx::lp {

namespace {

struct Tableau {
  std::vector<RatVec> rows;  // each row: coefficients then rhs
  std::vector<std::size_t> basis;
  std::size_t cols = 0;  // number of variable columns (rhs stored at index cols)

  void pivot(std::size_t r, std::size_t c) {
    Rational p = rows[r][c];
    for (auto& v : rows[r]) v /= p;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rational f = rows[i][c];
      for (std::size_t j = 0; j <= cols; ++j)
        if (rows[r][j] != 0) rows[i][j] -= f * rows[r][j];
    }
    basis[r] = c;
  }

  // Maximizes cost . x over columns allowed[j]; Bland's rule. Returns false if unbounded.
  bool run(const RatVec& cost, const std::vector<bool>& allowed) {
    for (;;) {
      std::size_t enter = cols;
      for (std::size_t j = 0; j < cols && enter == cols; ++j) {
        if (!allowed[j]) continue;
        bool basic = false;
        for (auto b : basis)
          if (b == j) basic = true;
        if (basic) continue;
        Rational reduced = cost[j];
        for (std::size_t i = 0; i < rows.size(); ++i)
          if (rows[i][j] != 0) reduced -= cost[basis[i]] * rows[i][j];
        if (reduced > 0) enter = j;
      }
      if (enter == cols) return true;
      std::size_t leave = rows.size();
      Rational best;
      for (std::size_t i = 0; i < rows.size(); ++i) {
        if (rows[i][enter] <= 0) continue;
        Rational ratio = rows[i][cols] / rows[i][enter];
        if (leave == rows.size() || ratio < best || (ratio == best && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == rows.size()) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

Solution maximize(const Program& prog) {
  const std::size_t n = prog.num_vars;
  // Column layout: for each original variable a nonnegative part, plus a negative part if free.
  std::vector<std::size_t> pos(n), neg(n, SIZE_MAX);
  std::size_t cols = 0;
  for (std::size_t j = 0; j < n; ++j) {
    pos[j] = cols++;
    if (!prog.is_free.empty() && prog.is_free[j]) neg[j] = cols++;
  }
  const std::size_t m = prog.constraints.size();
  std::vector<std::size_t> slack(m, SIZE_MAX), art(m, SIZE_MAX);
  std::vector<int> flip(m, 1);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& con = prog.constraints[i];
    Sense s = con.sense;
    if (con.rhs < 0) {
      flip[i] = -1;
      if (s == Sense::LessEq)
        s = Sense::GreaterEq;
      else if (s == Sense::GreaterEq)
        s = Sense::LessEq;
    }
    if (s != Sense::Equal) slack[i] = cols++;
    if (s != Sense::LessEq) art[i] = cols++;
  }
  Tableau t;
  t.cols = cols;
  t.rows.assign(m, RatVec(cols + 1));
  t.basis.assign(m, 0);
  for (std::size_t i = 0; i < m; ++i) {
    const auto& con = prog.constraints[i];
    Sense s = con.sense;
    if (flip[i] < 0) s = (s == Sense::LessEq) ? Sense::GreaterEq : (s == Sense::GreaterEq ? Sense::LessEq : s);
    for (std::size_t j = 0; j < n; ++j) {
      Rational a = con.coeffs[j] * flip[i];
      t.rows[i][pos[j]] = a;
      if (neg[j] != SIZE_MAX) t.rows[i][neg[j]] = -a;
    }
    if (slack[i] != SIZE_MAX) t.rows[i][slack[i]] = (s == Sense::LessEq) ? 1 : -1;
    if (art[i] != SIZE_MAX) t.rows[i][art[i]] = 1;
    t.rows[i][cols] = con.rhs * flip[i];
    t.basis[i] = (art[i] != SIZE_MAX) ? art[i] : slack[i];
  }

  std::vector<bool> allowed(cols, true);
  RatVec phase1(cols);
  bool any_art = false;
  for (std::size_t i = 0; i < m; ++i)
    if (art[i] != SIZE_MAX) {
      phase1[art[i]] = -1;
      any_art = true;
    }
  if (any_art) {
    t.run(phase1, allowed);
    Rational infeas;
    for (std::size_t i = 0; i < m; ++i)
      if (phase1[t.basis[i]] != 0) infeas += t.rows[i][cols];
    if (infeas != 0) return Solution{Status::Infeasible, {}, {}};
    // Drive zero-level artificials out of the basis where possible.
    for (std::size_t i = 0; i < m; ++i) {
      if (phase1[t.basis[i]] == 0) continue;
      for (std::size_t j = 0; j < cols; ++j)
        if (phase1[j] == 0 && t.rows[i][j] != 0) {
          t.pivot(i, j);
          break;
        }
    }
    for (std::size_t i = 0; i < m; ++i)
      if (art[i] != SIZE_MAX) allowed[art[i]] = false;
  }

  RatVec cost(cols);
  for (std::size_t j = 0; j < n; ++j) {
    cost[pos[j]] = prog.objective.empty() ? Rational(0) : prog.objective[j];
    if (neg[j] != SIZE_MAX) cost[neg[j]] = -cost[pos[j]];
  }
  if (!t.run(cost, allowed)) return Solution{Status::Unbounded, {}, {}};

  RatVec col_value(cols);
  for (std::size_t i = 0; i < m; ++i) col_value[t.basis[i]] = t.rows[i][cols];
  Solution sol;
  sol.status = Status::Optimal;
  sol.x.assign(n, Rational(0));
  for (std::size_t j = 0; j < n; ++j) {
    sol.x[j] = col_value[pos[j]];
    if (neg[j] != SIZE_MAX) sol.x[j] -= col_value[neg[j]];
    if (!prog.objective.empty()) sol.value += prog.objective[j] * sol.x[j];
  }
  return sol;
}

bool find_strict_point(std::size_t dim, const std::vector<Constraint>& hard, const std::vector<RatVec>& strict,
                       const RatVec& strict_rhs, RatVec& point) {
  // Variables: u (free, dim entries) and slack s in [?, 1]; maximize s subject to strict_i(u) >= s.
  Program p;
  p.num_vars = dim + 1;
  p.is_free.assign(dim + 1, true);
  for (const auto& h : hard) {
    Constraint c = h;
    c.coeffs.resize(dim + 1);
    p.constraints.push_back(std::move(c));
  }
  for (std::size_t i = 0; i < strict.size(); ++i) {
    Constraint c;
    c.coeffs = strict[i];
    c.coeffs.resize(dim + 1);
    c.coeffs[dim] = -1;
    c.sense = Sense::GreaterEq;
    c.rhs = -strict_rhs[i];
    p.constraints.push_back(std::move(c));
  }
  {
    Constraint cap;
    cap.coeffs.assign(dim + 1, Rational(0));
    cap.coeffs[dim] = 1;
    cap.sense = Sense::LessEq;
    cap.rhs = 1;
    p.constraints.push_back(std::move(cap));
  }
  p.objective.assign(dim + 1, Rational(0));
  p.objective[dim] = 1;
  auto sol = maximize(p);
  if (sol.status != Status::Optimal) {
    if (sol.status == Status::Unbounded) throw std::logic_error("find_strict_point: capped LP unbounded");
    return false;
  }
  if (!strict.empty() && sol.x[dim] <= 0) return false;
  point.assign(sol.x.begin(), sol.x.begin() + static_cast<std::ptrdiff_t>(dim));
  return true;
}

}  // namespace hmx::lp
