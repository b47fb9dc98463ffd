#include "hmx/core_lattice.hpp"

#include <algorithm>
#include <sstream>
#include <utility>

namespace hmx::lattice {

IntMatrix::IntMatrix(std::size_t rows, std::size_t cols, std::vector<Int> entries)
    : rows_(rows), cols_(cols), data_(std::move(entries)) {
  if (data_.size() != rows * cols) throw std::invalid_argument("IntMatrix: entry count mismatch");
}

IntMatrix IntMatrix::identity(std::size_t n) {
  IntMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1;
  return m;
}

IntMatrix IntMatrix::from_rows(const std::vector<std::vector<long>>& rows, std::size_t cols_if_empty) {
  std::vector<IntVec> big;
  big.reserve(rows.size());
  for (const auto& r : rows) big.emplace_back(r.begin(), r.end());
  return from_vectors(big, cols_if_empty);
}

IntMatrix IntMatrix::from_vectors(const std::vector<IntVec>& rows, std::size_t cols_if_empty) {
  if (rows.empty()) return IntMatrix(0, cols_if_empty);
  std::size_t c = rows.front().size();
  IntMatrix m(rows.size(), c);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != c) throw std::invalid_argument("IntMatrix: ragged rows");
    for (std::size_t j = 0; j < c; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

IntVec IntMatrix::row(std::size_t r) const {
  return IntVec(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

IntVec IntMatrix::col(std::size_t c) const {
  IntVec v(rows_);
  for (std::size_t r = 0; r < rows_; ++r) v[r] = (*this)(r, c);
  return v;
}

IntMatrix IntMatrix::transpose() const {
  IntMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

IntMatrix IntMatrix::submatrix(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const {
  IntMatrix s(r1 - r0, c1 - c0);
  for (std::size_t r = r0; r < r1; ++r)
    for (std::size_t c = c0; c < c1; ++c) s(r - r0, c - c0) = (*this)(r, c);
  return s;
}

bool IntMatrix::is_zero() const {
  return std::all_of(data_.begin(), data_.end(), [](const Int& v) { return v == 0; });
}

IntMatrix operator*(const IntMatrix& a, const IntMatrix& b) {
  if (a.cols() != b.rows()) throw std::invalid_argument("IntMatrix: dimension mismatch in product");
  IntMatrix p(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      if (a(i, k) == 0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) p(i, j) += a(i, k) * b(k, j);
    }
  return p;
}

IntVec operator*(const IntMatrix& a, const IntVec& v) {
  IntVec out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
  return out;
}

RatVec operator*(const IntMatrix& a, const RatVec& v) {
  RatVec out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out[i] += Rational(a(i, j)) * v[j];
  return out;
}

std::string IntMatrix::to_string() const {
  std::ostringstream os;
  os << "[";
  for (std::size_t r = 0; r < rows_; ++r) {
    os << (r ? ", [" : "[");
    for (std::size_t c = 0; c < cols_; ++c) os << (c ? ", " : "") << (*this)(r, c).get_str();
    os << "]";
  }
  os << "]";
  return os.str();
}

namespace {

Int floor_div(const Int& a, const Int& b) {
  Int q;
  mpz_fdiv_q(q.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
  return q;
}

// Elementary operations on D that keep A = U D V and the tracked inverses in sync.
struct SmithState {
  IntMatrix D, U, V, U_inv, V_inv;

  void row_add(std::size_t i, std::size_t j, const Int& k) {
    for (std::size_t c = 0; c < D.cols(); ++c) D(i, c) += k * D(j, c);
    for (std::size_t r = 0; r < U.rows(); ++r) U(r, j) -= k * U(r, i);
    for (std::size_t c = 0; c < U_inv.cols(); ++c) U_inv(i, c) += k * U_inv(j, c);
  }
  void row_swap(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t c = 0; c < D.cols(); ++c) std::swap(D(i, c), D(j, c));
    for (std::size_t r = 0; r < U.rows(); ++r) std::swap(U(r, i), U(r, j));
    for (std::size_t c = 0; c < U_inv.cols(); ++c) std::swap(U_inv(i, c), U_inv(j, c));
  }
  void row_neg(std::size_t i) {
    for (std::size_t c = 0; c < D.cols(); ++c) D(i, c) = -D(i, c);
    for (std::size_t r = 0; r < U.rows(); ++r) U(r, i) = -U(r, i);
    for (std::size_t c = 0; c < U_inv.cols(); ++c) U_inv(i, c) = -U_inv(i, c);
  }
  void col_add(std::size_t i, std::size_t j, const Int& k) {
    for (std::size_t r = 0; r < D.rows(); ++r) D(r, i) += k * D(r, j);
    for (std::size_t c = 0; c < V.cols(); ++c) V(j, c) -= k * V(i, c);
    for (std::size_t r = 0; r < V_inv.rows(); ++r) V_inv(r, i) += k * V_inv(r, j);
  }
  void col_swap(std::size_t i, std::size_t j) {
    if (i == j) return;
    for (std::size_t r = 0; r < D.rows(); ++r) std::swap(D(r, i), D(r, j));
    for (std::size_t c = 0; c < V.cols(); ++c) std::swap(V(i, c), V(j, c));
    for (std::size_t r = 0; r < V_inv.rows(); ++r) std::swap(V_inv(r, i), V_inv(r, j));
  }
};

}  // namespace

std::size_t SmithForm::rank() const {
  std::size_t r = 0;
  for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i)
    if (D(i, i) != 0) ++r;
  return r;
}

std::vector<Int> SmithForm::invariant_factors() const {
  std::vector<Int> f;
  for (std::size_t i = 0; i < std::min(D.rows(), D.cols()); ++i)
    if (D(i, i) != 0) f.push_back(D(i, i));
  return f;
}

SmithForm smith_normal_form(const IntMatrix& a) {
  const std::size_t m = a.rows(), n = a.cols();
  SmithState s{a, IntMatrix::identity(m), IntMatrix::identity(n), IntMatrix::identity(m),
               IntMatrix::identity(n)};
  for (std::size_t t = 0; t < std::min(m, n); ++t) {
    bool found_any = true;
    for (;;) {
      // Pivot: smallest nonzero magnitude in the trailing block, first in row-major order.
      std::size_t pr = m, pc = n;
      for (std::size_t i = t; i < m; ++i)
        for (std::size_t j = t; j < n; ++j) {
          if (s.D(i, j) == 0) continue;
          if (pr == m || abs(s.D(i, j)) < abs(s.D(pr, pc))) {
            pr = i;
            pc = j;
          }
        }
      if (pr == m) {
        found_any = false;
        break;
      }
      s.row_swap(t, pr);
      s.col_swap(t, pc);
      bool clean = true;
      for (std::size_t i = t + 1; i < m; ++i) {
        if (s.D(i, t) == 0) continue;
        s.row_add(i, t, -floor_div(s.D(i, t), s.D(t, t)));
        if (s.D(i, t) != 0) clean = false;
      }
      for (std::size_t j = t + 1; j < n; ++j) {
        if (s.D(t, j) == 0) continue;
        s.col_add(j, t, -floor_div(s.D(t, j), s.D(t, t)));
        if (s.D(t, j) != 0) clean = false;
      }
      if (!clean) continue;
      bool divides = true;
      for (std::size_t i = t + 1; i < m && divides; ++i)
        for (std::size_t j = t + 1; j < n; ++j) {
          Int r;
          mpz_tdiv_r(r.get_mpz_t(), s.D(i, j).get_mpz_t(), s.D(t, t).get_mpz_t());
          if (r != 0) {
            s.row_add(t, i, 1);
            divides = false;
            break;
          }
        }
      if (divides) break;
    }
    if (!found_any) break;
    if (s.D(t, t) < 0) s.row_neg(t);
  }
  return SmithForm{std::move(s.U), std::move(s.D), std::move(s.V), std::move(s.U_inv), std::move(s.V_inv)};
}

IntMatrix hermite_normal_form(const IntMatrix& a) {
  IntMatrix h = a;
  const std::size_t m = h.rows(), n = h.cols();
  auto add_row = [&](std::size_t i, std::size_t j, const Int& k) {
    for (std::size_t c = 0; c < n; ++c) h(i, c) += k * h(j, c);
  };
  auto swap_rows = [&](std::size_t i, std::size_t j) {
    for (std::size_t c = 0; c < n; ++c) std::swap(h(i, c), h(j, c));
  };
  std::size_t r = 0;
  for (std::size_t c = 0; c < n && r < m; ++c) {
    for (;;) {
      std::size_t p = m;
      for (std::size_t i = r; i < m; ++i)
        if (h(i, c) != 0 && (p == m || abs(h(i, c)) < abs(h(p, c)))) p = i;
      if (p == m) break;
      swap_rows(r, p);
      bool clean = true;
      for (std::size_t i = r + 1; i < m; ++i) {
        if (h(i, c) == 0) continue;
        add_row(i, r, -floor_div(h(i, c), h(r, c)));
        if (h(i, c) != 0) clean = false;
      }
      if (clean) break;
    }
    if (h(r, c) == 0) continue;
    if (h(r, c) < 0)
      for (std::size_t j = 0; j < n; ++j) h(r, j) = -h(r, j);
    for (std::size_t i = 0; i < r; ++i) add_row(i, r, -floor_div(h(i, c), h(r, c)));
    ++r;
  }
  return h;
}

Int determinant(const IntMatrix& a) {
  if (a.rows() != a.cols()) throw std::invalid_argument("determinant of non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  IntMatrix m = a;
  Int sign = 1, prev = 1;
  for (std::size_t k = 0; k + 1 < n; ++k) {
    if (m(k, k) == 0) {
      std::size_t p = k + 1;
      while (p < n && m(p, k) == 0) ++p;
      if (p == n) return 0;
      for (std::size_t j = 0; j < n; ++j) std::swap(m(k, j), m(p, j));
      sign = -sign;
    }
    for (std::size_t i = k + 1; i < n; ++i) {
      for (std::size_t j = k + 1; j < n; ++j) {
        m(i, j) = (m(i, j) * m(k, k) - m(i, k) * m(k, j));
        mpz_divexact(m(i, j).get_mpz_t(), m(i, j).get_mpz_t(), prev.get_mpz_t());
      }
    }
    prev = m(k, k);
  }
  return sign * m(n - 1, n - 1);
}

std::size_t rank(const IntMatrix& a) { return smith_normal_form(a).rank(); }

IntMatrix integer_kernel(const IntMatrix& a) {
  auto snf = smith_normal_form(a);
  const std::size_t n = a.cols(), r = snf.rank();
  IntMatrix k(n - r, n);
  for (std::size_t j = r; j < n; ++j)
    for (std::size_t i = 0; i < n; ++i) k(j - r, i) = snf.V_inv(i, j);
  return hermite_normal_form(k).transpose();
}

IntMatrix unimodular_completion(const IntMatrix& partial, std::size_t dim) {
  if (partial.cols() != dim) throw std::invalid_argument("unimodular_completion: width mismatch");
  auto snf = smith_normal_form(partial);
  if (snf.rank() != partial.rows())
    throw Error(ErrorKind::NonUnimodularFlat, "rows " + partial.to_string() + " are dependent");
  for (const auto& f : snf.invariant_factors())
    if (f != 1)
      throw Error(ErrorKind::NonUnimodularFlat,
                  "rows " + partial.to_string() + " do not extend to an integer basis");
  IntMatrix out(dim, dim);
  for (std::size_t i = 0; i < partial.rows(); ++i)
    for (std::size_t j = 0; j < dim; ++j) out(i, j) = partial(i, j);
  // Rows c.. of V complete the basis since partial = U [I 0] V.
  for (std::size_t i = partial.rows(); i < dim; ++i)
    for (std::size_t j = 0; j < dim; ++j) out(i, j) = snf.V(i, j);
  return out;
}

IntMatrix unimodular_inverse(const IntMatrix& a) {
  auto snf = smith_normal_form(a);
  if (a.rows() != a.cols() || snf.rank() != a.rows())
    throw std::invalid_argument("unimodular_inverse: singular matrix");
  for (const auto& f : snf.invariant_factors())
    if (f != 1) throw std::invalid_argument("unimodular_inverse: not unimodular");
  // A = U V  =>  A^-1 = V^-1 U^-1.
  return snf.V_inv * snf.U_inv;
}

bool solve_rational(const IntMatrix& a, const RatVec& b, RatVec& x) {
  auto snf = smith_normal_form(a);
  RatVec ub = snf.U_inv * b;
  const std::size_t r = snf.rank();
  RatVec y(a.cols());
  for (std::size_t i = 0; i < ub.size(); ++i) {
    if (i < r)
      y[i] = ub[i] / Rational(snf.D(i, i));
    else if (ub[i] != 0)
      return false;
  }
  x = snf.V_inv * y;
  return true;
}

ToriSequence ToriSequence::from_iota(IntMatrix iota) {
  ToriSequence s;
  s.n = iota.rows();
  s.k = iota.cols();
  s.iota = std::move(iota);
  return s;
}

RationalPoint RationalPoint::reduced(RatVec raw) {
  for (auto& c : raw) {
    c.canonicalize();
    c = frac(c);
  }
  return RationalPoint{std::move(raw)};
}

ValidationReport validate_sequence(const ToriSequence& seq) {
  ValidationReport rep;
  if (seq.iota.rows() != seq.n || seq.iota.cols() != seq.k) {
    rep.fail("iota has shape " + std::to_string(seq.iota.rows()) + "x" + std::to_string(seq.iota.cols()) +
             ", expected " + std::to_string(seq.n) + "x" + std::to_string(seq.k));
    return rep;
  }
  if (seq.n == 0 || seq.k >= seq.n) {
    rep.fail("need k < n (got n=" + std::to_string(seq.n) + ", k=" + std::to_string(seq.k) + ")");
    return rep;
  }
  auto snf = smith_normal_form(seq.iota);
  if (snf.rank() != seq.k) rep.fail("iota is not injective over Q (rank " + std::to_string(snf.rank()) + ")");
  for (const auto& f : snf.invariant_factors())
    if (f != 1) {
      rep.fail("cokernel of iota has torsion (invariant factor " + f.get_str() + ")");
      break;
    }
  for (std::size_t i = 0; i < seq.n; ++i) {
    IntMatrix ext(seq.n, seq.k + 1);
    for (std::size_t r = 0; r < seq.n; ++r) {
      for (std::size_t c = 0; c < seq.k; ++c) ext(r, c) = seq.iota(r, c);
      ext(r, seq.k) = (r == i) ? 1 : 0;
    }
    if (rank(ext) <= snf.rank())
      rep.fail("e" + std::to_string(i + 1) + " lies in the rational span of iota (coordinate subtorus in image)");
  }
  if (rep.passed()) {
    auto dual = dual_data(seq);
    if (!(dual.quot * seq.iota).is_zero()) rep.fail("quot * iota != 0");
    if (dual.L_basis.cols() != seq.d()) rep.fail("kernel rank differs from n - k");
    auto lsnf = smith_normal_form(dual.L_basis);
    for (const auto& f : lsnf.invariant_factors())
      if (f != 1) rep.fail("L_basis does not extend to a unimodular matrix");
  }
  return rep;
}

DualData dual_data(const ToriSequence& seq) {
  if (seq.iota.rows() != seq.n || seq.iota.cols() != seq.k || seq.k >= seq.n)
    throw Error(ErrorKind::InvalidSequence, "malformed iota");
  DualData out;
  out.L_basis = integer_kernel(seq.iota.transpose());
  auto snf = smith_normal_form(seq.iota);
  out.quot = snf.U_inv.submatrix(snf.rank(), seq.n, 0, seq.n);
  return out;
}

ToriSequence make_sequence(IntMatrix iota) {
  auto seq = ToriSequence::from_iota(std::move(iota));
  auto rep = validate_sequence(seq);
  if (!rep.passed()) {
    std::string msg;
    for (const auto& f : rep.failures) msg += (msg.empty() ? "" : "; ") + f;
    throw Error(ErrorKind::InvalidSequence, msg);
  }
  auto dual = dual_data(seq);
  seq.L_basis = std::move(dual.L_basis);
  seq.quot = std::move(dual.quot);
  return seq;
}

}  // namespace hmx::lattice
