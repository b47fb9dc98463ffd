#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "hmx/error.hpp"
#include "hmx/numbers.hpp"

namespace hmx::lattice {

/// Dense row-major matrix of arbitrary-precision integers.
class IntMatrix {
 public:
  IntMatrix() = default;
  IntMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}
  IntMatrix(std::size_t rows, std::size_t cols, std::vector<Int> entries);

  static IntMatrix identity(std::size_t n);
  /// Builds from nested initializer-style rows; all rows must have equal length.
  static IntMatrix from_rows(const std::vector<std::vector<long>>& rows, std::size_t cols_if_empty = 0);
  static IntMatrix from_vectors(const std::vector<IntVec>& rows, std::size_t cols_if_empty = 0);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  Int& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Int& operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  IntVec row(std::size_t r) const;
  IntVec col(std::size_t c) const;
  IntMatrix transpose() const;
  IntMatrix submatrix(std::size_t r0, std::size_t r1, std::size_t c0, std::size_t c1) const;
  bool is_zero() const;

  friend IntMatrix operator*(const IntMatrix& a, const IntMatrix& b);
  friend bool operator==(const IntMatrix& a, const IntMatrix& b) = default;

  std::string to_string() const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Int> data_;
};

IntVec operator*(const IntMatrix& a, const IntVec& v);
RatVec operator*(const IntMatrix& a, const RatVec& v);

/// A = U * D * V with U, V unimodular and D diagonal, d1 | d2 | ... (all >= 0).
struct SmithForm {
  IntMatrix U;
  IntMatrix D;
  IntMatrix V;
  IntMatrix U_inv;
  IntMatrix V_inv;

  std::size_t rank() const;
  std::vector<Int> invariant_factors() const;
};

SmithForm smith_normal_form(const IntMatrix& a);

/// Row-style Hermite normal form: upper echelon, positive pivots, entries above each pivot in [0, pivot).
IntMatrix hermite_normal_form(const IntMatrix& a);

/// Determinant of a square matrix (fraction-free elimination).
Int determinant(const IntMatrix& a);
std::size_t rank(const IntMatrix& a);

/// Z-basis of the integer kernel {x : A x = 0}, as columns, canonicalized by HNF of the transpose.
IntMatrix integer_kernel(const IntMatrix& a);

/// Unimodular completion: the rows of `partial` (which must extend to a Z-basis) followed by
/// complementary rows. Throws NonUnimodularFlat when the rows do not extend.
IntMatrix unimodular_completion(const IntMatrix& partial, std::size_t dim);

/// Exact inverse of a unimodular square matrix.
IntMatrix unimodular_inverse(const IntMatrix& a);

/// Rational solution of A x = b picked through the Smith form; nullopt-style failure returns false.
bool solve_rational(const IntMatrix& a, const RatVec& b, RatVec& x);

/// Short exact sequence 1 -> T -> (C*)^n -> G -> 1 given by the cocharacter inclusion iota (n x k).
struct ToriSequence {
  std::size_t n = 0;
  std::size_t k = 0;
  IntMatrix iota;     // n x k
  IntMatrix L_basis;  // n x d, basis of ker(iota^T), filled by dual_data
  IntMatrix quot;     // d x n, cokernel projection, filled by dual_data

  std::size_t d() const { return n - k; }

  static ToriSequence from_iota(IntMatrix iota);
};

/// Point of the compact torus T^vee with exact coordinates reduced to [0,1).
struct RationalPoint {
  RatVec coords;

  static RationalPoint reduced(RatVec raw);
};

ValidationReport validate_sequence(const ToriSequence& seq);

struct DualData {
  IntMatrix L_basis;
  IntMatrix quot;
};

DualData dual_data(const ToriSequence& seq);

/// Validates and fills L_basis / quot; throws InvalidSequence with the report text on failure.
ToriSequence make_sequence(IntMatrix iota);

}  // namespace hmx::lattice
