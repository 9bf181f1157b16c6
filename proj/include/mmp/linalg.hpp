#pragma once

// Lattice vectors, exact rational matrices and the elimination routines the
// toric and surface backends share.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mmp/rational.hpp"

namespace mmp {

using RationalVector = std::vector<Rational>;

/// Integral point of a lattice Z^rank. Ordering is lexicographic.
class LatticeVector {
 public:
  LatticeVector() = default;
  explicit LatticeVector(std::vector<std::int64_t> coords);
  LatticeVector(std::initializer_list<std::int64_t> coords);

  std::size_t rank() const { return coords_.size(); }
  std::int64_t operator[](std::size_t i) const { return coords_[i]; }
  const std::vector<std::int64_t>& coords() const { return coords_; }

  bool is_zero() const;
  RationalVector to_rational() const;
  std::string str() const;

  LatticeVector operator-() const;
  friend LatticeVector operator+(const LatticeVector& a, const LatticeVector& b);
  friend LatticeVector operator-(const LatticeVector& a, const LatticeVector& b);
  friend LatticeVector operator*(std::int64_t k, const LatticeVector& v);

  friend bool operator==(const LatticeVector&, const LatticeVector&) = default;
  friend std::strong_ordering operator<=>(const LatticeVector& a, const LatticeVector& b) {
    return a.coords_ <=> b.coords_;
  }

 private:
  std::vector<std::int64_t> coords_;
};

/// Divides v by the gcd of its coordinates. Throws ValidationError on zero.
LatticeVector primitivize(const LatticeVector& v);
bool is_primitive(const LatticeVector& v);

Rational dot(std::span<const Rational> a, std::span<const Rational> b);
Rational dot(const LatticeVector& a, std::span<const Rational> b);

/// Scales a nonzero rational vector to the primitive integral vector on the
/// same ray (positive multiple).
std::vector<BigInt> primitive_integral(std::span<const Rational> v);

/// True iff b = c * a for some rational c > 0.
bool positively_proportional(std::span<const Rational> a, std::span<const Rational> b);

/// Dense row-major matrix over Q.
class RationalMatrix {
 public:
  RationalMatrix() = default;
  RationalMatrix(std::size_t rows, std::size_t cols);
  RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows);
  static RationalMatrix identity(std::size_t n);
  static RationalMatrix from_rows(const std::vector<RationalVector>& rows);
  static RationalMatrix from_lattice_rows(std::span<const LatticeVector> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  Rational& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  const Rational& at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  RationalVector row(std::size_t r) const;
  RationalVector column(std::size_t c) const;
  RationalMatrix transpose() const;
  RationalVector operator*(std::span<const Rational> v) const;
  RationalMatrix operator*(const RationalMatrix& rhs) const;

  bool is_square() const { return rows_ == cols_; }
  bool is_symmetric() const;
  /// Bilinear form v^T M w.
  Rational pair(std::span<const Rational> v, std::span<const Rational> w) const;

  friend bool operator==(const RationalMatrix&, const RationalMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<Rational> data_;
};

struct UniqueSolution {
  RationalVector x;
};
struct NoSolution {};
struct Underdetermined {
  RationalVector particular;        // free variables set to zero
  std::vector<RationalVector> kernel;  // basis of the null space of A
};
using LinearSolution = std::variant<UniqueSolution, NoSolution, Underdetermined>;

/// Solves A x = b by fraction-free (Bareiss) elimination on the row-integerised
/// augmented matrix, followed by exact back substitution.
LinearSolution solve_linear(const RationalMatrix& a, std::span<const Rational> b);

/// Convenience wrapper: returns the unique solution or throws EngineError.
RationalVector solve_unique(const RationalMatrix& a, std::span<const Rational> b);

std::size_t rank(const RationalMatrix& a);
Rational determinant(const RationalMatrix& a);
std::vector<RationalVector> kernel_basis(const RationalMatrix& a);
RationalMatrix inverse(const RationalMatrix& a);

/// Leading principal minors det(A[0..k,0..k]) for k = 1..n.
std::vector<Rational> leading_principal_minors(const RationalMatrix& a);

/// Sylvester's criterion applied to -Q. Throws ValidationError if Q is not
/// square and symmetric.
bool is_negative_definite(const RationalMatrix& q);

// ---- integer lattice routines ----

using IntMatrix = std::vector<std::vector<BigInt>>;

struct ColumnHermite {
  IntMatrix h;  // A * U, lower column-echelon
  IntMatrix u;  // unimodular d x d
  std::size_t rank = 0;
};

/// Column-style Hermite reduction of an m x d integer matrix: finds unimodular
/// U with A U = [L | 0], L lower-triangular with positive pivots.
ColumnHermite column_hermite(const IntMatrix& a);

/// Index of the sublattice spanned by the given independent vectors inside the
/// saturated lattice of their span (gcd of maximal minors). Throws
/// ValidationError if the vectors are dependent.
BigInt lattice_index(std::span<const LatticeVector> vectors);

/// Z-basis of the integer vectors x with A x = 0 (A given as rational rows).
std::vector<LatticeVector> integer_kernel_basis(const RationalMatrix& a);

/// Canonical Hermite normal form (row style) of the lattice spanned by the
/// rows; zero rows dropped.
IntMatrix row_hermite_normal_form(IntMatrix rows);

// ---- exact cone membership ----

/// Nonnegative coefficients lambda with sum lambda_i g_i = v, if any. Decided
/// by a phase-one simplex with Bland's rule over Q.
std::optional<RationalVector> cone_combination(std::span<const RationalVector> generators,
                                              std::span<const Rational> v);
bool cone_contains(std::span<const RationalVector> generators, std::span<const Rational> v);

}  // namespace mmp
