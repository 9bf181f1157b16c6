#include "mmp/linalg.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>
#include <utility>

#include "mmp/errors.hpp"

namespace mmp {

// ---------------------------------------------------------------------------
// LatticeVector

LatticeVector::LatticeVector(std::vector<std::int64_t> coords) : coords_(std::move(coords)) {}

LatticeVector::LatticeVector(std::initializer_list<std::int64_t> coords) : coords_(coords) {}

bool LatticeVector::is_zero() const {
  return std::all_of(coords_.begin(), coords_.end(), [](std::int64_t c) { return c == 0; });
}

RationalVector LatticeVector::to_rational() const {
  RationalVector out;
  out.reserve(coords_.size());
  for (auto c : coords_) out.emplace_back(static_cast<long long>(c));
  return out;
}

std::string LatticeVector::str() const {
  std::ostringstream os;
  os << '(';
  for (std::size_t i = 0; i < coords_.size(); ++i) {
    if (i) os << ',';
    os << coords_[i];
  }
  os << ')';
  return os.str();
}

LatticeVector LatticeVector::operator-() const {
  std::vector<std::int64_t> out(coords_.size());
  std::transform(coords_.begin(), coords_.end(), out.begin(), [](auto c) { return -c; });
  return LatticeVector(std::move(out));
}

LatticeVector operator+(const LatticeVector& a, const LatticeVector& b) {
  if (a.rank() != b.rank()) throw ValidationError("lattice vectors of different rank");
  std::vector<std::int64_t> out(a.rank());
  for (std::size_t i = 0; i < a.rank(); ++i) out[i] = a[i] + b[i];
  return LatticeVector(std::move(out));
}

LatticeVector operator-(const LatticeVector& a, const LatticeVector& b) { return a + (-b); }

LatticeVector operator*(std::int64_t k, const LatticeVector& v) {
  std::vector<std::int64_t> out(v.rank());
  for (std::size_t i = 0; i < v.rank(); ++i) out[i] = k * v[i];
  return LatticeVector(std::move(out));
}

LatticeVector primitivize(const LatticeVector& v) {
  if (v.is_zero()) throw ValidationError("zero vector has no primitive representative");
  std::int64_t g = 0;
  for (auto c : v.coords()) g = std::gcd(g, c < 0 ? -c : c);
  std::vector<std::int64_t> out(v.rank());
  for (std::size_t i = 0; i < v.rank(); ++i) out[i] = v[i] / g;
  return LatticeVector(std::move(out));
}

bool is_primitive(const LatticeVector& v) { return !v.is_zero() && primitivize(v) == v; }

Rational dot(std::span<const Rational> a, std::span<const Rational> b) {
  if (a.size() != b.size()) throw ValidationError("dot product of vectors with different length");
  Rational s;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

Rational dot(const LatticeVector& a, std::span<const Rational> b) {
  if (a.rank() != b.size()) throw ValidationError("dot product of vectors with different length");
  Rational s;
  for (std::size_t i = 0; i < b.size(); ++i) {
    if (a[i] != 0) s += Rational(static_cast<long long>(a[i])) * b[i];
  }
  return s;
}

std::vector<BigInt> primitive_integral(std::span<const Rational> v) {
  BigInt den = 1;
  for (const auto& x : v) den = lcm(den, x.denominator());
  std::vector<BigInt> out;
  out.reserve(v.size());
  BigInt g = 0;
  for (const auto& x : v) {
    BigInt n = x.numerator() * (den / x.denominator());
    g = gcd(g, n);
    out.push_back(std::move(n));
  }
  if (g == 0) throw ValidationError("zero vector has no primitive representative");
  for (auto& n : out) n /= g;
  return out;
}

bool positively_proportional(std::span<const Rational> a, std::span<const Rational> b) {
  if (a.size() != b.size()) return false;
  std::optional<Rational> ratio;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a[i].is_zero() != b[i].is_zero()) return false;
    if (a[i].is_zero()) continue;
    Rational r = b[i] / a[i];
    if (r.sign() <= 0) return false;
    if (ratio && *ratio != r) return false;
    ratio = r;
  }
  return ratio.has_value();
}

// ---------------------------------------------------------------------------
// RationalMatrix

RationalMatrix::RationalMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols) {}

RationalMatrix::RationalMatrix(std::initializer_list<std::initializer_list<Rational>> rows) {
  rows_ = rows.size();
  cols_ = rows_ ? rows.begin()->size() : 0;
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw ValidationError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

RationalMatrix RationalMatrix::identity(std::size_t n) {
  RationalMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
  return m;
}

RationalMatrix RationalMatrix::from_rows(const std::vector<RationalVector>& rows) {
  std::size_t cols = rows.empty() ? 0 : rows.front().size();
  RationalMatrix m(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw ValidationError("ragged matrix rows");
    for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rows[r][c];
  }
  return m;
}

RationalMatrix RationalMatrix::from_lattice_rows(std::span<const LatticeVector> rows) {
  std::vector<RationalVector> rr;
  rr.reserve(rows.size());
  for (const auto& v : rows) rr.push_back(v.to_rational());
  return from_rows(rr);
}

RationalVector RationalMatrix::row(std::size_t r) const {
  return RationalVector(data_.begin() + static_cast<std::ptrdiff_t>(r * cols_),
                        data_.begin() + static_cast<std::ptrdiff_t>((r + 1) * cols_));
}

RationalVector RationalMatrix::column(std::size_t c) const {
  RationalVector out(rows_);
  for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
  return out;
}

RationalMatrix RationalMatrix::transpose() const {
  RationalMatrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t.at(c, r) = at(r, c);
  return t;
}

namespace {

// Accumulates sum_c row[c] * v[c] in place; avoids a heap round trip per term.
void accumulate_row(mpq_class& acc, mpq_class& term, const Rational* row, std::span<const Rational> v) {
  acc = 0;
  for (std::size_t c = 0; c < v.size(); ++c) {
    if (row[c].is_zero() || v[c].is_zero()) continue;
    mpq_mul(term.get_mpq_t(), row[c].raw().get_mpq_t(), v[c].raw().get_mpq_t());
    mpq_add(acc.get_mpq_t(), acc.get_mpq_t(), term.get_mpq_t());
  }
}

Rational from_mpq(const mpq_class& q) { return Rational(BigInt(q.get_num()), BigInt(q.get_den())); }

}  // namespace

RationalVector RationalMatrix::operator*(std::span<const Rational> v) const {
  if (v.size() != cols_) throw ValidationError("matrix-vector size mismatch");
  RationalVector out(rows_);
  mpq_class acc, term;
  for (std::size_t r = 0; r < rows_; ++r) {
    accumulate_row(acc, term, &data_[r * cols_], v);
    out[r] = from_mpq(acc);
  }
  return out;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const {
  if (cols_ != rhs.rows_) throw ValidationError("matrix product size mismatch");
  RationalMatrix out(rows_, rhs.cols_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t k = 0; k < cols_; ++k) {
      if (at(r, k).is_zero()) continue;
      for (std::size_t c = 0; c < rhs.cols_; ++c) out.at(r, c) += at(r, k) * rhs.at(k, c);
    }
  return out;
}

bool RationalMatrix::is_symmetric() const {
  if (!is_square()) return false;
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = r + 1; c < cols_; ++c)
      if (at(r, c) != at(c, r)) return false;
  return true;
}

Rational RationalMatrix::pair(std::span<const Rational> v, std::span<const Rational> w) const {
  if (v.size() != rows_ || w.size() != cols_) throw ValidationError("bilinear form size mismatch");
  mpq_class s(0), inner, term;
  for (std::size_t r = 0; r < rows_; ++r) {
    if (v[r].is_zero()) continue;
    accumulate_row(inner, term, &data_[r * cols_], w);
    mpq_mul(term.get_mpq_t(), v[r].raw().get_mpq_t(), inner.get_mpq_t());
    mpq_add(s.get_mpq_t(), s.get_mpq_t(), term.get_mpq_t());
  }
  return from_mpq(s);
}

// ---------------------------------------------------------------------------
// Fraction-free elimination

namespace {

struct Echelon {
  IntMatrix m;                       // eliminated integer matrix
  std::vector<std::size_t> pivots;   // pivot column per pivot row
  int swaps = 0;
};

void exact_divide(BigInt& value, const BigInt& divisor) {
  BigInt q, rem;
  mpz_tdiv_qr(q.get_mpz_t(), rem.get_mpz_t(), value.get_mpz_t(), divisor.get_mpz_t());
  if (rem != 0) throw EngineError("internal: inexact Bareiss division");
  value = std::move(q);
}

// Bareiss elimination; pivots are searched only in the first `pivot_cols`
// columns, the remaining columns are carried along.
Echelon bareiss(IntMatrix m, std::size_t pivot_cols) {
  Echelon e;
  const std::size_t rows = m.size();
  const std::size_t cols = rows ? m[0].size() : 0;
  BigInt prev = 1;
  std::size_t r = 0;
  for (std::size_t c = 0; c < pivot_cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    if (p != r) {
      std::swap(m[p], m[r]);
      ++e.swaps;
    }
    for (std::size_t i = r + 1; i < rows; ++i) {
      for (std::size_t j = c + 1; j < cols; ++j) {
        BigInt v = m[r][c] * m[i][j] - m[i][c] * m[r][j];
        exact_divide(v, prev);
        m[i][j] = std::move(v);
      }
      m[i][c] = 0;
    }
    prev = m[r][c];
    e.pivots.push_back(c);
    ++r;
  }
  // Rows below the last pivot carry Bareiss-scaled values; only their zero
  // pattern is used by callers.
  e.m = std::move(m);
  return e;
}

// Integerises each row of [A | extra] by the lcm of its denominators.
IntMatrix integerise(const RationalMatrix& a, std::span<const Rational> extra, std::vector<BigInt>* scales) {
  IntMatrix out(a.rows());
  for (std::size_t r = 0; r < a.rows(); ++r) {
    BigInt den = 1;
    for (std::size_t c = 0; c < a.cols(); ++c) den = lcm(den, a.at(r, c).denominator());
    if (!extra.empty()) den = lcm(den, extra[r].denominator());
    auto& row = out[r];
    row.reserve(a.cols() + (extra.empty() ? 0 : 1));
    for (std::size_t c = 0; c < a.cols(); ++c)
      row.push_back(a.at(r, c).numerator() * (den / a.at(r, c).denominator()));
    if (!extra.empty()) row.push_back(extra[r].numerator() * (den / extra[r].denominator()));
    if (scales) scales->push_back(den);
  }
  return out;
}

RationalVector back_substitute(const Echelon& e, std::size_t unknowns, bool has_rhs,
                               const RationalVector& free_values) {
  RationalVector x = free_values;
  for (std::size_t k = e.pivots.size(); k-- > 0;) {
    const auto& row = e.m[k];
    const std::size_t pc = e.pivots[k];
    Rational s = has_rhs ? Rational(row[unknowns]) : Rational(0);
    for (std::size_t j = pc + 1; j < unknowns; ++j) {
      if (row[j] != 0 && !x[j].is_zero()) s -= Rational(row[j]) * x[j];
    }
    x[pc] = s / Rational(row[pc]);
  }
  return x;
}

}  // namespace

LinearSolution solve_linear(const RationalMatrix& a, std::span<const Rational> b) {
  if (b.size() != a.rows()) throw ValidationError("right-hand side length does not match matrix rows");
  const std::size_t n = a.cols();
  Echelon e = bareiss(integerise(a, b, nullptr), n);
  for (std::size_t r = e.pivots.size(); r < a.rows(); ++r) {
    if (e.m[r][n] != 0) return NoSolution{};
  }
  RationalVector zeros(n);
  RationalVector particular = back_substitute(e, n, true, zeros);
  if (e.pivots.size() == n) return UniqueSolution{std::move(particular)};

  Underdetermined u;
  u.particular = std::move(particular);
  std::vector<bool> is_pivot(n, false);
  for (auto p : e.pivots) is_pivot[p] = true;
  for (std::size_t f = 0; f < n; ++f) {
    if (is_pivot[f]) continue;
    RationalVector seed(n);
    seed[f] = 1;
    u.kernel.push_back(back_substitute(e, n, false, seed));
  }
  return u;
}

RationalVector solve_unique(const RationalMatrix& a, std::span<const Rational> b) {
  auto sol = solve_linear(a, b);
  if (auto* s = std::get_if<UniqueSolution>(&sol)) return std::move(s->x);
  if (std::holds_alternative<NoSolution>(sol)) throw EngineError("linear system has no solution");
  throw EngineError("linear system is underdetermined");
}

std::size_t rank(const RationalMatrix& a) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return bareiss(integerise(a, {}, nullptr), a.cols()).pivots.size();
}

Rational determinant(const RationalMatrix& a) {
  if (!a.is_square()) throw ValidationError("determinant of non-square matrix");
  const std::size_t n = a.rows();
  if (n == 0) return 1;
  std::vector<BigInt> scales;
  Echelon e = bareiss(integerise(a, {}, &scales), n);
  if (e.pivots.size() < n) return 0;
  Rational det(e.m[n - 1][n - 1]);
  if (e.swaps % 2) det = -det;
  for (const auto& s : scales) det /= Rational(s);
  return det;
}

std::vector<RationalVector> kernel_basis(const RationalMatrix& a) {
  RationalVector zero(a.rows());
  auto sol = solve_linear(a, zero);
  if (auto* u = std::get_if<Underdetermined>(&sol)) return u->kernel;
  return {};
}

RationalMatrix inverse(const RationalMatrix& a) {
  if (!a.is_square()) throw ValidationError("inverse of non-square matrix");
  const std::size_t n = a.rows();
  RationalMatrix inv(n, n);
  for (std::size_t c = 0; c < n; ++c) {
    RationalVector e(n);
    e[c] = 1;
    auto col = solve_unique(a, e);
    for (std::size_t r = 0; r < n; ++r) inv.at(r, c) = col[r];
  }
  return inv;
}

std::vector<Rational> leading_principal_minors(const RationalMatrix& a) {
  if (!a.is_square()) throw ValidationError("principal minors of non-square matrix");
  std::vector<Rational> out;
  for (std::size_t k = 1; k <= a.rows(); ++k) {
    RationalMatrix sub(k, k);
    for (std::size_t r = 0; r < k; ++r)
      for (std::size_t c = 0; c < k; ++c) sub.at(r, c) = a.at(r, c);
    out.push_back(determinant(sub));
  }
  return out;
}

bool is_negative_definite(const RationalMatrix& q) {
  if (!q.is_symmetric()) throw ValidationError("negative definiteness requires a symmetric matrix");
  auto minors = leading_principal_minors(q);
  for (std::size_t k = 0; k < minors.size(); ++k) {
    // minor of size k+1 must have sign (-1)^(k+1)
    int want = (k % 2 == 0) ? -1 : 1;
    if (minors[k].sign() != want) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------
// Integer lattices

ColumnHermite column_hermite(const IntMatrix& a) {
  ColumnHermite out;
  out.h = a;
  const std::size_t m = a.size();
  const std::size_t d = m ? a[0].size() : 0;
  out.u.assign(d, std::vector<BigInt>(d, 0));
  for (std::size_t i = 0; i < d; ++i) out.u[i][i] = 1;

  auto column_op = [&](std::size_t k, std::size_t j, const BigInt& s, const BigInt& t, const BigInt& p,
                       const BigInt& q) {
    // col_k <- s col_k + t col_j ; col_j <- p col_k + q col_j (old values)
    auto apply = [&](IntMatrix& mat) {
      for (auto& row : mat) {
        BigInt ck = row[k], cj = row[j];
        row[k] = s * ck + t * cj;
        row[j] = p * ck + q * cj;
      }
    };
    apply(out.h);
    apply(out.u);
  };

  std::size_t k = 0;
  for (std::size_t i = 0; i < m && k < d; ++i) {
    for (std::size_t j = k + 1; j < d; ++j) {
      const BigInt a_ik = out.h[i][k];
      const BigInt a_ij = out.h[i][j];
      if (a_ij == 0) continue;
      BigInt g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a_ik.get_mpz_t(), a_ij.get_mpz_t());
      column_op(k, j, s, t, BigInt(-a_ij / g), BigInt(a_ik / g));
    }
    if (out.h[i][k] == 0) continue;
    if (out.h[i][k] < 0) column_op(k, k, BigInt(-1), BigInt(0), BigInt(0), BigInt(-1));
    ++k;
  }
  out.rank = k;
  return out;
}

BigInt lattice_index(std::span<const LatticeVector> vectors) {
  if (vectors.empty()) return 1;
  IntMatrix a;
  for (const auto& v : vectors) {
    std::vector<BigInt> row;
    for (auto c : v.coords()) row.emplace_back(static_cast<long>(c));
    a.push_back(std::move(row));
  }
  auto hnf = column_hermite(a);
  if (hnf.rank < vectors.size()) throw ValidationError("lattice index of dependent vectors");
  BigInt index = 1;
  for (std::size_t i = 0, k = 0; i < a.size(); ++i) {
    // pivot of row i sits in column k when row i contributed a pivot
    if (k < hnf.rank && hnf.h[i][k] != 0) {
      index *= hnf.h[i][k];
      ++k;
    }
  }
  return index;
}

std::vector<LatticeVector> integer_kernel_basis(const RationalMatrix& a) {
  const std::size_t d = a.cols();
  IntMatrix m = integerise(a, {}, nullptr);
  if (m.empty()) {
    std::vector<LatticeVector> basis;
    for (std::size_t i = 0; i < d; ++i) {
      std::vector<std::int64_t> e(d, 0);
      e[i] = 1;
      basis.emplace_back(std::move(e));
    }
    return basis;
  }
  auto hnf = column_hermite(m);
  std::vector<LatticeVector> basis;
  for (std::size_t j = hnf.rank; j < d; ++j) {
    std::vector<std::int64_t> v(d);
    for (std::size_t i = 0; i < d; ++i) v[i] = to_int64(hnf.u[i][j]);
    basis.emplace_back(std::move(v));
  }
  return basis;
}

IntMatrix row_hermite_normal_form(IntMatrix rows) {
  if (rows.empty()) return rows;
  const std::size_t cols = rows[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows.size(); ++c) {
    // gcd-combine rows r.. in column c
    for (std::size_t i = r + 1; i < rows.size(); ++i) {
      if (rows[i][c] == 0) continue;
      BigInt g, s, t;
      mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), rows[r][c].get_mpz_t(), rows[i][c].get_mpz_t());
      BigInt p = -rows[i][c] / g, q = rows[r][c] / g;
      for (std::size_t j = 0; j < cols; ++j) {
        BigInt a = rows[r][j], b = rows[i][j];
        rows[r][j] = s * a + t * b;
        rows[i][j] = p * a + q * b;
      }
    }
    if (rows[r][c] == 0) continue;
    if (rows[r][c] < 0)
      for (auto& x : rows[r]) x = -x;
    for (std::size_t i = 0; i < r; ++i) {
      BigInt f;
      mpz_fdiv_q(f.get_mpz_t(), rows[i][c].get_mpz_t(), rows[r][c].get_mpz_t());
      if (f == 0) continue;
      for (std::size_t j = 0; j < cols; ++j) rows[i][j] -= f * rows[r][j];
    }
    ++r;
  }
  rows.resize(r);
  return rows;
}

// ---------------------------------------------------------------------------
// Cone membership (phase-one simplex, Bland's rule)

std::optional<RationalVector> cone_combination(std::span<const RationalVector> generators,
                                              std::span<const Rational> v) {
  const std::size_t m = v.size();
  const std::size_t n = generators.size();
  for (const auto& g : generators)
    if (g.size() != m) throw ValidationError("cone generator dimension mismatch");

  // Columns: n structural, m artificial, 1 rhs.
  const std::size_t width = n + m + 1;
  std::vector<RationalVector> t(m, RationalVector(width));
  for (std::size_t i = 0; i < m; ++i) {
    const bool flip = v[i].sign() < 0;
    for (std::size_t j = 0; j < n; ++j) t[i][j] = flip ? -generators[j][i] : generators[j][i];
    t[i][n + i] = 1;
    t[i][n + m] = flip ? -v[i] : v[i];
  }
  RationalVector cost(width);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) cost[j] -= t[i][j];
  for (std::size_t i = 0; i < m; ++i) cost[n + m] -= t[i][n + m];
  std::vector<std::size_t> basis(m);
  std::iota(basis.begin(), basis.end(), n);

  for (;;) {
    std::size_t enter = width;
    for (std::size_t j = 0; j < n + m; ++j) {
      if (cost[j].sign() < 0) {
        enter = j;
        break;
      }
    }
    if (enter == width) break;
    std::size_t leave = m;
    Rational best;
    for (std::size_t i = 0; i < m; ++i) {
      if (t[i][enter].sign() <= 0) continue;
      Rational ratio = t[i][n + m] / t[i][enter];
      if (leave == m || ratio < best || (ratio == best && basis[i] < basis[leave])) {
        leave = i;
        best = std::move(ratio);
      }
    }
    if (leave == m) break;  // unbounded direction cannot occur in phase one
    Rational piv = t[leave][enter];
    for (auto& x : t[leave]) x /= piv;
    for (std::size_t i = 0; i < m; ++i) {
      if (i == leave || t[i][enter].is_zero()) continue;
      Rational f = t[i][enter];
      for (std::size_t j = 0; j < width; ++j)
        if (!t[leave][j].is_zero()) t[i][j] -= f * t[leave][j];
    }
    if (!cost[enter].is_zero()) {
      Rational f = cost[enter];
      for (std::size_t j = 0; j < width; ++j)
        if (!t[leave][j].is_zero()) cost[j] -= f * t[leave][j];
    }
    basis[leave] = enter;
  }
  if (!cost[n + m].is_zero()) return std::nullopt;
  RationalVector lambda(n);
  for (std::size_t i = 0; i < m; ++i)
    if (basis[i] < n) lambda[basis[i]] = t[i][n + m];
  return lambda;
}

bool cone_contains(std::span<const RationalVector> generators, std::span<const Rational> v) {
  return cone_combination(generators, v).has_value();
}

}  // namespace mmp
