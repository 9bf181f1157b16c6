#include "mmp/polytope.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "mmp/errors.hpp"

namespace mmp {

namespace {

// Calls fn on every k-subset of {0..n-1} in lexicographic order.
void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace

RationalPolytope::RationalPolytope(std::size_t dim, std::vector<Halfspace> halfspaces)
    : dim_(dim), halfspaces_(std::move(halfspaces)) {
  for (const auto& h : halfspaces_) {
    if (h.normal.size() != dim_) throw ValidationError("halfspace dimension does not match polytope");
  }
}

RationalPolytope RationalPolytope::hull_of(std::size_t dim, const std::vector<RationalVector>& points) {
  if (points.empty()) throw ValidationError("hull of no points");
  std::vector<RationalVector> diffs;
  for (const auto& p : points) {
    RationalVector d(dim);
    for (std::size_t i = 0; i < dim; ++i) d[i] = p[i] - points[0][i];
    diffs.push_back(std::move(d));
  }
  if (rank(RationalMatrix::from_rows(diffs)) != dim) throw ValidationError("hull points are not full-dimensional");

  std::set<std::vector<BigInt>> seen;
  std::vector<Halfspace> facets;
  for_each_subset(points.size(), dim, [&](const std::vector<std::size_t>& idx) {
    // hyperplane a.x = b through the chosen points: solve for (a, -b) in the
    // kernel of rows [p, 1]
    std::vector<RationalVector> rows;
    for (auto i : idx) {
      RationalVector r = points[i];
      r.push_back(1);
      rows.push_back(std::move(r));
    }
    auto ker = kernel_basis(RationalMatrix::from_rows(rows));
    if (ker.size() != 1) return;
    RationalVector a(ker[0].begin(), ker[0].begin() + static_cast<std::ptrdiff_t>(dim));
    if (std::all_of(a.begin(), a.end(), [](const Rational& x) { return x.is_zero(); })) return;
    Rational b = -ker[0][dim];
    int side = 0;
    for (const auto& p : points) {
      int s = (dot(a, p) - b).sign();
      if (s == 0) continue;
      if (side == 0) side = s;
      if (s != side) return;
    }
    if (side > 0) {
      for (auto& x : a) x = -x;
      b = -b;
    }
    RationalVector key = a;
    key.push_back(b);
    auto prim = primitive_integral(key);
    if (!seen.insert(prim).second) return;
    facets.push_back({std::move(a), std::move(b)});
  });
  return RationalPolytope(dim, std::move(facets));
}

bool RationalPolytope::contains(std::span<const Rational> x) const {
  return std::all_of(halfspaces_.begin(), halfspaces_.end(), [&](const Halfspace& h) { return h.satisfied_by(x); });
}

bool RationalPolytope::is_bounded() const {
  if (dim_ == 0) return true;
  std::vector<RationalVector> normals;
  for (const auto& h : halfspaces_) normals.push_back(h.normal);
  if (normals.empty()) return false;
  if (rank(RationalMatrix::from_rows(normals)) < dim_) return false;
  // The recession cone {y : n.y <= 0} is pointed; it is nonzero iff it has an
  // extreme ray, which lies on dim-1 independent hyperplanes n.y = 0.
  bool unbounded = false;
  auto check_direction = [&](const RationalVector& y) {
    for (int s : {1, -1}) {
      bool ok = true;
      for (const auto& n : normals) {
        Rational v = dot(n, y);
        if ((s > 0 ? v : -v).sign() > 0) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  };
  if (dim_ == 1) return !check_direction(RationalVector{Rational(1)});
  for_each_subset(normals.size(), dim_ - 1, [&](const std::vector<std::size_t>& idx) {
    if (unbounded) return;
    std::vector<RationalVector> rows;
    for (auto i : idx) rows.push_back(normals[i]);
    auto ker = kernel_basis(RationalMatrix::from_rows(rows));
    if (ker.size() != 1) return;
    if (check_direction(ker[0])) unbounded = true;
  });
  return !unbounded;
}

std::vector<RationalVector> RationalPolytope::vertices() const {
  std::set<RationalVector> found;
  if (dim_ == 0) {
    if (contains(RationalVector{})) found.insert(RationalVector{});
    return {found.begin(), found.end()};
  }
  for_each_subset(halfspaces_.size(), dim_, [&](const std::vector<std::size_t>& idx) {
    RationalMatrix a(dim_, dim_);
    RationalVector b(dim_);
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t c = 0; c < dim_; ++c) a.at(r, c) = halfspaces_[idx[r]].normal[c];
      b[r] = halfspaces_[idx[r]].bound;
    }
    auto sol = solve_linear(a, b);
    auto* unique = std::get_if<UniqueSolution>(&sol);
    if (!unique) return;
    if (contains(unique->x)) found.insert(std::move(unique->x));
  });
  return {found.begin(), found.end()};
}

int RationalPolytope::dimension() const {
  if (!is_bounded()) throw ValidationError("dimension requires bounded polytope");
  auto verts = vertices();
  if (verts.empty()) return -1;
  if (verts.size() == 1) return 0;
  std::vector<RationalVector> diffs;
  for (std::size_t i = 1; i < verts.size(); ++i) {
    RationalVector d(dim_);
    for (std::size_t c = 0; c < dim_; ++c) d[c] = verts[i][c] - verts[0][c];
    diffs.push_back(std::move(d));
  }
  return static_cast<int>(rank(RationalMatrix::from_rows(diffs)));
}

namespace {

// Integral inequality a.x <= b over the first a.size() coordinates.
struct IntHalfspace {
  std::vector<BigInt> a;
  BigInt b;
  friend bool operator<(const IntHalfspace& x, const IntHalfspace& y) {
    if (x.a != y.a) return x.a < y.a;
    return x.b < y.b;
  }
};

IntHalfspace integerise(const Halfspace& h) {
  BigInt den = h.bound.denominator();
  for (const auto& x : h.normal) den = lcm(den, x.denominator());
  IntHalfspace ih;
  for (const auto& x : h.normal) ih.a.push_back(x.numerator() * (den / x.denominator()));
  ih.b = h.bound.numerator() * (den / h.bound.denominator());
  return ih;
}

// Divides by the content of a and rounds b down; exact on integral points.
void tighten(IntHalfspace& h) {
  BigInt g = 0;
  for (const auto& x : h.a) g = gcd(g, x);
  if (g <= 1) return;
  for (auto& x : h.a) x /= g;
  mpz_fdiv_q(h.b.get_mpz_t(), h.b.get_mpz_t(), g.get_mpz_t());
}

// Fourier-Motzkin: inequalities on the first k-1 coordinates implied by the
// given inequalities on the first k.
std::vector<IntHalfspace> eliminate_last(const std::vector<IntHalfspace>& hs) {
  const std::size_t k = hs.front().a.size();
  std::set<IntHalfspace> out;
  std::vector<const IntHalfspace*> pos, neg;
  for (const auto& h : hs) {
    const int s = sgn(h.a[k - 1]);
    if (s > 0) {
      pos.push_back(&h);
    } else if (s < 0) {
      neg.push_back(&h);
    } else {
      IntHalfspace r{std::vector<BigInt>(h.a.begin(), h.a.end() - 1), h.b};
      tighten(r);
      out.insert(std::move(r));
    }
  }
  for (const auto* p : pos)
    for (const auto* n : neg) {
      const BigInt wp = -n->a[k - 1], wn = p->a[k - 1];
      IntHalfspace r;
      for (std::size_t c = 0; c + 1 < k; ++c) r.a.push_back(wp * p->a[c] + wn * n->a[c]);
      r.b = wp * p->b + wn * n->b;
      tighten(r);
      out.insert(std::move(r));
    }
  return {out.begin(), out.end()};
}

// Walks the integral points of a bounded polytope coordinate by coordinate.
// Each coordinate ranges over an interval cut out by the projection of the
// polytope onto the coordinates fixed so far; visit(prefix, lo, hi) receives
// every nonempty interval of the last coordinate.
template <typename Visitor>
void scan_lattice(const RationalPolytope& p, Visitor&& visit) {
  if (!p.is_bounded()) throw ValidationError("enumeration requires bounded polytope");
  if (p.vertices().empty()) return;
  const std::size_t d = p.ambient_dim();
  if (d == 0) {
    visit(std::vector<std::int64_t>{}, std::int64_t{0}, std::int64_t{0});
    return;
  }
  // levels[k] constrains the first k coordinates
  std::vector<std::vector<IntHalfspace>> levels(d + 1);
  for (const auto& h : p.halfspaces()) {
    auto ih = integerise(h);
    tighten(ih);
    levels[d].push_back(std::move(ih));
  }
  for (std::size_t k = d; k > 1; --k) levels[k - 1] = eliminate_last(levels[k]);

  std::vector<std::int64_t> x;
  BigInt rest, q;
  // Interval of coordinate k given x[0..k-1]; nullopt when empty.
  auto interval = [&](std::size_t k) -> std::optional<std::pair<std::int64_t, std::int64_t>> {
    std::optional<BigInt> lo, hi;
    for (const auto& h : levels[k + 1]) {
      rest = h.b;
      for (std::size_t c = 0; c < k; ++c)
        if (h.a[c] != 0 && x[c] != 0) rest -= h.a[c] * static_cast<long>(x[c]);
      const BigInt& a = h.a[k];
      if (a == 0) {
        if (rest < 0) return std::nullopt;
      } else if (a > 0) {
        mpz_fdiv_q(q.get_mpz_t(), rest.get_mpz_t(), a.get_mpz_t());
        if (!hi || q < *hi) hi = q;
      } else {
        mpz_cdiv_q(q.get_mpz_t(), rest.get_mpz_t(), a.get_mpz_t());
        if (!lo || q > *lo) lo = q;
      }
    }
    if (!lo || !hi) throw EngineError("internal: unbounded projection of a bounded polytope");
    if (*lo > *hi) return std::nullopt;
    return std::make_pair(to_int64(*lo), to_int64(*hi));
  };
  auto walk = [&](auto&& self, std::size_t k) -> void {
    auto range = interval(k);
    if (!range) return;
    if (k + 1 == d) {
      visit(x, range->first, range->second);
      return;
    }
    for (std::int64_t t = range->first; t <= range->second; ++t) {
      x.push_back(t);
      self(self, k + 1);
      x.pop_back();
    }
  };
  walk(walk, 0);
}

}  // namespace

std::vector<LatticeVector> lattice_points(const RationalPolytope& p) {
  std::vector<LatticeVector> out;
  scan_lattice(p, [&](const std::vector<std::int64_t>& prefix, std::int64_t first, std::int64_t final) {
    if (p.ambient_dim() == 0) {
      out.emplace_back(std::vector<std::int64_t>{});
      return;
    }
    std::vector<std::int64_t> x = prefix;
    x.push_back(first);
    for (std::int64_t t = first; t <= final; ++t) {
      x.back() = t;
      out.emplace_back(x);
    }
  });
  return out;
}

std::size_t count_lattice_points(const RationalPolytope& p) {
  std::size_t n = 0;
  scan_lattice(p, [&](const std::vector<std::int64_t>&, std::int64_t first, std::int64_t final) {
    n += static_cast<std::size_t>(final - first + 1);
  });
  return n;
}

}  // namespace mmp
