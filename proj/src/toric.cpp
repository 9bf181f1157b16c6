#include "mmp/toric.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mmp/errors.hpp"

namespace mmp::toric {

namespace {

std::vector<RationalVector> as_rational(std::span<const LatticeVector> vs) {
  std::vector<RationalVector> out;
  out.reserve(vs.size());
  for (const auto& v : vs) out.push_back(v.to_rational());
  return out;
}

std::size_t span_rank(std::span<const LatticeVector> vs) {
  if (vs.empty()) return 0;
  return rank(RationalMatrix::from_lattice_rows(vs));
}

// Coordinates of v in the basis given by linearly independent rays (possibly
// spanning a proper subspace). nullopt if v is outside their span.
std::optional<RationalVector> coordinates_in(std::span<const LatticeVector> basis, const LatticeVector& v) {
  const std::size_t d = v.rank();
  RationalMatrix a(d, basis.size());
  for (std::size_t j = 0; j < basis.size(); ++j)
    for (std::size_t i = 0; i < d; ++i) a.at(i, j) = Rational(static_cast<long long>(basis[j][i]));
  auto sol = solve_linear(a, v.to_rational());
  if (auto* u = std::get_if<UniqueSolution>(&sol)) return u->x;
  return std::nullopt;
}

void for_each_subset(std::size_t n, std::size_t k, const std::function<void(const std::vector<std::size_t>&)>& fn) {
  if (k > n) return;
  std::vector<std::size_t> idx(k);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    fn(idx);
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == n - k + (i - 1)) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
}

// Facets of a full-dimensional cone as sorted lists of positions into `rays`.
std::vector<std::vector<std::size_t>> cone_facets(std::span<const LatticeVector> rays, std::size_t d) {
  std::set<std::vector<std::size_t>> facets;
  if (d == 1) {
    // the only facet of a half-line is the origin
    facets.insert({});
    return {facets.begin(), facets.end()};
  }
  for_each_subset(rays.size(), d - 1, [&](const std::vector<std::size_t>& idx) {
    std::vector<LatticeVector> sub;
    for (auto i : idx) sub.push_back(rays[i]);
    auto ker = kernel_basis(RationalMatrix::from_lattice_rows(sub));
    if (ker.size() != 1) return;
    int side = 0;
    std::vector<std::size_t> on;
    for (std::size_t i = 0; i < rays.size(); ++i) {
      int s = dot(rays[i], ker[0]).sign();
      if (s == 0) {
        on.push_back(i);
        continue;
      }
      if (side == 0) side = s;
      if (s != side) return;
    }
    facets.insert(on);
  });
  return {facets.begin(), facets.end()};
}

LatticeVector sum_of(std::span<const LatticeVector> vs, std::size_t rank) {
  LatticeVector s(std::vector<std::int64_t>(rank, 0));
  for (const auto& v : vs) s = s + v;
  return s;
}

struct UnionFind {
  std::vector<std::size_t> parent;
  explicit UnionFind(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
};

// Rays of `candidates` that are not in the cone of the others.
std::vector<LatticeVector> extremal_rays(const std::vector<LatticeVector>& candidates) {
  std::vector<LatticeVector> out;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    std::vector<RationalVector> others;
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (j != i) others.push_back(candidates[j].to_rational());
    if (!cone_contains(others, candidates[i].to_rational())) out.push_back(candidates[i]);
  }
  return out;
}

std::vector<LatticeVector> lineality_rays(const std::vector<LatticeVector>& rays) {
  auto gens = as_rational(rays);
  std::vector<LatticeVector> out;
  for (const auto& r : rays)
    if (cone_contains(gens, (-r).to_rational())) out.push_back(r);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Cone

Cone::Cone(std::vector<LatticeVector> rays, std::size_t ambient_rank) : rays_(std::move(rays)) {
  if (rays_.empty()) {
    if (ambient_rank > kMaxRank) throw ValidationError("ambient rank exceeds 4");
    ambient_ = ambient_rank;
    return;
  }
  ambient_ = rays_.front().rank();
  if (ambient_ == 0 || ambient_ > kMaxRank) throw ValidationError("ambient rank must be between 1 and 4");
  if (ambient_rank != 0 && ambient_rank != ambient_) throw ValidationError("ray rank does not match ambient rank");
  for (const auto& r : rays_) {
    if (r.rank() != ambient_) throw ValidationError("rays of a cone must share the ambient rank");
    if (!is_primitive(r)) throw ValidationError("ray " + r.str() + " is not primitive");
  }
  for (std::size_t i = 0; i < rays_.size(); ++i)
    for (std::size_t j = i + 1; j < rays_.size(); ++j)
      if (rays_[i] == rays_[j]) throw ValidationError("repeated ray " + rays_[i].str());
  auto gens = as_rational(rays_);
  for (const auto& r : rays_) {
    if (cone_contains(gens, (-r).to_rational()))
      throw ValidationError("cone is not strongly convex (contains the line through " + r.str() + ")");
  }
}

std::size_t Cone::dimension() const { return span_rank(rays_); }

bool Cone::contains(const LatticeVector& v) const {
  if (v.rank() != ambient_) return false;
  return cone_contains(as_rational(rays_), v.to_rational());
}

bool check_simplicial(const Cone& c) { return c.dimension() == c.rays().size(); }

bool check_regular(const Cone& c) {
  if (!check_simplicial(c)) return false;
  return lattice_index(c.rays()) == 1;
}

BigInt multiplicity(const Cone& c) {
  if (!check_simplicial(c)) throw ValidationError("multiplicity requires a simplicial cone");
  return lattice_index(c.rays());
}

RationalVector canonical_functional(const Cone& c) {
  if (!check_simplicial(c)) throw ValidationError("m not unique; supply simplicial cone");
  if (c.dimension() != c.ambient_rank()) throw ValidationError("m not unique; supply full-dimensional cone");
  RationalMatrix a = RationalMatrix::from_lattice_rows(c.rays());
  RationalVector ones(c.rays().size(), Rational(1));
  return solve_unique(a, ones);
}

namespace {

// {x in cone : m(x) <= height} for a simplicial full-dimensional cone.
RationalPolytope height_polytope(const Cone& c, const RationalVector& m, const Rational& height) {
  const std::size_t d = c.ambient_rank();
  // columns of B are the rays; rows of B^{-1} give the cone coordinates
  RationalMatrix b(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) b.at(i, j) = Rational(static_cast<long long>(c.rays()[j][i]));
  RationalMatrix binv = inverse(b);
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < d; ++i) {
    RationalVector row = binv.row(i);
    for (auto& x : row) x = -x;
    hs.push_back({std::move(row), Rational(0)});
  }
  hs.push_back({m, height});
  return RationalPolytope(d, std::move(hs));
}

}  // namespace

TerminalCheck check_terminal(const Cone& c) {
  TerminalCheck out;
  out.functional = canonical_functional(c);
  out.terminal = true;
  for (const auto& p : lattice_points(height_polytope(c, out.functional, Rational(1)))) {
    if (p.is_zero()) continue;
    if (std::find(c.rays().begin(), c.rays().end(), p) != c.rays().end()) continue;
    out.terminal = false;
    out.certificate = p;
    break;
  }
  return out;
}

std::vector<ToricDiscrepancy> toric_discrepancies(const Cone& c, int height_bound) {
  if (height_bound < 1) throw ValidationError("height bound must be at least 1");
  auto m = canonical_functional(c);
  std::vector<ToricDiscrepancy> out;
  for (const auto& p : lattice_points(height_polytope(c, m, Rational(height_bound)))) {
    if (p.is_zero() || !is_primitive(p)) continue;
    if (std::find(c.rays().begin(), c.rays().end(), p) != c.rays().end()) continue;
    Rational disc = dot(p, m) - 1;
    if (disc <= Rational(-1)) throw EngineError("internal: toric discrepancy not above -1 at " + p.str());
    out.push_back({p, std::move(disc)});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Fan

Fan::Fan(std::size_t rank, std::vector<LatticeVector> rays, std::vector<std::vector<std::size_t>> max_cones)
    : rank_(rank), rays_(std::move(rays)), max_cones_(std::move(max_cones)) {
  if (rank_ > kMaxRank) throw ValidationError("ambient rank exceeds 4");
  if (rank_ == 0 && !rays_.empty()) throw ValidationError("rank-0 fan cannot have rays");
  for (std::size_t i = 0; i < rays_.size(); ++i) {
    if (rays_[i].rank() != rank_) throw ValidationError("ray " + std::to_string(i) + " has wrong rank");
    if (!is_primitive(rays_[i])) throw ValidationError("ray " + std::to_string(i) + " is not primitive");
    for (std::size_t j = 0; j < i; ++j)
      if (rays_[j] == rays_[i]) throw ValidationError("ray " + std::to_string(i) + " repeats ray " + std::to_string(j));
  }
  if (max_cones_.empty()) throw ValidationError("fan has no cones");
  std::vector<bool> used(rays_.size(), false);
  for (auto& cone : max_cones_) {
    std::sort(cone.begin(), cone.end());
    if (std::adjacent_find(cone.begin(), cone.end()) != cone.end())
      throw ValidationError("maximal cone repeats a ray index");
    for (auto i : cone) {
      if (i >= rays_.size()) throw ValidationError("cone refers to missing ray " + std::to_string(i));
      used[i] = true;
    }
  }
  for (std::size_t i = 0; i < max_cones_.size(); ++i)
    for (std::size_t j = 0; j < max_cones_.size(); ++j)
      if (i != j && std::includes(max_cones_[j].begin(), max_cones_[j].end(), max_cones_[i].begin(),
                                  max_cones_[i].end()))
        throw ValidationError("cone " + std::to_string(i) + " is a face of cone " + std::to_string(j));
  for (std::size_t i = 0; i < used.size(); ++i)
    if (!used[i]) throw ValidationError("ray " + std::to_string(i) + " lies in no cone");

  if (rank_ == 0) {
    complete_ = true;
    simplicial_ = true;
    return;
  }

  std::vector<Cone> cones;
  simplicial_ = true;
  bool all_full = true;
  for (std::size_t i = 0; i < max_cones_.size(); ++i) {
    cones.push_back(cone(i));
    if (!check_simplicial(cones.back())) simplicial_ = false;
    if (cones.back().dimension() != rank_) all_full = false;
  }

  // Interiors of full-dimensional cones must be disjoint from other cones.
  for (std::size_t i = 0; i < cones.size(); ++i) {
    if (cones[i].dimension() != rank_) continue;
    LatticeVector inner = sum_of(cones[i].rays(), rank_);
    for (std::size_t j = 0; j < cones.size(); ++j) {
      if (j != i && cones[j].contains(inner))
        throw ValidationError("cones " + std::to_string(i) + " and " + std::to_string(j) + " overlap");
    }
  }

  if (!all_full) {
    complete_ = false;
    return;
  }
  std::map<std::vector<std::size_t>, int> facet_count;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    for (const auto& local : cone_facets(cones[i].rays(), rank_)) {
      std::vector<std::size_t> global;
      for (auto p : local) global.push_back(max_cones_[i][p]);
      std::sort(global.begin(), global.end());
      if (++facet_count[global] > 2) throw ValidationError("a wall lies in more than two maximal cones");
    }
  }
  complete_ = std::all_of(facet_count.begin(), facet_count.end(), [](const auto& kv) { return kv.second == 2; });
}

Fan Fan::from_cone(const Cone& c) {
  std::vector<std::size_t> all(c.rays().size());
  std::iota(all.begin(), all.end(), 0);
  return Fan(c.ambient_rank(), c.rays(), {all});
}

Cone Fan::cone(std::size_t i) const {
  std::vector<LatticeVector> rs;
  for (auto k : max_cones_.at(i)) rs.push_back(rays_[k]);
  return Cone(std::move(rs), rank_);
}

std::optional<std::size_t> Fan::ray_index(const LatticeVector& v) const {
  auto it = std::find(rays_.begin(), rays_.end(), v);
  if (it == rays_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - rays_.begin());
}

Fan projective_plane() { return Fan(2, {{1, 0}, {0, 1}, {-1, -1}}, {{0, 1}, {1, 2}, {2, 0}}); }

Fan hirzebruch(int a) {
  if (a < 0) throw ValidationError("Hirzebruch index must be non-negative");
  return Fan(2, {{1, 0}, {0, 1}, {-1, a}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}});
}

Fan product_of_lines() { return Fan(2, {{1, 0}, {0, 1}, {-1, 0}, {0, -1}}, {{0, 1}, {1, 2}, {2, 3}, {3, 0}}); }

Fan projective_space(std::size_t d) {
  if (d == 0 || d > kMaxRank) throw ValidationError("projective space dimension must be 1..4");
  std::vector<LatticeVector> rays;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<std::int64_t> e(d, 0);
    e[i] = 1;
    rays.emplace_back(std::move(e));
  }
  rays.emplace_back(std::vector<std::int64_t>(d, -1));
  std::vector<std::vector<std::size_t>> cones;
  for (std::size_t skip = 0; skip <= d; ++skip) {
    std::vector<std::size_t> c;
    for (std::size_t i = 0; i <= d; ++i)
      if (i != skip) c.push_back(i);
    cones.push_back(std::move(c));
  }
  return Fan(d, std::move(rays), std::move(cones));
}

// ---------------------------------------------------------------------------
// Divisors

ToricDivisor ToricDivisor::scaled(const Rational& k) const {
  ToricDivisor out = *this;
  for (auto& c : out.coefficients) c *= k;
  return out;
}

ToricDivisor ToricDivisor::floor() const {
  ToricDivisor out = *this;
  for (auto& c : out.coefficients) c = Rational(c.floor());
  return out;
}

ToricDivisor operator+(const ToricDivisor& a, const ToricDivisor& b) {
  if (a.coefficients.size() != b.coefficients.size()) throw ValidationError("divisors on different fans");
  ToricDivisor out = a;
  for (std::size_t i = 0; i < out.coefficients.size(); ++i) out.coefficients[i] += b.coefficients[i];
  return out;
}

ToricDivisor operator-(const ToricDivisor& a, const ToricDivisor& b) { return a + b.scaled(Rational(-1)); }

ToricDivisor toric_canonical(const Fan& f) { return ToricDivisor{RationalVector(f.ray_count(), Rational(-1))}; }

std::size_t picard_number(const Fan& f) {
  if (f.ray_count() < f.rank()) throw ValidationError("fewer rays than the ambient rank");
  return f.ray_count() - f.rank();
}

RationalPolytope divisor_polytope(const Fan& f, const ToricDivisor& d) {
  if (d.coefficients.size() != f.ray_count())
    throw ValidationError("divisor has " + std::to_string(d.coefficients.size()) + " coefficients for " +
                          std::to_string(f.ray_count()) + " rays");
  std::vector<Halfspace> hs;
  for (std::size_t i = 0; i < f.ray_count(); ++i) {
    RationalVector n = (-f.rays()[i]).to_rational();
    hs.push_back({std::move(n), d.coefficients[i]});
  }
  return RationalPolytope(f.rank(), std::move(hs));
}

// ---------------------------------------------------------------------------
// Star subdivision

Fan star_subdivision(const Fan& f, const LatticeVector& v) {
  if (v.rank() != f.rank()) throw ValidationError("subdivision vector has wrong rank");
  if (!is_primitive(v)) throw ValidationError("subdivision vector must be primitive");
  if (f.ray_index(v)) return f;
  if (!f.is_simplicial()) throw ValidationError("star subdivision requires a simplicial fan");

  std::vector<LatticeVector> rays = f.rays();
  const std::size_t new_index = rays.size();
  rays.push_back(v);
  std::vector<std::vector<std::size_t>> cones;
  bool hit = false;
  for (const auto& mc : f.max_cones()) {
    std::vector<LatticeVector> basis;
    for (auto i : mc) basis.push_back(f.rays()[i]);
    auto coords = coordinates_in(basis, v);
    bool inside = coords && std::all_of(coords->begin(), coords->end(), [](const Rational& c) { return c.sign() >= 0; });
    if (!inside) {
      cones.push_back(mc);
      continue;
    }
    hit = true;
    for (std::size_t j = 0; j < mc.size(); ++j) {
      if ((*coords)[j].is_zero()) continue;
      std::vector<std::size_t> c = mc;
      c[j] = new_index;
      std::sort(c.begin(), c.end());
      cones.push_back(std::move(c));
    }
  }
  if (!hit) throw ValidationError("vector " + v.str() + " is not in the support of the fan");
  return Fan(f.rank(), std::move(rays), std::move(cones));
}

// ---------------------------------------------------------------------------
// Wall curves and the Mori cone

std::vector<WallCurve> wall_curves(const Fan& f) {
  if (!f.is_complete()) throw ValidationError("wall curves require a complete fan");
  if (!f.is_simplicial()) throw ValidationError("wall curves require a simplicial fan");
  const std::size_t d = f.rank();
  const std::size_t n = f.ray_count();
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> adjacency;
  for (std::size_t ci = 0; ci < f.max_cones().size(); ++ci) {
    const auto& mc = f.max_cones()[ci];
    for (std::size_t skip = 0; skip < mc.size(); ++skip) {
      std::vector<std::size_t> wall;
      for (std::size_t k = 0; k < mc.size(); ++k)
        if (k != skip) wall.push_back(mc[k]);
      adjacency[wall].push_back(ci);
    }
  }
  std::vector<WallCurve> out;
  for (const auto& [wall, cones] : adjacency) {
    if (cones.size() != 2) throw EngineError("internal: wall not shared by two cones");
    auto opposite = [&](std::size_t ci) {
      for (auto r : f.max_cones()[ci])
        if (!std::binary_search(wall.begin(), wall.end(), r)) return r;
      throw EngineError("internal: cone equals its wall");
    };
    WallCurve wc;
    wc.wall = wall;
    wc.left = opposite(cones[0]);
    wc.right = opposite(cones[1]);

    std::vector<LatticeVector> basis{f.rays()[wc.left]};
    for (auto w : wall) basis.push_back(f.rays()[w]);
    auto coords = coordinates_in(basis, f.rays()[wc.right]);
    if (!coords) throw EngineError("internal: adjacent cone rays are dependent");
    RationalVector rel(n);
    rel[wc.right] = 1;
    rel[wc.left] = -(*coords)[0];
    for (std::size_t k = 0; k < wall.size(); ++k) rel[wall[k]] = -(*coords)[k + 1];
    if (rel[wc.left].sign() <= 0) throw EngineError("internal: adjacent cones lie on the same side of a wall");

    std::vector<LatticeVector> wall_rays;
    for (auto w : wall) wall_rays.push_back(f.rays()[w]);
    std::vector<LatticeVector> sigma_rays = wall_rays;
    sigma_rays.push_back(f.rays()[wc.left]);
    Rational mult_wall(d > 1 ? lattice_index(wall_rays) : BigInt(1));
    Rational mult_sigma(lattice_index(sigma_rays));
    Rational scale = (mult_wall / mult_sigma) / rel[wc.left];
    wc.intersections.resize(n);
    for (std::size_t i = 0; i < n; ++i) wc.intersections[i] = rel[i] * scale;
    wc.relation = primitive_integral(rel);
    out.push_back(std::move(wc));
  }
  return out;
}

Rational intersect(const ToricDivisor& d, std::span<const Rational> curve_class) {
  return dot(d.coefficients, curve_class);
}

Rational intersect(const ToricDivisor& d, const WallCurve& c) { return intersect(d, c.intersections); }

std::vector<MoriRay> toric_mori_rays(const Fan& f) { return toric_mori_rays(f, wall_curves(f)); }

std::vector<MoriRay> toric_mori_rays(const Fan& f, const std::vector<WallCurve>& walls) {
  (void)f;
  std::vector<MoriRay> groups;
  for (std::size_t w = 0; w < walls.size(); ++w) {
    const auto& cls = walls[w].intersections;
    if (std::all_of(cls.begin(), cls.end(), [](const Rational& x) { return x.is_zero(); })) continue;
    auto it = std::find_if(groups.begin(), groups.end(),
                           [&](const MoriRay& g) { return positively_proportional(g.curve_class, cls); });
    if (it != groups.end()) {
      it->walls.push_back(w);
      continue;
    }
    MoriRay g;
    g.curve_class = cls;
    g.walls = {w};
    g.key = primitive_integral(cls);
    groups.push_back(std::move(g));
  }
  std::vector<MoriRay> out;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    std::vector<RationalVector> others;
    for (std::size_t j = 0; j < groups.size(); ++j)
      if (j != i) others.push_back(groups[j].curve_class);
    if (!cone_contains(others, groups[i].curve_class)) out.push_back(groups[i]);
  }
  std::sort(out.begin(), out.end(), [](const MoriRay& a, const MoriRay& b) { return a.key < b.key; });
  return out;
}

std::string to_string(ContractionType t) {
  switch (t) {
    case ContractionType::Divisorial: return "Divisorial";
    case ContractionType::Small: return "Small";
    case ContractionType::Fibration: return "Fibration";
  }
  return "?";
}

namespace {

Fan quotient_fan(const Fan& f, const std::vector<std::vector<LatticeVector>>& groups,
                 const std::vector<LatticeVector>& lineality) {
  const std::size_t d = f.rank();
  RationalMatrix lmat = RationalMatrix::from_lattice_rows(lineality);
  const std::size_t k = rank(lmat);
  for (const auto& g : groups) {
    auto lin = lineality_rays(g);
    if (lin.empty() || span_rank(lin) != k || rank(RationalMatrix::from_lattice_rows([&] {
                                                  auto all = lin;
                                                  all.insert(all.end(), lineality.begin(), lineality.end());
                                                  return all;
                                                }())) != k)
      throw EngineError("contraction result is not a fan: merged cones have different lineality spaces");
  }
  if (k == d) return Fan(0, {}, {{}});
  auto q = integer_kernel_basis(lmat);  // rows of the quotient map
  auto project = [&](const LatticeVector& r) {
    std::vector<std::int64_t> img(q.size());
    for (std::size_t i = 0; i < q.size(); ++i) {
      std::int64_t s = 0;
      for (std::size_t j = 0; j < d; ++j) s += q[i][j] * r[j];
      img[i] = s;
    }
    return LatticeVector(std::move(img));
  };
  std::vector<std::vector<LatticeVector>> images;
  std::set<LatticeVector> all_rays;
  for (const auto& g : groups) {
    std::vector<LatticeVector> imgs;
    for (const auto& r : g) {
      auto im = project(r);
      if (im.is_zero()) continue;
      im = primitivize(im);
      if (std::find(imgs.begin(), imgs.end(), im) == imgs.end()) imgs.push_back(im);
    }
    auto ext = extremal_rays(imgs);
    std::sort(ext.begin(), ext.end());
    for (const auto& e : ext) all_rays.insert(e);
    images.push_back(std::move(ext));
  }
  std::vector<LatticeVector> rays(all_rays.begin(), all_rays.end());
  std::set<std::vector<std::size_t>> cones;
  for (const auto& img : images) {
    std::vector<std::size_t> c;
    for (const auto& r : img)
      c.push_back(static_cast<std::size_t>(std::find(rays.begin(), rays.end(), r) - rays.begin()));
    std::sort(c.begin(), c.end());
    cones.insert(std::move(c));
  }
  try {
    return Fan(d - k, std::move(rays), {cones.begin(), cones.end()});
  } catch (const ValidationError& e) {
    throw EngineError(std::string("contraction result is not a fan: ") + e.what());
  }
}

}  // namespace

ToricContraction toric_contract(const Fan& f, const MoriRay& ray) {
  auto walls = wall_curves(f);
  auto rays = toric_mori_rays(f, walls);
  bool extremal = std::any_of(rays.begin(), rays.end(),
                              [&](const MoriRay& r) { return positively_proportional(r.curve_class, ray.curve_class); });
  if (!extremal) throw ValidationError("ray is not an extremal ray of the Mori cone");

  ToricContraction out;
  std::map<std::vector<std::size_t>, std::size_t> cone_of;
  UnionFind uf(f.max_cones().size());
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> wall_cones;
  for (std::size_t ci = 0; ci < f.max_cones().size(); ++ci) {
    const auto& mc = f.max_cones()[ci];
    for (std::size_t skip = 0; skip < mc.size(); ++skip) {
      std::vector<std::size_t> wall;
      for (std::size_t k = 0; k < mc.size(); ++k)
        if (k != skip) wall.push_back(mc[k]);
      wall_cones[wall].push_back(ci);
    }
  }
  for (std::size_t w = 0; w < walls.size(); ++w) {
    if (!positively_proportional(ray.curve_class, walls[w].intersections)) continue;
    out.removed_walls.push_back(w);
    const auto& cs = wall_cones.at(walls[w].wall);
    uf.unite(cs[0], cs[1]);
  }

  std::map<std::size_t, std::set<std::size_t>> merged;
  for (std::size_t ci = 0; ci < f.max_cones().size(); ++ci)
    for (auto r : f.max_cones()[ci]) merged[uf.find(ci)].insert(r);
  std::vector<std::vector<LatticeVector>> groups;
  std::vector<std::vector<std::size_t>> group_indices;
  for (const auto& [root, idx] : merged) {
    group_indices.emplace_back(idx.begin(), idx.end());
    std::vector<LatticeVector> g;
    for (auto i : idx) g.push_back(f.rays()[i]);
    groups.push_back(std::move(g));
  }

  std::vector<LatticeVector> lineality;
  for (const auto& g : groups) {
    auto lin = lineality_rays(g);
    if (!lin.empty()) {
      lineality = lin;
      break;
    }
  }
  out.ray_map.assign(f.ray_count(), std::nullopt);
  if (!lineality.empty()) {
    out.type = ContractionType::Fibration;
    out.target = quotient_fan(f, groups, lineality);
    for (std::size_t i = 0; i < f.ray_count(); ++i) out.removed_rays.push_back(i);
    return out;
  }

  std::set<std::size_t> kept;
  std::vector<std::vector<std::size_t>> ext_groups;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    auto ext = extremal_rays(groups[gi]);
    std::vector<std::size_t> idx;
    for (const auto& e : ext) idx.push_back(*f.ray_index(e));
    for (auto i : idx) kept.insert(i);
    ext_groups.push_back(std::move(idx));
  }
  std::vector<LatticeVector> new_rays;
  for (std::size_t i = 0; i < f.ray_count(); ++i) {
    if (kept.count(i)) {
      out.ray_map[i] = new_rays.size();
      new_rays.push_back(f.rays()[i]);
    } else {
      out.removed_rays.push_back(i);
    }
  }
  std::vector<std::vector<std::size_t>> new_cones;
  for (const auto& g : ext_groups) {
    std::vector<std::size_t> c;
    for (auto i : g) c.push_back(*out.ray_map[i]);
    std::sort(c.begin(), c.end());
    new_cones.push_back(std::move(c));
  }
  try {
    out.target = Fan(f.rank(), std::move(new_rays), std::move(new_cones));
  } catch (const ValidationError& e) {
    throw EngineError(std::string("contraction result is not a fan: ") + e.what());
  }
  if (!out.removed_rays.empty()) {
    out.type = ContractionType::Divisorial;
    if (!out.target.is_simplicial())
      throw EngineError("contraction result is not a fan: divisorial contraction produced a non-simplicial cone");
  } else {
    out.type = ContractionType::Small;
    out.read_only = true;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Normal form

namespace {

std::string vector_text(const RationalVector& v) {
  std::string s = "(";
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += v[i].str();
  }
  return s + ")";
}

std::optional<std::string> form_for_frame(const Fan& f, const std::vector<std::size_t>& frame) {
  const std::size_t d = f.rank();
  RationalMatrix s(d, d);
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) s.at(i, j) = Rational(static_cast<long long>(f.rays()[frame[j]][i]));
  if (determinant(s).is_zero()) return std::nullopt;
  RationalMatrix t = inverse(s);

  std::vector<RationalVector> images;
  for (const auto& r : f.rays()) images.push_back(t * r.to_rational());
  std::vector<std::size_t> order(images.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return images[a] < images[b]; });
  std::vector<std::size_t> position(images.size());
  for (std::size_t p = 0; p < order.size(); ++p) position[order[p]] = p;

  BigInt den = 1;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j) den = lcm(den, t.at(i, j).denominator());
  IntMatrix basis(d, std::vector<BigInt>(d));
  for (std::size_t j = 0; j < d; ++j)
    for (std::size_t i = 0; i < d; ++i) {
      const Rational& x = t.at(i, j);
      basis[j][i] = x.numerator() * (den / x.denominator());
    }
  IntMatrix hnf = row_hermite_normal_form(basis);

  std::vector<std::vector<std::size_t>> cones;
  for (const auto& mc : f.max_cones()) {
    std::vector<std::size_t> c;
    for (auto r : mc) c.push_back(position[r]);
    std::sort(c.begin(), c.end());
    cones.push_back(std::move(c));
  }
  std::sort(cones.begin(), cones.end());

  std::ostringstream os;
  os << "d=" << d << ";L=" << den.get_str() << ":";
  for (const auto& row : hnf) {
    os << '[';
    for (const auto& x : row) os << x.get_str() << ' ';
    os << ']';
  }
  os << ";R=";
  for (auto p : order) os << vector_text(images[p]);
  os << ";C=";
  for (const auto& c : cones) {
    os << '{';
    for (auto x : c) os << x << ' ';
    os << '}';
  }
  return os.str();
}

}  // namespace

std::string normal_form(const Fan& f) {
  if (f.rank() == 0) return "d=0";
  const std::size_t d = f.rank();
  std::optional<std::string> best;
  auto consider = [&](std::vector<std::size_t> frame) {
    std::sort(frame.begin(), frame.end());
    do {
      auto form = form_for_frame(f, frame);
      if (form && (!best || *form < *best)) best = std::move(form);
    } while (std::next_permutation(frame.begin(), frame.end()));
  };
  for (const auto& mc : f.max_cones()) {
    if (mc.size() < d) continue;
    for_each_subset(mc.size(), d, [&](const std::vector<std::size_t>& idx) {
      std::vector<std::size_t> frame;
      for (auto i : idx) frame.push_back(mc[i]);
      consider(frame);
    });
  }
  if (!best) {
    for_each_subset(f.ray_count(), d, [&](const std::vector<std::size_t>& idx) { consider(idx); });
  }
  if (!best) throw ValidationError("normal form requires rays spanning the lattice");
  return *best;
}

bool lattice_isomorphic(const Fan& a, const Fan& b) {
  if (a.rank() != b.rank() || a.ray_count() != b.ray_count() || a.max_cones().size() != b.max_cones().size())
    return false;
  return normal_form(a) == normal_form(b);
}

// ---------------------------------------------------------------------------
// Resolution

ToricResolution resolve(const Fan& f) {
  if (!f.is_simplicial()) throw ValidationError("resolution requires a simplicial fan");
  ToricResolution out{f, {}};
  for (;;) {
    std::optional<std::size_t> bad;
    for (std::size_t i = 0; i < out.fan.max_cones().size(); ++i) {
      if (!check_regular(out.fan.cone(i))) {
        bad = i;
        break;
      }
    }
    if (!bad) return out;
    Cone c = out.fan.cone(*bad);
    const auto& rays = c.rays();
    const std::size_t k = rays.size();
    const std::size_t d = f.rank();
    // Lattice points of the closed parallelepiped, in cone coordinates
    // coords = B^+ x restricted to the span of the cone.
    std::vector<LatticeVector> candidates;
    {
      // bounding box of the parallelepiped
      std::vector<std::int64_t> lo(d, 0), hi(d, 0);
      for (std::size_t mask = 0; mask < (std::size_t{1} << k); ++mask) {
        LatticeVector corner(std::vector<std::int64_t>(d, 0));
        for (std::size_t j = 0; j < k; ++j)
          if (mask & (std::size_t{1} << j)) corner = corner + rays[j];
        for (std::size_t i = 0; i < d; ++i) {
          lo[i] = std::min(lo[i], corner[i]);
          hi[i] = std::max(hi[i], corner[i]);
        }
      }
      std::vector<std::int64_t> x = lo;
      for (;;) {
        LatticeVector v(x);
        if (!v.is_zero()) {
          auto coords = coordinates_in(rays, v);
          if (coords && std::all_of(coords->begin(), coords->end(),
                                    [](const Rational& t) { return t.sign() >= 0 && t < Rational(1); }))
            candidates.push_back(v);
        }
        std::size_t i = d;
        bool done = true;
        while (i > 0) {
          --i;
          if (x[i] < hi[i]) {
            ++x[i];
            for (std::size_t j = i + 1; j < d; ++j) x[j] = lo[j];
            done = false;
            break;
          }
        }
        if (done) break;
      }
    }
    if (candidates.empty()) throw EngineError("internal: non-regular cone without parallelepiped points");
    auto height = [&](const LatticeVector& v) {
      auto coords = coordinates_in(rays, v);
      Rational h;
      for (const auto& t : *coords) h += t;
      return h;
    };
    std::sort(candidates.begin(), candidates.end(), [&](const LatticeVector& a, const LatticeVector& b) {
      Rational ha = height(a), hb = height(b);
      if (ha != hb) return ha < hb;
      return a < b;
    });
    LatticeVector v = primitivize(candidates.front());

    // discrepancy relative to the original fan
    Rational disc;
    bool found = false;
    for (const auto& mc : f.max_cones()) {
      std::vector<LatticeVector> basis;
      for (auto i : mc) basis.push_back(f.rays()[i]);
      auto coords = coordinates_in(basis, v);
      if (!coords || !std::all_of(coords->begin(), coords->end(), [](const Rational& t) { return t.sign() >= 0; }))
        continue;
      for (const auto& t : *coords) disc += t;
      disc -= 1;
      found = true;
      break;
    }
    if (!found) throw EngineError("internal: resolution ray outside the original fan");
    out.fan = star_subdivision(out.fan, v);
    out.added.push_back({v, disc});
  }
}

}  // namespace mmp::toric
