#pragma once

// Independent reference computations shared by the unit tests and the
// acceptance runner. Each oracle recomputes a quantity from raw intersection
// data or brute force, without going through the routine it checks.

#include <algorithm>
#include <optional>
#include <random>
#include <utility>
#include <vector>

#include "mmp/engine.hpp"
#include "mmp/kappa.hpp"
#include "mmp/singularities.hpp"

namespace mmp::oracle {

using engine::Backend;
using engine::Divisor;
using engine::Pair;
using sing::BoundarySlot;
using sing::ResolutionData;
using sing::SingularityClass;
using toric::Fan;
using toric::ToricDivisor;

// ---- engine ----

inline bool ample_everywhere(const Pair& p, const Divisor& d) {
  if (p.backend() == Backend::Toric) {
    for (const auto& w : toric::wall_curves(p.fan()))
      if (dot(d, w.intersections) <= 0) return false;
    return true;
  }
  for (const auto& c : p.model().curves())
    if (p.model().dot(d, c.coords) <= 0) return false;
  return true;
}

// Pairings (D.C) of a divisor with every wall curve or stored curve.
inline std::vector<Rational> pairings(const Pair& p, const Divisor& d) {
  std::vector<Rational> out;
  if (p.backend() == Backend::Toric) {
    for (const auto& w : toric::wall_curves(p.fan())) out.push_back(dot(d, w.intersections));
  } else {
    for (const auto& c : p.model().curves()) out.push_back(p.model().dot(d, c.coords));
  }
  return out;
}

// Largest t with denominator <= bound and t(K+B) + H nef, by a Stern-Brocot
// descent that only ever asks the nefness predicate.
inline Rational stern_brocot_threshold(const Pair& p, const Divisor& h, long bound) {
  auto kb = pairings(p, p.log_canonical());
  auto hc = pairings(p, h);
  auto nef_at = [&](const Rational& t) {
    for (std::size_t i = 0; i < kb.size(); ++i)
      if (hc[i] + t * kb[i] < 0) return false;
    return true;
  };
  long lp = 0, lq = 1, rp = 1, rq = 0;  // left = 0/1 is nef, right = 1/0 is infinity
  while (true) {
    long mp = lp + rp, mq = lq + rq;
    if (mq > bound) break;
    if (nef_at(Rational(mp, mq))) {
      lp = mp;
      lq = mq;
    } else {
      rp = mp;
      rq = mq;
    }
  }
  return Rational(lp, lq);
}

inline Pair random_instance(std::mt19937_64& rng) {
  if (rng() % 2 == 0) {
    auto fan = toric::hirzebruch(static_cast<int>(rng() % 5));
    if (rng() % 2 == 0) {
      // blow up the torus-fixed point of a random cone
      const auto& cone = fan.max_cones()[rng() % fan.max_cones().size()];
      fan = toric::star_subdivision(fan, fan.rays()[cone[0]] + fan.rays()[cone[1]]);
    }
    return Pair::toric(fan);
  }
  return Pair::surface(surface::SurfaceModel::del_pezzo(1 + rng() % 8));
}

inline Divisor random_ample(const Pair& p, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> coeff(0, 6);
  for (;;) {
    Divisor h(p.divisor_size());
    if (p.backend() == Backend::Toric) {
      for (auto& x : h) x = coeff(rng);
    } else {
      // a(-K) + bH + sum c_i (H - E_i): ample plus nef, with a >= 1
      const int a = 1 + coeff(rng) % 3;
      h[0] = 3 * a + coeff(rng);
      for (std::size_t i = 1; i < h.size(); ++i) {
        const int c = coeff(rng) % 3;
        h[0] += c;
        h[i] = -a - c;
      }
    }
    if (ample_everywhere(p, h)) return h;
  }
}

// ---- singularities ----

// Configuration of (-2)-curves with the given edges, nodes relabelled by perm.
inline ResolutionData minus_two_graph(std::size_t n, const std::vector<std::pair<std::size_t, std::size_t>>& edges,
                               const std::vector<std::size_t>& perm) {
  RationalMatrix q(n, n);
  for (std::size_t i = 0; i < n; ++i) q.at(i, i) = -2;
  for (auto [a, b] : edges) {
    q.at(perm[a], perm[b]) = 1;
    q.at(perm[b], perm[a]) = 1;
  }
  return ResolutionData(q, RationalVector(n));
}

inline ResolutionData single_curve(long a) {
  return ResolutionData(RationalMatrix{{Rational(-a)}}, RationalVector{Rational(a - 2)});
}

inline ResolutionData cusp() {
  return ResolutionData(RationalMatrix{{-3, 0, 1}, {0, -2, 1}, {1, 1, -1}}, RationalVector{1, 0, -1},
                        {{"cuspidal cubic", {2, 3, 6}, true}});
}

inline ResolutionData node() {
  return ResolutionData(RationalMatrix{{-1}}, RationalVector{-1}, {{"nodal cubic", {2}, true}});
}

inline std::vector<std::pair<std::size_t, std::size_t>> chain(std::size_t n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  for (std::size_t i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return e;
}

// Center 0 with arms of the given lengths.
inline std::vector<std::pair<std::size_t, std::size_t>> star_edges(const std::vector<std::size_t>& arms, std::size_t& n) {
  std::vector<std::pair<std::size_t, std::size_t>> e;
  n = 1;
  for (auto len : arms) {
    std::size_t prev = 0;
    for (std::size_t i = 0; i < len; ++i) {
      e.emplace_back(prev, n);
      prev = n++;
    }
  }
  return e;
}

// Random configuration of curves with E_i^2 <= -2 and random genus; callers
// retry when the drawn matrix is not negative definite.
inline std::optional<ResolutionData> random_minimal_config(std::mt19937_64& rng, bool with_boundary) {
  std::uniform_int_distribution<int> size(1, 5), self(2, 5), genus(0, 2), coin(0, 2), mult(0, 3);
  const std::size_t n = static_cast<std::size_t>(size(rng));
  RationalMatrix q(n, n);
  RationalVector k(n);
  for (std::size_t i = 0; i < n; ++i) {
    int b = self(rng);
    int g = genus(rng) == 0 ? 0 : genus(rng);
    q.at(i, i) = -b;
    k[i] = Rational(2 * g - 2 + b);  // K.E = 2g - 2 - E^2, non-negative since b >= 2
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (coin(rng) == 0) q.at(i, j) = q.at(j, i) = 1;
  if (!is_negative_definite(q)) return std::nullopt;
  std::vector<BoundarySlot> slots;
  if (with_boundary) {
    std::vector<Rational> m(n);
    for (auto& x : m) x = mult(rng);
    if (std::all_of(m.begin(), m.end(), [](const Rational& x) { return x.is_zero(); })) m[0] = 1;
    slots.push_back({"C", m, coin(rng) != 0});
  }
  return ResolutionData(q, k, slots);
}

// Largest t on the grid 1/denominator (up to 1) with classify != NotLC.
inline Rational grid_threshold(const ResolutionData& r, int denominator) {
  Rational best(-1);
  for (int i = 0; i <= denominator; ++i) {
    Rational t(i, denominator);
    if (classify(crepant_pullback(r, {t})) != SingularityClass::NotLC) best = t;
  }
  return best;
}

// ---- sections ----

inline Fan cube() {
  std::vector<LatticeVector> rays{{1, 0, 0}, {-1, 0, 0}, {0, 1, 0}, {0, -1, 0}, {0, 0, 1}, {0, 0, -1}};
  std::vector<std::vector<std::size_t>> cones;
  for (std::size_t a : {0, 1})
    for (std::size_t b : {2, 3})
      for (std::size_t c : {4, 5}) cones.push_back({a, b, c});
  return Fan(3, rays, cones);
}

// Lattice points u in the box |u_i| <= r with <u, v_rho> >= -floor(m a_rho).
// Reports nullopt if a point sits on the box boundary (box too small).
inline std::optional<std::size_t> box_count(const Fan& f, const ToricDivisor& d, long m, int r) {
  std::vector<BigInt> rhs;
  for (const auto& a : d.coefficients) rhs.push_back(-(a * Rational(m)).floor());
  const std::size_t n = f.rank();
  std::vector<int> u(n, -r);
  std::size_t count = 0;
  for (;;) {
    bool ok = true;
    for (std::size_t k = 0; k < f.ray_count() && ok; ++k) {
      long s = 0;
      for (std::size_t i = 0; i < n; ++i) s += static_cast<long>(u[i]) * f.rays()[k][i];
      if (BigInt(s) < rhs[k]) ok = false;
    }
    if (ok) {
      for (auto x : u)
        if (x == r || x == -r) return std::nullopt;
      ++count;
    }
    std::size_t i = 0;
    while (i < n && u[i] == r) u[i++] = -r;
    if (i == n) break;
    ++u[i];
  }
  return count;
}

inline Fan random_fan(std::mt19937_64& rng) {
  switch (rng() % 5) {
    case 0: return toric::projective_plane();
    case 1: return toric::hirzebruch(static_cast<int>(rng() % 4));
    case 2: return toric::projective_space(3);
    case 3: return cube();
    default: {
      auto f = toric::hirzebruch(static_cast<int>(rng() % 3));
      const auto& c = f.max_cones()[rng() % f.max_cones().size()];
      return toric::star_subdivision(f, f.rays()[c[0]] + f.rays()[c[1]]);
    }
  }
}

inline ToricDivisor random_divisor(const Fan& f, std::mt19937_64& rng, bool fractional) {
  std::uniform_int_distribution<int> coeff(-1, 3);
  RationalVector c;
  for (std::size_t i = 0; i < f.ray_count(); ++i)
    c.push_back(fractional ? Rational(coeff(rng), 1 + static_cast<long>(rng() % 3)) : Rational(coeff(rng)));
  return ToricDivisor{c};
}

}  // namespace mmp::oracle
