#include "mmp/singularities.hpp"

#include <algorithm>
#include <functional>

#include "mmp/errors.hpp"

namespace mmp::sing {

ResolutionData::ResolutionData(RationalMatrix q, RationalVector k_dot_e, std::vector<BoundarySlot> boundaries)
    : q_(std::move(q)), k_dot_e_(std::move(k_dot_e)), boundaries_(std::move(boundaries)) {
  const std::size_t n = k_dot_e_.size();
  if (n == 0) throw ValidationError("resolution needs at least one exceptional curve");
  if (q_.rows() != n || q_.cols() != n) throw ValidationError("intersection matrix does not match K.E length");
  if (!q_.is_symmetric()) throw ValidationError("intersection matrix is not symmetric");
  if (!is_negative_definite(q_)) throw ValidationError("exceptional intersection matrix is not negative definite");
  for (std::size_t i = 0; i < n; ++i) {
    Rational g = genus(i);
    if (!g.is_integer() || g.sign() < 0)
      throw ValidationError("curve " + std::to_string(i) + " has K.E + E^2 inconsistent with adjunction");
  }
  for (const auto& b : boundaries_) {
    if (b.mults.size() != n) throw ValidationError("boundary '" + b.name + "' needs one multiplicity per curve");
    for (const auto& a : b.mults)
      if (a.sign() < 0) throw ValidationError("boundary '" + b.name + "' has a negative multiplicity");
  }
}

Rational ResolutionData::genus(std::size_t i) const { return Rational(1) + (k_dot_e_[i] + q_.at(i, i)) / 2; }

DiscrepancyReport crepant_pullback(const ResolutionData& r, const RationalVector& t) {
  if (t.size() != r.boundaries().size())
    throw ValidationError("expected " + std::to_string(r.boundaries().size()) + " boundary coefficients");
  for (const auto& x : t)
    if (x.sign() < 0 || x > Rational(1)) throw ValidationError("boundary coefficients must lie in [0,1]");
  const std::size_t n = r.size();
  RationalVector rhs(n);
  for (std::size_t i = 0; i < n; ++i) rhs[i] = -r.k_dot_e()[i];
  auto sol = solve_linear(r.q(), rhs);
  auto* unique = std::get_if<UniqueSolution>(&sol);
  if (!unique) throw EngineError("exceptional intersection matrix is singular");
  DiscrepancyReport rep;
  rep.exceptional_coefficients = unique->x;
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& slot = r.boundaries()[k];
    for (std::size_t i = 0; i < n; ++i) rep.exceptional_coefficients[i] += t[k] * slot.mults[i];
    if (slot.strict_coeff_slot) rep.strict_coefficients.push_back(t[k]);
  }
  for (const auto& e : rep.exceptional_coefficients) rep.discrepancies.push_back(-e);
  return rep;
}

DiscrepancyReport crepant_pullback(const ResolutionData& r) {
  return crepant_pullback(r, RationalVector(r.boundaries().size()));
}

std::string to_string(SingularityClass c) {
  switch (c) {
    case SingularityClass::Terminal: return "Terminal";
    case SingularityClass::Canonical: return "Canonical";
    case SingularityClass::KLT: return "KLT";
    case SingularityClass::LC: return "LC";
    case SingularityClass::NotLC: return "NotLC";
  }
  return "?";
}

SingularityClass classify(const DiscrepancyReport& rep) {
  const auto& e = rep.exceptional_coefficients;
  const auto& s = rep.strict_coefficients;
  const bool no_boundary = std::all_of(s.begin(), s.end(), [](const Rational& x) { return x.is_zero(); });
  auto all = [&](auto pred) { return std::all_of(e.begin(), e.end(), pred) && std::all_of(s.begin(), s.end(), pred); };
  if (no_boundary && std::all_of(e.begin(), e.end(), [](const Rational& x) { return x.sign() < 0; }))
    return SingularityClass::Terminal;
  if (no_boundary && std::all_of(e.begin(), e.end(), [](const Rational& x) { return x.sign() <= 0; }))
    return SingularityClass::Canonical;
  if (all([](const Rational& x) { return x < Rational(1); })) return SingularityClass::KLT;
  if (all([](const Rational& x) { return x <= Rational(1); })) return SingularityClass::LC;
  return SingularityClass::NotLC;
}

NegativityResult negativity_check(const ResolutionData& r, const RationalVector& d) {
  if (d.size() != r.size()) throw ValidationError("divisor needs one coefficient per exceptional curve");
  NegativityResult out;
  auto de = r.q() * d;
  for (std::size_t i = 0; i < de.size(); ++i) {
    if (de[i].sign() > 0) {
      out.status = NegativityResult::Status::PreconditionFails;
      out.index = i;
      out.value = de[i];
      return out;
    }
  }
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d[i].sign() < 0) {
      out.status = NegativityResult::Status::Violation;
      out.index = i;
      out.value = d[i];
      return out;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Du Val recognition

namespace {

using Adjacency = std::vector<std::vector<std::size_t>>;

std::string rooted_form(const Adjacency& g, std::size_t v, std::size_t parent) {
  std::vector<std::string> children;
  for (auto w : g[v])
    if (w != parent) children.push_back(rooted_form(g, w, v));
  std::sort(children.begin(), children.end());
  std::string out = "(";
  for (const auto& c : children) out += c;
  return out + ")";
}

// AHU canonical string of an unrooted tree, rooted at its center(s).
std::string tree_form(const Adjacency& g) {
  const std::size_t n = g.size();
  std::vector<std::size_t> degree(n);
  std::vector<std::size_t> leaves;
  for (std::size_t v = 0; v < n; ++v) {
    degree[v] = g[v].size();
    if (degree[v] <= 1) leaves.push_back(v);
  }
  std::size_t remaining = n;
  while (remaining > 2) {
    std::vector<std::size_t> next;
    for (auto v : leaves) {
      --remaining;
      for (auto w : g[v])
        if (--degree[w] == 1) next.push_back(w);
    }
    leaves = std::move(next);
  }
  const std::size_t none = n;
  std::string best;
  for (auto c : leaves) {
    auto f = rooted_form(g, c, none);
    if (best.empty() || f < best) best = f;
  }
  return best;
}

Adjacency star(const std::vector<std::size_t>& arms) {
  Adjacency g(1);
  for (auto len : arms) {
    std::size_t prev = 0;
    for (std::size_t i = 0; i < len; ++i) {
      g.emplace_back();
      std::size_t v = g.size() - 1;
      g[prev].push_back(v);
      g[v].push_back(prev);
      prev = v;
    }
  }
  return g;
}

}  // namespace

std::string DuValType::str() const {
  if (!is_du_val()) return "not-du-val";
  return std::string(1, family) + std::to_string(n);
}

DuValType du_val_type(const ResolutionData& r) {
  const std::size_t n = r.size();
  if (n > 10) throw ValidationError("dual graph matching supports at most 10 curves");
  for (std::size_t i = 0; i < n; ++i) {
    if (r.q().at(i, i) != Rational(-2) || !r.k_dot_e()[i].is_zero()) return {};
  }
  Adjacency g(n);
  std::size_t edges = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const Rational& x = r.q().at(i, j);
      if (x.is_zero()) continue;
      if (x != Rational(1)) return {};
      g[i].push_back(j);
      g[j].push_back(i);
      ++edges;
    }
  if (edges + 1 != n) return {};
  // connected?
  std::vector<bool> seen(n, false);
  std::vector<std::size_t> stack{0};
  seen[0] = true;
  std::size_t reached = 1;
  while (!stack.empty()) {
    auto v = stack.back();
    stack.pop_back();
    for (auto w : g[v])
      if (!seen[w]) {
        seen[w] = true;
        ++reached;
        stack.push_back(w);
      }
  }
  if (reached != n) return {};

  const std::string form = tree_form(g);
  // the chain A_n is the star with one arm of length n-1
  if (form == tree_form(star({n - 1}))) return {'A', n};
  if (n >= 4 && form == tree_form(star({1, 1, n - 3}))) return {'D', n};
  if (n == 6 && form == tree_form(star({1, 2, 2}))) return {'E', 6};
  if (n == 7 && form == tree_form(star({1, 2, 3}))) return {'E', 7};
  if (n == 8 && form == tree_form(star({1, 2, 4}))) return {'E', 8};
  return {};
}

// ---------------------------------------------------------------------------
// Thresholds and polytopes

Rational lc_threshold(const ResolutionData& r, std::size_t slot) {
  if (slot >= r.boundaries().size()) throw ValidationError("boundary slot " + std::to_string(slot) + " does not exist");
  const auto& b = r.boundaries()[slot];
  auto base = crepant_pullback(r);
  for (std::size_t i = 0; i < r.size(); ++i)
    if (base.discrepancies[i] < Rational(-1)) throw EngineError("the surface itself is not lc; no threshold exists");
  std::optional<Rational> best;
  if (b.strict_coeff_slot) best = Rational(1);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (b.mults[i].sign() <= 0) continue;
    Rational t = (base.discrepancies[i] + 1) / b.mults[i];
    if (!best || t < *best) best = t;
  }
  if (!best) throw ValidationError("divisor misses the resolution locus");
  return *best;
}

ContractedCurve contracted_curve_singularity(long self_intersection, long genus) {
  if (self_intersection >= 0) throw ValidationError("not contractible: E^2 must be negative");
  if (genus < 0) throw ValidationError("genus must be non-negative");
  // K.E = 2g - 2 - E^2
  Rational k_dot_e(2 * genus - 2 - self_intersection);
  ResolutionData r(RationalMatrix{{Rational(self_intersection)}}, RationalVector{k_dot_e});
  auto rep = crepant_pullback(r);
  return {rep.discrepancies[0], classify(rep)};
}

RationalPolytope lc_polytope(const ResolutionData& r) {
  const std::size_t s = r.boundaries().size();
  auto base = crepant_pullback(r);
  std::vector<Halfspace> hs;
  for (std::size_t k = 0; k < s; ++k) {
    RationalVector lo(s), hi(s);
    lo[k] = -1;
    hi[k] = 1;
    hs.push_back({lo, Rational(0)});
    hs.push_back({hi, Rational(1)});
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    RationalVector row(s);
    for (std::size_t k = 0; k < s; ++k) row[k] = r.boundaries()[k].mults[i];
    // sum_k t_k a_ik - d_i <= 1
    hs.push_back({row, Rational(1) + base.discrepancies[i]});
  }
  return RationalPolytope(s, std::move(hs));
}

DltIndication dlt_indication(const ResolutionData& r, const RationalVector& t) {
  auto rep = crepant_pullback(r, t);
  DltIndication out;
  auto cls = classify(rep);
  if (cls == SingularityClass::NotLC) {
    out.reason = "pair is not lc";
    return out;
  }
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (rep.exceptional_coefficients[i] >= Rational(1)) {
      out.reason = "exceptional curve " + std::to_string(i) + " has discrepancy -1";
      return out;
    }
  }
  for (std::size_t k = 0; k < t.size(); ++k) {
    const auto& b = r.boundaries()[k];
    bool meets = std::any_of(b.mults.begin(), b.mults.end(), [](const Rational& a) { return a.sign() > 0; });
    if (b.strict_coeff_slot && t[k] == Rational(1) && meets) {
      out.reason = "boundary '" + b.name + "' has coefficient 1 and meets the exceptional locus";
      return out;
    }
  }
  out.indicated = true;
  out.reason = "lc with every exceptional discrepancy above -1 on this resolution";
  return out;
}

std::optional<ToricChain> resolution_from_cone(const toric::Cone& c) {
  if (c.ambient_rank() != 2 || c.rays().size() != 2) throw ValidationError("expected a two-dimensional cone");
  auto res = toric::resolve(toric::Fan::from_cone(c));
  if (res.added.empty()) return std::nullopt;
  const auto& fan = res.fan;
  // walk the chain of maximal cones starting from the first original ray
  std::vector<std::size_t> order{0};
  std::vector<bool> used(fan.max_cones().size(), false);
  while (order.size() < fan.ray_count()) {
    bool advanced = false;
    for (std::size_t ci = 0; ci < fan.max_cones().size(); ++ci) {
      const auto& mc = fan.max_cones()[ci];
      if (used[ci]) continue;
      if (mc[0] != order.back() && mc[1] != order.back()) continue;
      used[ci] = true;
      order.push_back(mc[0] == order.back() ? mc[1] : mc[0]);
      advanced = true;
      break;
    }
    if (!advanced) throw EngineError("internal: resolved cone is not a chain");
  }
  // interior rays are order[1..n]; v_{i-1} + v_{i+1} = b_i v_i
  const std::size_t n = order.size() - 2;
  RationalMatrix q(n, n);
  RationalVector k(n);
  std::vector<LatticeVector> rays;
  for (std::size_t i = 1; i <= n; ++i) {
    const auto& prev = fan.rays()[order[i - 1]];
    const auto& cur = fan.rays()[order[i]];
    const auto& next = fan.rays()[order[i + 1]];
    auto sum = prev + next;
    std::int64_t b = cur[0] != 0 ? sum[0] / cur[0] : sum[1] / cur[1];
    if (b * cur != sum) throw EngineError("internal: chain relation fails");
    q.at(i - 1, i - 1) = Rational(static_cast<long long>(-b));
    if (i < n) {
      q.at(i - 1, i) = 1;
      q.at(i, i - 1) = 1;
    }
    k[i - 1] = Rational(static_cast<long long>(b - 2));
    rays.push_back(cur);
  }
  return ToricChain{ResolutionData(std::move(q), std::move(k)), std::move(rays)};
}

}  // namespace mmp::sing
