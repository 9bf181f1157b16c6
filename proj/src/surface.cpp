#include "mmp/surface.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <sstream>

#include "mmp/errors.hpp"

namespace mmp::surface {

bool CurveClass::has_flag(std::string_view f) const {
  return std::find(flags.begin(), flags.end(), f) != flags.end();
}

namespace {

void set_flag(CurveClass& c, std::string_view f, bool on) {
  auto it = std::find(c.flags.begin(), c.flags.end(), f);
  if (on && it == c.flags.end()) c.flags.emplace_back(f);
  if (!on && it != c.flags.end()) c.flags.erase(it);
}

RationalVector unit(std::size_t n, std::size_t i) {
  RationalVector v(n);
  v[i] = 1;
  return v;
}

bool is_zero_vector(std::span<const Rational> v) {
  return std::all_of(v.begin(), v.end(), [](const Rational& x) { return x.is_zero(); });
}

}  // namespace

SurfaceModel::SurfaceModel(std::vector<std::string> labels, RationalMatrix gram, RationalVector canonical,
                           std::vector<CurveClass> curves, bool ne_certified)
    : labels_(std::move(labels)),
      gram_(std::move(gram)),
      canonical_(std::move(canonical)),
      curves_(std::move(curves)),
      ne_certified_(ne_certified) {
  const std::size_t n = labels_.size();
  if (n == 0) throw ValidationError("surface model needs a nonempty basis");
  if (gram_.rows() != n || gram_.cols() != n)
    throw ValidationError("intersection matrix is " + std::to_string(gram_.rows()) + "x" +
                          std::to_string(gram_.cols()) + " for " + std::to_string(n) + " basis classes");
  if (!gram_.is_symmetric()) throw ValidationError("intersection matrix is not symmetric");
  if (canonical_.size() != n) throw ValidationError("canonical class has wrong length");
  for (std::size_t i = 0; i < curves_.size(); ++i) {
    auto& c = curves_[i];
    const std::string where = "curve " + std::to_string(i);
    if (c.coords.size() != n) throw ValidationError(where + " has wrong length");
    if (is_zero_vector(c.coords)) throw ValidationError(where + " is the zero class");
    if (c.boundary < Rational(0) || c.boundary > Rational(1))
      throw ValidationError(where + " has boundary coefficient outside [0,1]");
    Rational expected = arithmetic_genus(*this, c.coords);
    if (c.pa != expected)
      throw ValidationError(where + " violates adjunction: stored p_a " + c.pa.str() + ", (K+C).C gives " +
                            expected.str());
    set_flag(c, kBoundaryFlag, !c.boundary.is_zero());
    if (c.label.empty()) c.label = class_label(*this, c.coords);
  }
}

RationalVector SurfaceModel::log_canonical() const {
  RationalVector out = canonical_;
  for (const auto& c : curves_)
    if (!c.boundary.is_zero())
      for (std::size_t i = 0; i < out.size(); ++i) out[i] += c.boundary * c.coords[i];
  return out;
}

SurfaceModel SurfaceModel::with_boundary(const RationalVector& coefficients) const {
  if (coefficients.size() != curves_.size())
    throw ValidationError("boundary needs one coefficient per curve (" + std::to_string(curves_.size()) + ")");
  auto curves = curves_;
  for (std::size_t i = 0; i < curves.size(); ++i) curves[i].boundary = coefficients[i];
  return SurfaceModel(labels_, gram_, canonical_, std::move(curves), ne_certified_);
}

Rational arithmetic_genus(const SurfaceModel& m, std::span<const Rational> c) {
  RationalVector kc(c.size());
  for (std::size_t i = 0; i < c.size(); ++i) kc[i] = m.canonical()[i] + c[i];
  return Rational(1) + m.dot(kc, c) / Rational(2);
}

std::string class_label(const SurfaceModel& m, std::span<const Rational> c) {
  std::string out;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (c[i].is_zero()) continue;
    Rational a = c[i].abs();
    if (c[i].sign() < 0)
      out += '-';
    else if (!out.empty())
      out += '+';
    if (a != Rational(1)) out += a.is_integer() ? a.str() : "(" + a.str() + ")";
    out += m.labels()[i];
  }
  return out.empty() ? "0" : out;
}

SurfaceModel SurfaceModel::del_pezzo(std::size_t k) {
  if (k > 8) throw ValidationError("del Pezzo models exist for at most 8 blown-up points");
  const std::size_t n = k + 1;
  std::vector<std::string> labels{"H"};
  for (std::size_t i = 1; i <= k; ++i) labels.push_back("E" + std::to_string(i));
  RationalMatrix gram(n, n);
  gram.at(0, 0) = 1;
  for (std::size_t i = 1; i < n; ++i) gram.at(i, i) = -1;
  RationalVector canonical(n, Rational(1));
  canonical[0] = -3;

  std::vector<CurveClass> curves;
  auto add = [&](RationalVector coords) { curves.push_back({std::move(coords), Rational(0), {}, "", Rational(0)}); };
  if (k == 0) {
    add(unit(1, 0));
  } else if (k == 1) {
    add(unit(2, 1));
    add(RationalVector{1, -1});
  } else {
    for (const auto& cls : enumerate_minus_one_classes(k, 6)) {
      RationalVector v;
      for (auto x : cls) v.emplace_back(static_cast<long long>(x));
      add(std::move(v));
    }
  }
  if (k > 0) {
    for (auto& c : curves)
      if (c.coords == unit(n, k)) c.flags.emplace_back(kExceptionalLast);
  }
  return SurfaceModel(std::move(labels), std::move(gram), std::move(canonical), std::move(curves), true);
}

SurfaceModel blow_up(const SurfaceModel& m, const std::vector<BlowUpCenter>& center) {
  const std::size_t n = m.picard_number();
  for (const auto& c : center) {
    if (c.multiplicity < 0) throw ValidationError("blow-up multiplicity must be non-negative");
    if (c.curve >= m.curves().size()) throw ValidationError("blow-up center refers to missing curve " +
                                                            std::to_string(c.curve));
  }
  auto labels = m.labels();
  std::string label;
  for (std::size_t i = 1;; ++i) {
    label = "E" + std::to_string(i);
    if (std::find(labels.begin(), labels.end(), label) == labels.end()) break;
  }
  labels.push_back(label);

  RationalMatrix gram(n + 1, n + 1);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) gram.at(i, j) = m.gram().at(i, j);
  gram.at(n, n) = -1;
  RationalVector canonical = m.canonical();
  canonical.push_back(1);

  std::vector<CurveClass> curves = m.curves();
  for (auto& c : curves) {
    // derived labels are regenerated for the new class, user labels survive
    if (c.label == class_label(m, c.coords)) c.label.clear();
    c.coords.push_back(0);
    set_flag(c, kExceptionalLast, false);
  }
  for (const auto& c : center) curves[c.curve].coords[n] -= Rational(c.multiplicity);
  // genus follows from adjunction on the new lattice
  for (auto& c : curves) {
    Rational pa = 1;
    RationalVector kc(n + 1);
    for (std::size_t i = 0; i <= n; ++i) kc[i] = canonical[i] + c.coords[i];
    pa += gram.pair(kc, c.coords) / Rational(2);
    c.pa = pa;
  }
  curves.push_back({unit(n + 1, n), Rational(0), {std::string(kExceptionalLast)}, label, Rational(0)});
  return SurfaceModel(std::move(labels), std::move(gram), std::move(canonical), std::move(curves), false);
}

bool is_minus_one_curve(const SurfaceModel& m, std::span<const Rational> c) {
  return m.self_intersection(c) == Rational(-1) && m.dot(m.canonical(), c) == Rational(-1) &&
         arithmetic_genus(m, c).is_zero();
}

std::vector<CurveClass> find_minus_one_curves(const SurfaceModel& m) {
  std::vector<CurveClass> out;
  for (const auto& c : m.curves())
    if (is_minus_one_curve(m, c.coords)) out.push_back(c);
  return out;
}

Contraction castelnuovo_contract(const SurfaceModel& m, std::span<const Rational> e) {
  if (e.size() != m.picard_number() || !is_minus_one_curve(m, e))
    throw ValidationError("Castelnuovo requires a -1-curve");
  const std::size_t n = m.picard_number();
  auto project = [&](std::span<const Rational> d) {
    Rational de = m.dot(d, e);
    RationalVector out(d.begin(), d.end());
    for (std::size_t i = 0; i < n; ++i) out[i] += de * e[i];
    return out;
  };

  // basis of E-perp in old coordinates, with labels
  std::vector<RationalVector> basis;
  std::vector<std::string> labels;
  std::optional<std::size_t> unit_slot;
  for (std::size_t i = 0; i < n; ++i)
    if (e[i].abs() == Rational(1)) {
      unit_slot = i;
      break;
    }
  if (unit_slot) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j == *unit_slot) continue;
      auto img = project(unit(n, j));
      labels.push_back(img == unit(n, j) ? m.labels()[j] : m.labels()[j] + "'");
      basis.push_back(std::move(img));
    }
  } else {
    RationalMatrix form(1, n);
    auto ge = m.gram() * e;
    for (std::size_t j = 0; j < n; ++j) form.at(0, j) = ge[j];
    auto ker = integer_kernel_basis(form);
    for (std::size_t j = 0; j < ker.size(); ++j) {
      basis.push_back(ker[j].to_rational());
      labels.push_back("L" + std::to_string(j + 1));
    }
  }
  const std::size_t r = basis.size();
  if (r != n - 1) throw EngineError("internal: E-perp has rank " + std::to_string(r));

  RationalMatrix w(n, r);  // columns are the new basis vectors
  for (std::size_t j = 0; j < r; ++j)
    for (std::size_t i = 0; i < n; ++i) w.at(i, j) = basis[j][i];
  RationalMatrix push(r, n);
  for (std::size_t j = 0; j < n; ++j) {
    auto coords = solve_unique(w, project(unit(n, j)));
    for (std::size_t i = 0; i < r; ++i) push.at(i, j) = coords[i];
  }

  RationalMatrix gram(r, r);
  for (std::size_t a = 0; a < r; ++a)
    for (std::size_t b = 0; b < r; ++b) gram.at(a, b) = m.dot(basis[a], basis[b]);
  RationalVector canonical = push * m.canonical();

  std::vector<CurveClass> curves;
  for (const auto& c : m.curves()) {
    if (c.coords == RationalVector(e.begin(), e.end())) continue;
    auto coords = push * c.coords;
    if (is_zero_vector(coords)) continue;
    CurveClass out = c;
    if (out.label == class_label(m, c.coords)) out.label.clear();
    out.coords = coords;
    out.pa = 1 + gram.pair([&] {
      RationalVector kc(r);
      for (std::size_t i = 0; i < r; ++i) kc[i] = canonical[i] + coords[i];
      return kc;
    }(), coords) / Rational(2);
    set_flag(out, kExceptionalLast, false);
    curves.push_back(std::move(out));
  }
  SurfaceModel model(std::move(labels), std::move(gram), std::move(canonical), std::move(curves), m.ne_certified());
  return {std::move(model), std::move(push)};
}

// ---------------------------------------------------------------------------
// (-1)-classes on blown-up planes

namespace {

// Non-increasing m_1 >= .. >= m_k >= 0 with sum = s and sum of squares = q.
void multiplicity_patterns(std::size_t k, long s, long q, long cap, std::vector<long>& prefix,
                           const std::function<void(const std::vector<long>&)>& emit) {
  const std::size_t left = k - prefix.size();
  if (left == 0) {
    if (s == 0 && q == 0) emit(prefix);
    return;
  }
  if (s < 0 || q < 0) return;
  // Cauchy-Schwarz: s^2 <= left * q; and q <= cap * s
  if (s * s > static_cast<long>(left) * q) return;
  if (q > cap * s) return;
  for (long x = std::min(cap, s); x >= 0; --x) {
    if (x * x > q) continue;
    prefix.push_back(x);
    multiplicity_patterns(k, s - x, q - x * x, x, prefix, emit);
    prefix.pop_back();
  }
}

BigInt orbit_size(const std::vector<long>& pattern) {
  BigInt total = 1;
  for (std::size_t i = 2; i <= pattern.size(); ++i) total *= static_cast<unsigned long>(i);
  std::size_t i = 0;
  while (i < pattern.size()) {
    std::size_t j = i;
    while (j < pattern.size() && pattern[j] == pattern[i]) ++j;
    for (std::size_t f = 2; f <= j - i; ++f) total /= static_cast<unsigned long>(f);
    i = j;
  }
  return total;
}

template <typename Visit>
void scan_classes(std::size_t k, int degree_bound, Visit&& visit) {
  if (k > 9) throw ValidationError("unsupported: at most 9 blown-up points");
  if (degree_bound < 0) throw ValidationError("degree bound must be non-negative");
  if (k == 0) return;
  // degree 0: the exceptional curves themselves
  visit(0, std::vector<long>{}, true);
  for (long d = 1; d <= degree_bound; ++d) {
    std::vector<long> prefix;
    multiplicity_patterns(k, 3 * d - 1, d * d + 1, 3 * d - 1, prefix,
                          [&](const std::vector<long>& p) { visit(d, p, false); });
  }
}

}  // namespace

std::vector<std::vector<std::int64_t>> enumerate_minus_one_classes(std::size_t k, int degree_bound) {
  std::vector<std::vector<std::int64_t>> out;
  scan_classes(k, degree_bound, [&](long d, const std::vector<long>& pattern, bool exceptional) {
    std::vector<std::vector<std::int64_t>> block;
    if (exceptional) {
      for (std::size_t i = 0; i < k; ++i) {
        std::vector<std::int64_t> v(k + 1, 0);
        v[i + 1] = 1;
        block.push_back(std::move(v));
      }
    } else {
      std::vector<long> perm(pattern.rbegin(), pattern.rend());
      do {
        std::vector<std::int64_t> v{d};
        for (auto x : perm) v.push_back(-x);
        block.push_back(std::move(v));
      } while (std::next_permutation(perm.begin(), perm.end()));
    }
    std::sort(block.begin(), block.end(), std::greater<>());
    out.insert(out.end(), block.begin(), block.end());
  });
  return out;
}

BigInt count_minus_one_classes(std::size_t k, int degree_bound) {
  BigInt total = 0;
  scan_classes(k, degree_bound, [&](long, const std::vector<long>& pattern, bool exceptional) {
    total += exceptional ? BigInt(static_cast<unsigned long>(k)) : orbit_size(pattern);
  });
  return total;
}

// ---------------------------------------------------------------------------
// Positivity and extremal rays

std::string to_string(RayVerdict v) {
  switch (v) {
    case RayVerdict::Extremal: return "extremal";
    case RayVerdict::NotExtremalUnlessRho1: return "not-extremal-unless-rho1";
    case RayVerdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

RayVerdict extremal_ray_test(const SurfaceModel& m, std::span<const Rational> c) {
  if (c.size() != m.picard_number()) throw ValidationError("class has wrong length");
  if (is_zero_vector(c)) throw ValidationError("the zero class spans no ray");
  if (m.picard_number() == 1) return RayVerdict::Extremal;
  int s = m.self_intersection(c).sign();
  if (s < 0) return RayVerdict::Extremal;
  if (s > 0) return RayVerdict::NotExtremalUnlessRho1;
  return RayVerdict::Inconclusive;
}

std::string to_string(Positivity p) {
  switch (p) {
    case Positivity::Ample: return "ample";
    case Positivity::NefNotAmple: return "nef-not-ample";
    case Positivity::NotNef: return "not-nef";
  }
  return "?";
}

PositivityReport nef_ample_check(const SurfaceModel& m, std::span<const Rational> d) {
  if (!m.ne_certified()) throw ValidationError("curve list not certified as generating");
  if (d.size() != m.picard_number()) throw ValidationError("class has wrong length");
  PositivityReport out;
  std::optional<std::size_t> zero;
  for (std::size_t i = 0; i < m.curves().size(); ++i) {
    int s = m.dot(d, m.curves()[i].coords).sign();
    if (s < 0) {
      out.verdict = Positivity::NotNef;
      out.witness = i;
      return out;
    }
    if (s == 0 && !zero) zero = i;
  }
  out.verdict = zero ? Positivity::NefNotAmple : Positivity::Ample;
  out.witness = zero;
  return out;
}

std::vector<SurfaceRay> surface_mori_rays(const SurfaceModel& m) {
  if (!m.ne_certified()) throw ValidationError("curve list not certified as generating");
  // classes on the same ray share their primitive integral representative
  std::vector<SurfaceRay> groups;
  std::map<std::vector<BigInt>, std::size_t> by_key;
  for (std::size_t i = 0; i < m.curves().size(); ++i) {
    const auto& cls = m.curves()[i].coords;
    auto key = primitive_integral(cls);
    auto [it, fresh] = by_key.emplace(key, groups.size());
    if (!fresh) {
      groups[it->second].curves.push_back(i);
      continue;
    }
    groups.push_back({cls, {i}, std::move(key)});
  }
  std::vector<SurfaceRay> out;
  const bool rho_one = m.picard_number() == 1;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    bool extremal = false;
    if (rho_one) {
      extremal = true;
    } else {
      switch (extremal_ray_test(m, groups[i].curve_class)) {
        case RayVerdict::Extremal: extremal = true; break;
        case RayVerdict::NotExtremalUnlessRho1: extremal = false; break;
        case RayVerdict::Inconclusive: {
          // C^2 = 0. When C.D >= 0 for every stored D, C is nef, and in any
          // decomposition C = sum a_j D_j each D_j with a_j > 0 has C.D_j = 0,
          // so only the curves orthogonal to C can take part.
          const auto& c = groups[i].curve_class;
          std::vector<RationalVector> all, orthogonal;
          bool nef = true;
          for (std::size_t j = 0; j < groups.size(); ++j) {
            if (j == i) continue;
            const auto& d = groups[j].curve_class;
            int s = m.dot(c, d).sign();
            if (s < 0) nef = false;
            if (s == 0) orthogonal.push_back(d);
            all.push_back(d);
          }
          extremal = !cone_contains(nef ? orthogonal : all, c);
          break;
        }
      }
    }
    if (extremal) out.push_back(groups[i]);
  }
  std::sort(out.begin(), out.end(), [](const SurfaceRay& a, const SurfaceRay& b) { return a.key < b.key; });
  return out;
}

}  // namespace mmp::surface
