#include "mmp/kappa.hpp"

#include <set>
#include <sstream>

#include "mmp/errors.hpp"

namespace mmp::kappa {

using toric::Fan;
using toric::ToricDivisor;

long plane_curve_genus(long d) {
  if (d <= 0) throw ValidationError("plane curve degree must be positive");
  return (d - 1) * (d - 2) / 2;
}

long hypersurface_canonical_degree(long n, long d) {
  if (n < 2 || d < 1) throw ValidationError("need n >= 2 and d >= 1");
  return d - n - 1;
}

Kappa kappa_curve(const Rational& degree, bool torsion) {
  if (degree > 0) return Kappa::of(1);
  if (degree == 0 && torsion) return Kappa::of(0);
  return Kappa::minus_infinity();
}

namespace {

void require_complete(const Fan& f) {
  if (!f.is_complete()) throw ValidationError("fan must be complete");
}

void require_size(const Fan& f, const ToricDivisor& d) {
  if (d.coefficients.size() != f.ray_count())
    throw ValidationError("divisor needs one coefficient per ray (" + std::to_string(f.ray_count()) + ")");
}

BigInt denominator_lcm(const RationalVector& v) {
  BigInt l = 1;
  for (const auto& x : v) l = lcm(l, x.denominator());
  return l;
}

// Smallest k with the k-th difference row constant over at least three
// entries: returns k for a nonzero constant, -1 for an all-zero series.
std::optional<int> settled_degree(const std::vector<std::size_t>& values) {
  std::vector<BigInt> row(values.begin(), values.end());
  for (int k = 0; row.size() >= 3; ++k) {
    bool constant = true;
    for (std::size_t i = 1; i < row.size(); ++i)
      if (row[i] != row[0]) constant = false;
    if (constant) return row[0] == 0 ? (k == 0 ? -1 : k - 1) : k;
    std::vector<BigInt> next;
    for (std::size_t i = 1; i < row.size(); ++i) next.push_back(row[i] - row[i - 1]);
    row = std::move(next);
  }
  return std::nullopt;
}

Kappa from_dimension(int dim) { return dim < 0 ? Kappa::minus_infinity() : Kappa::of(dim); }

}  // namespace

std::size_t section_count(const Fan& f, const ToricDivisor& d, long m) {
  require_complete(f);
  require_size(f, d);
  if (m < 0) throw ValidationError("multiple must be non-negative");
  return count_lattice_points(toric::divisor_polytope(f, d.scaled(Rational(m)).floor()));
}

bool is_nef(const Fan& f, const ToricDivisor& d) {
  require_size(f, d);
  for (const auto& w : toric::wall_curves(f))
    if (toric::intersect(d, w) < 0) return false;
  return true;
}

KodairaReport kodaira_dimension(const Fan& f, const ToricDivisor& d, long samples) {
  require_complete(f);
  require_size(f, d);
  if (samples < 3) throw ValidationError("need at least three samples");
  KodairaReport rep;
  rep.series.divisor = d;
  for (long m = 1; m <= samples; ++m) rep.series.values.push_back(section_count(f, d, m));

  // Route (a): on multiples of the period the counts are an Ehrhart
  // polynomial, whose degree the difference table exposes.
  auto poly = toric::divisor_polytope(f, d);
  BigInt step = denominator_lcm(d.coefficients);
  for (const auto& v : poly.vertices()) step = lcm(step, denominator_lcm(v));
  rep.series.step = to_int64(step);
  if (rep.series.step == 1) {
    rep.series.growth_values = rep.series.values;
  } else {
    for (long j = 1; j <= samples; ++j) rep.series.growth_values.push_back(section_count(f, d, rep.series.step * j));
  }
  rep.series.growth_degree = settled_degree(rep.series.growth_values);
  if (!rep.series.growth_degree) {
    rep.status = KodairaReport::Status::Undetermined;
  } else {
    rep.kappa = from_dimension(*rep.series.growth_degree);
  }

  // Route (b), nef divisors only.
  rep.nef = f.is_simplicial() && is_nef(f, d);
  if (rep.nef) {
    rep.polytope_dimension = poly.dimension();
    if (rep.status == KodairaReport::Status::Determined && from_dimension(*rep.polytope_dimension) != rep.kappa)
      throw EngineError("internal: Kodaira dimension routes disagree: growth degree " + rep.kappa.str() +
                        ", polytope dimension " + std::to_string(*rep.polytope_dimension));
  }
  return rep;
}

bool check_kappa_scaling(const Fan& f, const ToricDivisor& d, long a) {
  if (a <= 0) throw ValidationError("scaling factor must be positive");
  auto x = kodaira_dimension(f, d);
  auto y = kodaira_dimension(f, d.scaled(Rational(a)));
  return x.status == KodairaReport::Status::Determined && y.status == KodairaReport::Status::Determined &&
         x.kappa == y.kappa;
}

BigCheck big_check(const Fan& f, const ToricDivisor& d, const std::optional<ToricDivisor>& l) {
  require_complete(f);
  require_size(f, d);
  const int full = static_cast<int>(f.rank());
  auto big = [&](const ToricDivisor& x) { return toric::divisor_polytope(f, x).dimension() == full; };
  BigCheck out;
  out.big = big(d);
  if (!out.big || !l) return out;
  require_size(f, *l);
  for (Rational eps(1); eps.denominator() <= 1024; eps = eps / 2) {
    if (big(d - l->scaled(eps))) {
      out.epsilon = eps;
      break;
    }
  }
  return out;
}

namespace {

using Level = std::set<LatticeVector>;

// Minimal generators per level of a graded semigroup given by its levels
// 1..n (level 0 is the origin alone).
std::map<long, std::size_t> generator_profile(const std::vector<Level>& levels) {
  std::map<long, std::size_t> profile;
  for (std::size_t m = 1; m < levels.size(); ++m) {
    std::size_t count = 0;
    for (const auto& u : levels[m]) {
      bool decomposable = false;
      for (std::size_t m1 = 1; m1 <= m / 2 && !decomposable; ++m1)
        for (const auto& u1 : levels[m1])
          if (levels[m - m1].count(u - u1)) {
            decomposable = true;
            break;
          }
      if (!decomposable) ++count;
    }
    if (count) profile[static_cast<long>(m)] = count;
  }
  return profile;
}

std::optional<long> max_degree(const std::map<long, std::size_t>& p) {
  if (p.empty()) return std::nullopt;
  return p.rbegin()->first;
}

}  // namespace

TruncationReport truncation_probe(const Fan& f, const ToricDivisor& d, long truncation, long levels) {
  require_complete(f);
  require_size(f, d);
  if (truncation < 1 || levels < 1) throw ValidationError("truncation and level bound must be positive");
  std::vector<Level> full(static_cast<std::size_t>(levels) + 1);
  full[0].insert(LatticeVector(std::vector<std::int64_t>(f.rank(), 0)));
  for (long m = 1; m <= levels; ++m) {
    auto pts = lattice_points(toric::divisor_polytope(f, d.scaled(Rational(m)).floor()));
    full[static_cast<std::size_t>(m)] = Level(pts.begin(), pts.end());
  }
  std::vector<Level> truncated{full[0]};
  for (long j = 1; j * truncation <= levels; ++j) truncated.push_back(full[static_cast<std::size_t>(j * truncation)]);

  TruncationReport rep;
  rep.truncation = truncation;
  rep.levels = levels;
  rep.full_profile = generator_profile(full);
  rep.truncated_profile = generator_profile(truncated);
  rep.full_max_degree = max_degree(rep.full_profile);
  rep.truncated_max_degree = max_degree(rep.truncated_profile);
  if (rep.truncated_max_degree)
    rep.consistent = rep.full_max_degree && *rep.truncated_max_degree <= *rep.full_max_degree;
  return rep;
}

std::string series_csv(const PlurigenusSeries& s) {
  std::ostringstream out;
  out << "m,h0\n";
  for (std::size_t i = 0; i < s.values.size(); ++i) out << (i + 1) << ',' << s.values[i] << '\n';
  return out.str();
}

}  // namespace mmp::kappa
