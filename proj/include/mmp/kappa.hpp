#pragma once

// Sections of torus-invariant divisors, Kodaira dimension and bigness on
// complete toric varieties, a section-ring truncation probe, and the closed
// formulas for plane curves, hypersurfaces and divisors on curves.

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "mmp/toric.hpp"

namespace mmp::kappa {

/// Kodaira dimension; an empty value stands for minus infinity.
struct Kappa {
  std::optional<int> value;

  static Kappa minus_infinity() { return {}; }
  static Kappa of(int v) { return {v}; }
  bool is_minus_infinity() const { return !value; }
  std::string str() const { return value ? std::to_string(*value) : "-inf"; }
  friend bool operator==(const Kappa&, const Kappa&) = default;
};

/// (d-1)(d-2)/2; d >= 1.
long plane_curve_genus(long d);
/// Degree of K_Y = (d - n - 1)H|_Y for a hypersurface Y of degree d in P^n.
long hypersurface_canonical_degree(long n, long d);
Kappa kappa_curve(const Rational& degree, bool torsion);

/// h^0(X, floor(mD)) as the number of lattice points of P_{floor(mD)}.
std::size_t section_count(const toric::Fan& f, const toric::ToricDivisor& d, long m);

/// D.C >= 0 for every wall curve of a complete simplicial fan.
bool is_nef(const toric::Fan& f, const toric::ToricDivisor& d);

struct PlurigenusSeries {
  toric::ToricDivisor divisor;
  std::vector<std::size_t> values;  // h^0(floor(mD)) for m = 1..M
  /// Counts at m = step * j, j = 1..M: step clears the denominators of D
  /// and of the vertices of P_D, so these are Ehrhart values of a lattice
  /// polytope.
  long step = 1;
  std::vector<std::size_t> growth_values;
  /// -1 for an all-zero series; unset when the table did not settle.
  std::optional<int> growth_degree;
};

struct KodairaReport {
  enum class Status { Determined, Undetermined };
  Status status = Status::Determined;
  Kappa kappa;
  PlurigenusSeries series;
  bool nef = false;
  /// Dimension of P_D, computed only for nef D; -1 when empty.
  std::optional<int> polytope_dimension;
};

inline constexpr long kDefaultSamples = 12;

/// Two routes: growth degree of the section counts by finite differences and,
/// for nef D, the dimension of P_D. Disagreement throws EngineError.
KodairaReport kodaira_dimension(const toric::Fan& f, const toric::ToricDivisor& d, long samples = kDefaultSamples);

/// kappa(D) == kappa(aD), both determined.
bool check_kappa_scaling(const toric::Fan& f, const toric::ToricDivisor& d, long a);

struct BigCheck {
  bool big = false;
  std::optional<Rational> epsilon;  // D - epsilon L still big
};

/// Big iff P_D is full-dimensional. With L, halves epsilon from 1 down to
/// 2^-10 until D - epsilon L is big.
BigCheck big_check(const toric::Fan& f, const toric::ToricDivisor& d,
                   const std::optional<toric::ToricDivisor>& l = std::nullopt);

struct TruncationReport {
  long truncation = 1;
  long levels = 0;
  std::map<long, std::size_t> full_profile;       // degree -> number of minimal generators
  std::map<long, std::size_t> truncated_profile;  // in the truncated grading
  std::optional<long> full_max_degree;
  std::optional<long> truncated_max_degree;
  /// Every generator degree of the truncation is at most the largest
  /// generator degree of the full ring, within the sampled levels.
  bool consistent = true;
};

/// Minimal generators of S = {(m, u) : u in P_{floor(mD)}, 1 <= m <= M} and
/// of its I-th truncation. Says nothing about finite generation beyond M.
TruncationReport truncation_probe(const toric::Fan& f, const toric::ToricDivisor& d, long truncation, long levels);

/// "m,h0" rows of the plurigenus table.
std::string series_csv(const PlurigenusSeries& s);

}  // namespace mmp::kappa
