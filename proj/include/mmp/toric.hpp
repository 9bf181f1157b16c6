#pragma once

// Toric varieties as fans: cone tests, wall curves and their intersection
// numbers, the Mori cone, extremal contractions, star subdivisions and
// divisor polytopes. Ambient rank is capped at 4.

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "mmp/linalg.hpp"
#include "mmp/polytope.hpp"

namespace mmp::toric {

inline constexpr std::size_t kMaxRank = 4;

/// Strongly convex rational polyhedral cone given by primitive,
/// pairwise non-proportional ray generators.
class Cone {
 public:
  /// ambient_rank is only needed for the zero cone (no rays).
  explicit Cone(std::vector<LatticeVector> rays, std::size_t ambient_rank = 0);

  const std::vector<LatticeVector>& rays() const { return rays_; }
  std::size_t ambient_rank() const { return ambient_; }
  /// Dimension of the linear span of the rays.
  std::size_t dimension() const;
  bool contains(const LatticeVector& v) const;

 private:
  std::vector<LatticeVector> rays_;
  std::size_t ambient_ = 0;
};

bool check_simplicial(const Cone& c);
/// Rays of every face extend to a lattice basis.
bool check_regular(const Cone& c);

/// Multiplicity of a simplicial cone: index of the lattice generated by its
/// rays in the saturated lattice of their span.
BigInt multiplicity(const Cone& c);

/// The unique m with m(P_i) = 1 on all rays of a simplicial full-dimensional
/// cone. Throws ValidationError otherwise.
RationalVector canonical_functional(const Cone& c);

struct TerminalCheck {
  bool terminal = false;
  std::optional<LatticeVector> certificate;  // lattice point with m <= 1 that is not a ray
  RationalVector functional;
};

/// Terminality: every nonzero lattice point v of the cone with m(v) <= 1 is a
/// ray generator. The search runs over conv{0, P_1..P_d}.
TerminalCheck check_terminal(const Cone& c);

struct ToricDiscrepancy {
  LatticeVector v;
  Rational discrepancy;  // m(v) - 1
};

/// Discrepancies m(v) - 1 of the divisors given by primitive non-ray lattice
/// points v of the cone with m(v) <= height_bound, lexicographic in v.
std::vector<ToricDiscrepancy> toric_discrepancies(const Cone& c, int height_bound);

/// Fan given by its rays and maximal cones (lists of ray indices).
class Fan {
 public:
  Fan() = default;
  Fan(std::size_t rank, std::vector<LatticeVector> rays, std::vector<std::vector<std::size_t>> max_cones);
  static Fan from_cone(const Cone& c);

  std::size_t rank() const { return rank_; }
  const std::vector<LatticeVector>& rays() const { return rays_; }
  const std::vector<std::vector<std::size_t>>& max_cones() const { return max_cones_; }
  std::size_t ray_count() const { return rays_.size(); }
  Cone cone(std::size_t i) const;

  bool is_complete() const { return complete_; }
  bool is_simplicial() const { return simplicial_; }
  std::optional<std::size_t> ray_index(const LatticeVector& v) const;

  friend bool operator==(const Fan&, const Fan&) = default;

 private:
  std::size_t rank_ = 0;
  std::vector<LatticeVector> rays_;
  std::vector<std::vector<std::size_t>> max_cones_;
  bool complete_ = false;
  bool simplicial_ = false;
};

Fan projective_plane();
/// Hirzebruch surface F_a: rays (1,0), (0,1), (-1,a), (0,-1).
Fan hirzebruch(int a);
Fan product_of_lines();
/// Projective space P^d.
Fan projective_space(std::size_t d);

/// Coefficient per ray of a torus-invariant Q-divisor.
struct ToricDivisor {
  RationalVector coefficients;

  ToricDivisor scaled(const Rational& k) const;
  ToricDivisor floor() const;
  friend ToricDivisor operator+(const ToricDivisor& a, const ToricDivisor& b);
  friend ToricDivisor operator-(const ToricDivisor& a, const ToricDivisor& b);
  friend bool operator==(const ToricDivisor&, const ToricDivisor&) = default;
};

ToricDivisor toric_canonical(const Fan& f);

std::size_t picard_number(const Fan& f);

/// Star subdivision at a primitive vector of the support. Subdividing at an
/// existing ray returns the fan unchanged; the new ray is appended last.
Fan star_subdivision(const Fan& f, const LatticeVector& v);

/// Curve of a codimension-one cone of a complete simplicial fan.
struct WallCurve {
  std::vector<std::size_t> wall;      // ray indices of the wall
  std::size_t left = 0;               // ray of the first adjacent cone not on the wall
  std::size_t right = 0;              // ray of the second adjacent cone not on the wall
  std::vector<BigInt> relation;       // primitive integral relation, one entry per ray
  RationalVector intersections;       // D_rho . C for every ray rho
};

std::vector<WallCurve> wall_curves(const Fan& f);
Rational intersect(const ToricDivisor& d, const WallCurve& c);
Rational intersect(const ToricDivisor& d, std::span<const Rational> curve_class);

/// Extremal ray of NE(X): the wall curves whose classes lie on it.
struct MoriRay {
  RationalVector curve_class;       // class of the first wall in `walls`
  std::vector<std::size_t> walls;   // indices into wall_curves(f)
  std::vector<BigInt> key;          // primitive integral class, ordering key
};

/// Extremal rays of the cone spanned by all wall-curve classes, sorted by key.
std::vector<MoriRay> toric_mori_rays(const Fan& f);
std::vector<MoriRay> toric_mori_rays(const Fan& f, const std::vector<WallCurve>& walls);

enum class ContractionType { Divisorial, Small, Fibration };
std::string to_string(ContractionType t);

struct ToricContraction {
  ContractionType type = ContractionType::Divisorial;
  /// Divisorial: the contracted fan. Small: the non-simplicial fan of the
  /// flipping contraction (read-only). Fibration: the base fan in the
  /// quotient lattice.
  Fan target;
  std::vector<std::optional<std::size_t>> ray_map;  // old ray -> target ray
  std::vector<std::size_t> removed_rays;
  std::vector<std::size_t> removed_walls;
  bool read_only = false;
};

ToricContraction toric_contract(const Fan& f, const MoriRay& ray);

/// P_D = { u : <u, v_rho> >= -a_rho for all rays }.
RationalPolytope divisor_polytope(const Fan& f, const ToricDivisor& d);

/// GL(d, Z)-invariant normal form; equal forms iff lattice-isomorphic fans.
std::string normal_form(const Fan& f);
bool lattice_isomorphic(const Fan& a, const Fan& b);

struct ToricResolution {
  Fan fan;
  std::vector<ToricDiscrepancy> added;  // in insertion order
};

/// Resolves all maximal cones by star subdivisions at lowest-height lattice
/// points. For surface cones this produces the minimal resolution.
ToricResolution resolve(const Fan& f);

}  // namespace mmp::toric
