#pragma once

#include <cstddef>
#include <vector>

#include "mmp/linalg.hpp"

namespace mmp {

/// Affine inequality normal . x <= bound.
struct Halfspace {
  RationalVector normal;
  Rational bound;

  bool satisfied_by(std::span<const Rational> x) const { return dot(normal, x) <= bound; }
  bool tight_at(std::span<const Rational> x) const { return dot(normal, x) == bound; }
};

/// Polyhedron in Q^dim given by inequalities. Vertices are derived on demand
/// from intersections of dim supporting hyperplanes, which is adequate up to
/// dimension four with a few dozen inequalities.
class RationalPolytope {
 public:
  RationalPolytope() = default;
  RationalPolytope(std::size_t dim, std::vector<Halfspace> halfspaces);

  /// Full-dimensional hull of the given points (facets by hyperplanes through
  /// dim affinely independent points). Throws ValidationError when the points
  /// are not full-dimensional.
  static RationalPolytope hull_of(std::size_t dim, const std::vector<RationalVector>& points);

  std::size_t ambient_dim() const { return dim_; }
  const std::vector<Halfspace>& halfspaces() const { return halfspaces_; }

  bool contains(std::span<const Rational> x) const;
  bool is_bounded() const;
  bool is_empty() const { return vertices().empty() && is_bounded(); }

  /// Vertices in lexicographic order. Empty for an empty polytope; for an
  /// unbounded polyhedron only its vertices (if any) are returned.
  std::vector<RationalVector> vertices() const;

  /// Affine dimension; -1 for the empty polytope. Requires boundedness.
  int dimension() const;

 private:
  std::size_t dim_ = 0;
  std::vector<Halfspace> halfspaces_;
};

/// Integral points of a bounded polytope in lexicographic order, by a scan of
/// the vertex bounding box. Throws ValidationError("enumeration requires
/// bounded polytope") otherwise.
std::vector<LatticeVector> lattice_points(const RationalPolytope& p);

/// Number of integral points; same contract as lattice_points.
std::size_t count_lattice_points(const RationalPolytope& p);

}  // namespace mmp
