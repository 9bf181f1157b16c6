#pragma once

// Smooth projective surfaces described numerically: a basis of the Picard
// lattice with its intersection form, the canonical class, and a finite list
// of curves declared effective. Blow-ups, Castelnuovo contractions, the
// (-1)-class search on blown-up planes and Kleiman-style positivity tests.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mmp/linalg.hpp"

namespace mmp::surface {

inline constexpr std::string_view kExceptionalLast = "exceptional-last";
inline constexpr std::string_view kBoundaryFlag = "boundary";

struct CurveClass {
  RationalVector coords;
  Rational pa;
  std::vector<std::string> flags;
  std::string label;
  Rational boundary;  // coefficient in B, in [0,1]

  bool has_flag(std::string_view f) const;
  friend bool operator==(const CurveClass&, const CurveClass&) = default;
};

class SurfaceModel {
 public:
  SurfaceModel() = default;
  /// Validates sizes, symmetry, boundary coefficients in [0,1] and that every
  /// stored genus satisfies adjunction. The "boundary" flag is kept in sync
  /// with a nonzero boundary coefficient.
  SurfaceModel(std::vector<std::string> labels, RationalMatrix gram, RationalVector canonical,
               std::vector<CurveClass> curves, bool ne_certified);

  /// P^2 blown up at k <= 8 general points. The curve list holds every
  /// (-1)-curve (and H - E1 when k = 1, H when k = 0) and is certified to
  /// generate NE.
  static SurfaceModel del_pezzo(std::size_t k);

  const std::vector<std::string>& labels() const { return labels_; }
  const RationalMatrix& gram() const { return gram_; }
  const RationalVector& canonical() const { return canonical_; }
  const std::vector<CurveClass>& curves() const { return curves_; }
  bool ne_certified() const { return ne_certified_; }
  std::size_t picard_number() const { return labels_.size(); }

  Rational dot(std::span<const Rational> a, std::span<const Rational> b) const { return gram_.pair(a, b); }
  Rational self_intersection(std::span<const Rational> a) const { return gram_.pair(a, a); }

  /// K + B with B = sum of boundary coefficients times curve classes.
  RationalVector log_canonical() const;

  /// Copy with replaced boundary coefficients (one per curve).
  SurfaceModel with_boundary(const RationalVector& coefficients) const;

  friend bool operator==(const SurfaceModel&, const SurfaceModel&) = default;

 private:
  std::vector<std::string> labels_;
  RationalMatrix gram_;
  RationalVector canonical_;
  std::vector<CurveClass> curves_;
  bool ne_certified_ = false;
};

/// p_a = 1 + (K + C).C / 2.
Rational arithmetic_genus(const SurfaceModel& m, std::span<const Rational> c);

struct BlowUpCenter {
  std::size_t curve;          // index into the curve list
  long multiplicity = 0;
};

/// Blows up a point lying on the listed curves with the given multiplicities.
/// The new basis element E is appended (E^2 = -1, orthogonal to the old basis),
/// K gains +E, each listed curve C becomes C - mult E, and E itself is
/// appended to the curve list. The model loses its NE certification.
SurfaceModel blow_up(const SurfaceModel& m, const std::vector<BlowUpCenter>& center);

/// Curves with E^2 = -1, K.E = -1 and p_a = 0, in list order.
std::vector<CurveClass> find_minus_one_curves(const SurfaceModel& m);
bool is_minus_one_curve(const SurfaceModel& m, std::span<const Rational> c);

struct Contraction {
  SurfaceModel model;
  RationalMatrix pushforward;  // new coordinates = pushforward * old coordinates
  RationalVector push(std::span<const Rational> old_coords) const { return pushforward * old_coords; }
};

/// Contracts a (-1)-curve: classes are projected by D -> D + (D.E)E onto E-perp
/// and rewritten in a basis of that lattice. Curves numerically equal to E are
/// dropped; boundary coefficients travel with their curves. NE certification
/// is kept, since push-forward maps effective generators onto generators.
Contraction castelnuovo_contract(const SurfaceModel& m, std::span<const Rational> e);

/// D = dH - sum m_i E_i on P^2 blown up at k general points with D^2 = -1 and
/// K.D = -1, 0 <= d <= degree_bound. Returned as coordinates (d, -m_1, ..,
/// -m_k), ordered by degree and then lexicographically.
std::vector<std::vector<std::int64_t>> enumerate_minus_one_classes(std::size_t k, int degree_bound);
/// Same count without materialising the permutation orbits.
BigInt count_minus_one_classes(std::size_t k, int degree_bound);

enum class RayVerdict { Extremal, NotExtremalUnlessRho1, Inconclusive };
std::string to_string(RayVerdict v);

RayVerdict extremal_ray_test(const SurfaceModel& m, std::span<const Rational> c);

enum class Positivity { Ample, NefNotAmple, NotNef };
std::string to_string(Positivity p);

struct PositivityReport {
  Positivity verdict = Positivity::NotNef;
  std::optional<std::size_t> witness;  // curve index: negative (not nef) or zero (not ample)
};

/// Kleiman test against the certified curve list.
PositivityReport nef_ample_check(const SurfaceModel& m, std::span<const Rational> d);

/// Extremal ray of NE spanned by stored curves.
struct SurfaceRay {
  RationalVector curve_class;        // class of the first curve in `curves`
  std::vector<std::size_t> curves;   // indices into the curve list
  std::vector<BigInt> key;           // primitive integral class, ordering key
};

/// Extremal rays of the cone spanned by the certified curve list: curves with
/// C^2 < 0 are extremal outright, curves with C^2 > 0 never are when rho > 1,
/// and C^2 = 0 curves are decided by exact cone membership. Sorted by key.
std::vector<SurfaceRay> surface_mori_rays(const SurfaceModel& m);

/// Human-readable class such as "2H-E1-E2" in the model basis.
std::string class_label(const SurfaceModel& m, std::span<const Rational> c);

}  // namespace mmp::surface
