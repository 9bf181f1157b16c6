#pragma once

// Discrepancies of surface pairs computed on a resolution: the exceptional
// configuration is given numerically (intersection matrix, K.E_i) together
// with the multiplicities of boundary divisors along each exceptional curve.

#include <optional>
#include <string>
#include <vector>

#include "mmp/linalg.hpp"
#include "mmp/polytope.hpp"
#include "mmp/toric.hpp"

namespace mmp::sing {

struct BoundarySlot {
  std::string name;
  std::vector<Rational> mults;     // multiplicity of the total transform along each E_i
  bool strict_coeff_slot = true;   // the strict transform is a divisor on the resolution
};

class ResolutionData {
 public:
  /// Validates: q square, symmetric and negative definite, n >= 1, K.E_i
  /// consistent with an integral genus, non-negative multiplicities.
  ResolutionData(RationalMatrix q, RationalVector k_dot_e, std::vector<BoundarySlot> boundaries = {});

  const RationalMatrix& q() const { return q_; }
  const RationalVector& k_dot_e() const { return k_dot_e_; }
  const std::vector<BoundarySlot>& boundaries() const { return boundaries_; }
  std::size_t size() const { return k_dot_e_.size(); }
  /// p_a(E_i) = 1 + (K.E_i + E_i^2) / 2.
  Rational genus(std::size_t i) const;

 private:
  RationalMatrix q_;
  RationalVector k_dot_e_;
  std::vector<BoundarySlot> boundaries_;
};

struct DiscrepancyReport {
  RationalVector discrepancies;          // d(E_i, X, B)
  RationalVector exceptional_coefficients;  // coefficient of E_i in B_Y, equal to -d_i
  RationalVector strict_coefficients;    // coefficient in B_Y of each strict-slot boundary
};

/// Solves (K_Y + B_Y).E_j = 0 for B = sum t_k B_k, one t per boundary slot.
DiscrepancyReport crepant_pullback(const ResolutionData& r, const RationalVector& t);
DiscrepancyReport crepant_pullback(const ResolutionData& r);

enum class SingularityClass { Terminal, Canonical, KLT, LC, NotLC };
std::string to_string(SingularityClass c);

SingularityClass classify(const DiscrepancyReport& rep);

struct NegativityResult {
  enum class Status { EffectiveForced, PreconditionFails, Violation } status = Status::EffectiveForced;
  std::optional<std::size_t> index;  // offending curve
  Rational value;                    // D.E_i for PreconditionFails, the coefficient for Violation
};

/// For D = sum c_i E_i with D.E_i <= 0 for all i, the negativity lemma forces
/// c_i >= 0. Reports a failed precondition or a violating coefficient.
NegativityResult negativity_check(const ResolutionData& r, const RationalVector& d);

struct DuValType {
  char family = 0;  // 'A', 'D' or 'E'; 0 when not Du Val
  std::size_t n = 0;
  bool is_du_val() const { return family != 0; }
  std::string str() const;
};

/// Matches the dual graph of a configuration of (-2)-curves against the ADE
/// trees. Throws ValidationError for more than 10 curves.
DuValType du_val_type(const ResolutionData& r);

/// Largest t with (X, t B_slot) lc. Throws ValidationError("divisor misses the
/// resolution locus") when the slot meets nothing, EngineError when X itself is
/// not lc.
Rational lc_threshold(const ResolutionData& r, std::size_t slot = 0);

struct ContractedCurve {
  Rational discrepancy;
  SingularityClass cls;
};

/// Singularity from contracting a single smooth curve of genus g with E^2 < 0.
ContractedCurve contracted_curve_singularity(long self_intersection, long genus);

/// {t in [0,1]^slots : every coefficient of B_Y is <= 1}.
RationalPolytope lc_polytope(const ResolutionData& r);

struct DltIndication {
  bool indicated = false;
  /// Always set: the verdict is tied to the given resolution, which need not
  /// be the one that certifies or refutes dlt.
  bool caveat = true;
  std::string reason;
};

DltIndication dlt_indication(const ResolutionData& r, const RationalVector& t);

/// Minimal resolution data of a two-dimensional toric cone: the chain of
/// curves from the subdivision, E_i^2 = -b_i and K.E_i = b_i - 2, plus the
/// added rays in chain order. A regular cone has no exceptional curves and
/// yields nullopt.
struct ToricChain {
  ResolutionData data;
  std::vector<LatticeVector> rays;
};
std::optional<ToricChain> resolution_from_cone(const toric::Cone& c);

}  // namespace mmp::sing
