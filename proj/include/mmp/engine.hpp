#pragma once

// The minimal model program over either backend: a pair is a toric fan with
// boundary coefficients per ray, or a surface model whose curves carry their
// boundary coefficients. Rays come from the certified source of the backend
// (wall curves of the fan, or the certified curve list of the surface).

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "mmp/errors.hpp"
#include "mmp/linalg.hpp"
#include "mmp/polytope.hpp"
#include "mmp/surface.hpp"
#include "mmp/toric.hpp"

namespace mmp::engine {

enum class Backend { Toric, Surface };
std::string to_string(Backend b);

/// Divisors are coefficient vectors: one entry per ray on the toric side,
/// coordinates in the Picard basis on the surface side.
using Divisor = RationalVector;

class Pair {
 public:
  Pair() = default;
  /// Boundary defaults to zero; coefficients must lie in [0,1].
  static Pair toric(toric::Fan fan, RationalVector boundary = {});
  static Pair surface(surface::SurfaceModel model);

  Backend backend() const { return backend_; }
  const toric::Fan& fan() const;
  const surface::SurfaceModel& model() const;
  /// Toric boundary coefficients, one per ray.
  const RationalVector& toric_boundary() const { return boundary_; }

  std::size_t dimension() const;
  std::size_t picard_number() const;
  /// K + B as a divisor of this backend.
  Divisor log_canonical() const;
  Divisor anticanonical() const;
  /// Length of divisor vectors for this backend.
  std::size_t divisor_size() const;

  friend bool operator==(const Pair&, const Pair&) = default;

 private:
  Backend backend_ = Backend::Toric;
  toric::Fan fan_;
  RationalVector boundary_;
  surface::SurfaceModel model_;
};

struct Ray {
  RationalVector curve_class;        // toric: D_rho . C per ray; surface: class coordinates
  std::vector<BigInt> key;           // primitive integral class
  std::vector<std::size_t> members;  // wall indices or curve indices
  std::string label;
};

/// Extremal rays of the certified source, sorted by key. Surface pairs need a
/// certified curve list.
std::vector<Ray> certified_rays(const Pair& p);

/// D . R using the class stored on the ray.
Rational intersect(const Pair& p, const Divisor& d, const Ray& r);

struct RayValue {
  std::size_t index = 0;  // position in certified_rays(p)
  Ray ray;
  Rational value;  // (K+B).R
};

/// Rays with (K+B).R < 0, most negative first, ties by key.
std::vector<RayValue> negative_extremal_rays(const Pair& p);

struct Threshold {
  Rational lambda;
  bool already_nef = false;  // K+B nef, lambda = 0
};

/// Smallest t >= 0 with K+B+tC nef on the certified rays. Throws
/// ValidationError("C does not dominate the negative cone") when some
/// negative ray has C.R <= 0.
Threshold nef_threshold(const Pair& p, const Divisor& c);

enum class StepType { Divisorial, Small, Fibration };
std::string to_string(StepType t);

struct MMPStep {
  Ray ray;
  Rational value;
  StepType type = StepType::Divisorial;
  std::size_t rho_before = 0;
  std::size_t rho_after = 0;
  std::optional<Rational> lambda;
  /// Toric Divisorial steps: generators of the removed rays.
  std::vector<LatticeVector> removed_rays;
  /// Human-readable target: "P^1", "point", "curve", contracted curve label.
  std::string note;
  /// Toric Fibration base or Small contraction fan.
  std::optional<toric::Fan> target_fan;
};

struct StepResult {
  Pair next;  // unchanged for Fibration and Small
  MMPStep step;
  /// Push-forward of divisors to `next`; identity when `next` is unchanged.
  std::function<Divisor(const Divisor&)> push;
};

/// Executes the contraction of a (K+B)-negative certified ray.
StepResult mmp_step(const Pair& p, const Ray& ray);

enum class TerminalState { Running, MinimalModel, MoriFibreSpace, SmallStop };
std::string to_string(TerminalState s);

enum class Strategy { First, MostNegative, Interactive };
std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& s);

struct MMPTrace {
  bool scaling = false;
  Strategy strategy = Strategy::First;
  std::optional<std::uint64_t> seed;
  std::optional<Divisor> scaling_divisor;  // C on the initial model
  Pair initial;
  std::vector<MMPStep> steps;
  TerminalState state = TerminalState::Running;
  Pair final_model;
};

inline constexpr std::size_t kDefaultBudget = 64;

class BudgetExceeded : public EngineError {
 public:
  BudgetExceeded(const std::string& what, MMPTrace partial) : EngineError(what), partial_(std::move(partial)) {}
  const MMPTrace& partial() const { return partial_; }

 private:
  MMPTrace partial_;
};

/// Stepwise LMMP, optionally with scaling of C. Candidates are the negative
/// rays (plain run) or the negative rays with (K+B+lambda C).R = 0 (scaling
/// run), in negative_extremal_rays order.
class Run {
 public:
  static Run plain(Pair p, Strategy s, std::optional<std::uint64_t> seed = {},
                   std::size_t budget = kDefaultBudget);
  /// Requires K+B+C nef, that is lambda <= 1.
  static Run scaling(Pair p, Divisor c, Strategy s, std::optional<std::uint64_t> seed = {},
                     std::size_t budget = kDefaultBudget);
  /// Rebuilds a run from a recorded trace by choosing the recorded rays again.
  /// Throws EngineError when a recorded ray is no longer a candidate.
  static Run resume(const MMPTrace& trace, std::size_t budget = kDefaultBudget);

  bool finished() const { return trace_.state != TerminalState::Running; }
  const std::vector<RayValue>& candidates() const { return candidates_; }
  std::optional<Rational> lambda() const { return lambda_; }
  const Pair& pair() const { return trace_.final_model; }
  const MMPTrace& trace() const { return trace_; }
  const std::optional<Divisor>& scaling_divisor() const { return c_; }

  /// Contracts candidate i. Throws ValidationError for a finished run or an
  /// index out of range, BudgetExceeded when the budget is used up.
  void choose(std::size_t i);
  /// Candidate the strategy would pick; Interactive has no automatic choice.
  std::size_t automatic_choice() const;
  void advance() { choose(automatic_choice()); }

 private:
  Run() = default;
  void refresh();

  MMPTrace trace_;
  std::optional<Divisor> c_;
  std::optional<Rational> lambda_;
  std::vector<RayValue> candidates_;
  std::size_t budget_ = kDefaultBudget;
};

using ChoiceCallback = std::function<std::size_t(const std::vector<RayValue>&)>;

MMPTrace run_lmmp(const Pair& p, Strategy s, std::optional<std::uint64_t> seed = {},
                  const ChoiceCallback& choose = {}, std::size_t budget = kDefaultBudget);
MMPTrace run_lmmp_scaling(const Pair& p, const Divisor& c, Strategy s, std::optional<std::uint64_t> seed = {},
                          const ChoiceCallback& choose = {}, std::size_t budget = kDefaultBudget);

/// Re-executes the recorded rays from trace.initial and returns the final pair.
Pair replay(const MMPTrace& trace);

struct RationalityReport {
  Rational lambda;  // max{t : t(K+B) + H nef}
  BigInt denominator;
};

/// Throws ValidationError when H is not ample or K+B is nef.
RationalityReport rationality_report(const Pair& p, const Divisor& h);

/// Every step value lies in [-2d, 0).
bool cone_bound_check(const MMPTrace& trace, std::size_t d);

/// {b in [0,1]^slots : K + B' + sum b_k S_k nef}, where B' is the boundary
/// with the slot coefficients removed. Slots are ray indices (toric) or curve
/// indices (surface).
RationalPolytope nef_polytope(const Pair& p, const std::vector<std::size_t>& slots);

}  // namespace mmp::engine
