#include "mmp/engine.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace mmp::engine {

std::string to_string(Backend b) { return b == Backend::Toric ? "toric" : "surface"; }

std::string to_string(StepType t) {
  switch (t) {
    case StepType::Divisorial: return "Divisorial";
    case StepType::Small: return "Small";
    case StepType::Fibration: return "Fibration";
  }
  return "?";
}

std::string to_string(TerminalState s) {
  switch (s) {
    case TerminalState::Running: return "Running";
    case TerminalState::MinimalModel: return "MinimalModel";
    case TerminalState::MoriFibreSpace: return "MoriFibreSpace";
    case TerminalState::SmallStop: return "SmallStop";
  }
  return "?";
}

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::First: return "first";
    case Strategy::MostNegative: return "most-negative";
    case Strategy::Interactive: return "interactive";
  }
  return "?";
}

Strategy parse_strategy(const std::string& s) {
  if (s == "first") return Strategy::First;
  if (s == "most-negative") return Strategy::MostNegative;
  if (s == "interactive") return Strategy::Interactive;
  throw ValidationError("unknown strategy '" + s + "'");
}

// ---------------------------------------------------------------------------
// Pair

Pair Pair::toric(toric::Fan fan, RationalVector boundary) {
  if (boundary.empty()) boundary.assign(fan.ray_count(), Rational(0));
  if (boundary.size() != fan.ray_count()) throw ValidationError("boundary needs one coefficient per ray");
  for (const auto& b : boundary)
    if (b < 0 || b > 1) throw ValidationError("boundary coefficients must lie in [0,1]");
  Pair p;
  p.backend_ = Backend::Toric;
  p.fan_ = std::move(fan);
  p.boundary_ = std::move(boundary);
  return p;
}

Pair Pair::surface(surface::SurfaceModel model) {
  Pair p;
  p.backend_ = Backend::Surface;
  p.model_ = std::move(model);
  return p;
}

const toric::Fan& Pair::fan() const {
  if (backend_ != Backend::Toric) throw ValidationError("pair is not toric");
  return fan_;
}

const surface::SurfaceModel& Pair::model() const {
  if (backend_ != Backend::Surface) throw ValidationError("pair is not a surface");
  return model_;
}

std::size_t Pair::dimension() const { return backend_ == Backend::Toric ? fan_.rank() : 2; }

std::size_t Pair::picard_number() const {
  return backend_ == Backend::Toric ? toric::picard_number(fan_) : model_.picard_number();
}

Divisor Pair::log_canonical() const {
  if (backend_ == Backend::Surface) return model_.log_canonical();
  Divisor d;
  for (const auto& b : boundary_) d.push_back(b - 1);
  return d;
}

Divisor Pair::anticanonical() const {
  if (backend_ == Backend::Toric) return Divisor(fan_.ray_count(), Rational(1));
  Divisor d = model_.canonical();
  for (auto& x : d) x = -x;
  return d;
}

std::size_t Pair::divisor_size() const {
  return backend_ == Backend::Toric ? fan_.ray_count() : model_.picard_number();
}

// ---------------------------------------------------------------------------
// Rays

namespace {

std::string wall_label(const toric::WallCurve& w) {
  std::string s = "wall{";
  for (std::size_t i = 0; i < w.wall.size(); ++i) {
    if (i) s += ',';
    s += std::to_string(w.wall[i]);
  }
  return s + "}";
}

void check_divisor(const Pair& p, const Divisor& d) {
  if (d.size() != p.divisor_size())
    throw ValidationError("divisor has " + std::to_string(d.size()) + " entries, expected " +
                          std::to_string(p.divisor_size()));
}

}  // namespace

std::vector<Ray> certified_rays(const Pair& p) {
  std::vector<Ray> out;
  if (p.backend() == Backend::Toric) {
    auto walls = toric::wall_curves(p.fan());
    for (auto& r : toric::toric_mori_rays(p.fan(), walls))
      out.push_back({std::move(r.curve_class), std::move(r.key), r.walls, wall_label(walls[r.walls.front()])});
  } else {
    const auto& m = p.model();
    if (!m.ne_certified()) throw ValidationError("curve list not certified as generating");
    for (auto& r : surface::surface_mori_rays(m)) {
      std::string label = m.curves()[r.curves.front()].label;
      out.push_back({std::move(r.curve_class), std::move(r.key), r.curves, std::move(label)});
    }
  }
  return out;
}

Rational intersect(const Pair& p, const Divisor& d, const Ray& r) {
  check_divisor(p, d);
  if (p.backend() == Backend::Toric) return dot(d, r.curve_class);
  return p.model().dot(d, r.curve_class);
}

std::vector<RayValue> negative_extremal_rays(const Pair& p) {
  auto rays = certified_rays(p);
  auto kb = p.log_canonical();
  std::vector<RayValue> out;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    Rational v = intersect(p, kb, rays[i]);
    if (v < 0) out.push_back({i, rays[i], v});
  }
  std::stable_sort(out.begin(), out.end(), [](const RayValue& a, const RayValue& b) { return a.value < b.value; });
  return out;
}

namespace {

Threshold threshold_over(const Pair& p, const std::vector<RayValue>& neg, const Divisor& c) {
  if (neg.empty()) return {Rational(0), true};
  Rational lambda(0);
  for (const auto& rv : neg) {
    Rational cr = intersect(p, c, rv.ray);
    if (cr <= 0) throw ValidationError("C does not dominate the negative cone");
    lambda = std::max(lambda, -rv.value / cr);
  }
  return {lambda, false};
}

}  // namespace

Threshold nef_threshold(const Pair& p, const Divisor& c) {
  check_divisor(p, c);
  return threshold_over(p, negative_extremal_rays(p), c);
}

// ---------------------------------------------------------------------------
// Steps

namespace {

Divisor push_toric(const toric::ToricContraction& c, const Divisor& d) {
  Divisor out(c.target.ray_count(), Rational(0));
  for (std::size_t i = 0; i < c.ray_map.size(); ++i)
    if (c.ray_map[i]) out[*c.ray_map[i]] = d[i];
  return out;
}

std::string base_name(const toric::Fan& base) {
  switch (base.rank()) {
    case 0: return "point";
    case 1: return "P^1";
    default: return "base of dimension " + std::to_string(base.rank());
  }
}

StepResult toric_step(const Pair& p, const Ray& ray, MMPStep step) {
  const auto& f = p.fan();
  auto walls = toric::wall_curves(f);
  auto rays = toric::toric_mori_rays(f, walls);
  auto it = std::find_if(rays.begin(), rays.end(), [&](const toric::MoriRay& r) { return r.key == ray.key; });
  if (it == rays.end()) throw ValidationError("ray is not a certified ray of this pair");
  auto c = toric::toric_contract(f, *it);
  // relative Picard number one; the small target is not Q-factorial, so its
  // ray count says nothing about its Picard group
  step.rho_after = c.type == toric::ContractionType::Small ? step.rho_before - 1 : toric::picard_number(c.target);
  switch (c.type) {
    case toric::ContractionType::Divisorial: {
      step.type = StepType::Divisorial;
      for (auto i : c.removed_rays) step.removed_rays.push_back(f.rays()[i]);
      step.note = "contracted divisor";
      Pair next = Pair::toric(c.target, push_toric(c, p.toric_boundary()));
      return {std::move(next), std::move(step), [c](const Divisor& d) { return push_toric(c, d); }};
    }
    case toric::ContractionType::Small:
      step.type = StepType::Small;
      step.note = "flipping contraction";
      break;
    case toric::ContractionType::Fibration:
      step.type = StepType::Fibration;
      step.note = base_name(c.target);
      break;
  }
  step.target_fan = c.target;
  return {p, std::move(step), [](const Divisor& d) { return d; }};
}

StepResult surface_step(const Pair& p, const Ray& ray, MMPStep step) {
  const auto& m = p.model();
  for (auto idx : ray.members) {
    if (idx >= m.curves().size()) throw ValidationError("ray refers to a missing curve");
    const auto& cv = m.curves()[idx];
    if (!surface::is_minus_one_curve(m, cv.coords)) continue;
    auto c = surface::castelnuovo_contract(m, cv.coords);
    step.type = StepType::Divisorial;
    step.rho_after = c.model.picard_number();
    step.note = cv.label;
    Pair next = Pair::surface(c.model);
    auto pf = c.pushforward;
    return {std::move(next), std::move(step), [pf](const Divisor& d) { return pf * d; }};
  }
  const auto& cls = ray.curve_class;
  if (m.picard_number() == 1) {
    step.type = StepType::Fibration;
    step.rho_after = 0;
    step.note = "point";
  } else if (m.self_intersection(cls) == 0 && m.dot(m.canonical(), cls) == -2) {
    // a conic-bundle ruling: the fibres move and cover the surface
    step.type = StepType::Fibration;
    step.rho_after = 1;
    step.note = "curve";
  } else {
    throw EngineError("uncontractible with available data");
  }
  return {p, std::move(step), [](const Divisor& d) { return d; }};
}

}  // namespace

StepResult mmp_step(const Pair& p, const Ray& ray) {
  MMPStep step;
  step.ray = ray;
  step.value = intersect(p, p.log_canonical(), ray);
  if (step.value >= 0) throw ValidationError("ray is not (K+B)-negative");
  step.rho_before = p.picard_number();
  return p.backend() == Backend::Toric ? toric_step(p, ray, std::move(step)) : surface_step(p, ray, std::move(step));
}

// ---------------------------------------------------------------------------
// Runs

Run Run::plain(Pair p, Strategy s, std::optional<std::uint64_t> seed, std::size_t budget) {
  Run r;
  r.trace_.strategy = s;
  r.trace_.seed = seed;
  r.trace_.initial = p;
  r.trace_.final_model = std::move(p);
  r.budget_ = budget;
  r.refresh();
  return r;
}

Run Run::scaling(Pair p, Divisor c, Strategy s, std::optional<std::uint64_t> seed, std::size_t budget) {
  check_divisor(p, c);
  Run r;
  r.trace_.scaling = true;
  r.trace_.strategy = s;
  r.trace_.seed = seed;
  r.trace_.scaling_divisor = c;
  r.trace_.initial = p;
  r.trace_.final_model = std::move(p);
  r.c_ = std::move(c);
  r.budget_ = budget;
  r.refresh();
  if (r.lambda_ && *r.lambda_ > 1) throw ValidationError("K+B+C is not nef");
  return r;
}

Run Run::resume(const MMPTrace& trace, std::size_t budget) {
  Run r;
  if (trace.scaling) {
    if (!trace.scaling_divisor) throw ValidationError("scaling trace without a scaling divisor");
    r = scaling(trace.initial, *trace.scaling_divisor, trace.strategy, trace.seed, budget);
  } else {
    r = plain(trace.initial, trace.strategy, trace.seed, budget);
  }
  for (const auto& step : trace.steps) {
    const auto& cands = r.candidates();
    auto it = std::find_if(cands.begin(), cands.end(), [&](const RayValue& c) { return c.ray.key == step.ray.key; });
    if (r.finished() || it == cands.end()) throw EngineError("trace does not resume: recorded ray is not a candidate");
    r.choose(static_cast<std::size_t>(it - cands.begin()));
  }
  if (r.trace().state != trace.state) throw EngineError("trace does not resume: final state differs");
  return r;
}

void Run::refresh() {
  const Pair& p = trace_.final_model;
  candidates_.clear();
  auto neg = negative_extremal_rays(p);
  if (!c_) {
    if (neg.empty()) trace_.state = TerminalState::MinimalModel;
    candidates_ = std::move(neg);
    return;
  }
  auto th = threshold_over(p, neg, *c_);
  if (lambda_ && th.lambda > *lambda_) throw EngineError("scaling threshold increased from " + lambda_->str() + " to " + th.lambda.str());
  lambda_ = th.lambda;
  if (th.already_nef) {
    trace_.state = TerminalState::MinimalModel;
    return;
  }
  Divisor shifted = p.log_canonical();
  for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += th.lambda * (*c_)[i];
  for (auto& rv : neg)
    if (intersect(p, shifted, rv.ray) == 0) candidates_.push_back(std::move(rv));
  if (candidates_.empty()) throw EngineError("no ray attains the scaling threshold");
}

void Run::choose(std::size_t i) {
  if (finished()) throw ValidationError("run already finished in state " + to_string(trace_.state));
  if (i >= candidates_.size())
    throw ValidationError("ray index " + std::to_string(i) + " out of range; " + std::to_string(candidates_.size()) +
                          " candidates");
  if (trace_.steps.size() >= budget_)
    throw BudgetExceeded("step budget of " + std::to_string(budget_) + " exceeded", trace_);
  auto res = mmp_step(trace_.final_model, candidates_[i].ray);
  if (c_) res.step.lambda = lambda_;
  const StepType type = res.step.type;
  trace_.steps.push_back(std::move(res.step));
  if (type == StepType::Fibration) {
    trace_.state = TerminalState::MoriFibreSpace;
    candidates_.clear();
    return;
  }
  if (type == StepType::Small) {
    trace_.state = TerminalState::SmallStop;
    candidates_.clear();
    return;
  }
  if (c_) c_ = res.push(*c_);
  trace_.final_model = std::move(res.next);
  refresh();
}

std::size_t Run::automatic_choice() const {
  if (finished()) throw ValidationError("run already finished in state " + to_string(trace_.state));
  if (trace_.strategy == Strategy::Interactive) throw ValidationError("interactive strategy needs an explicit choice");
  std::vector<std::size_t> order(candidates_.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  if (trace_.seed) {
    // Fisher-Yates driven by the raw engine output, so the order does not
    // depend on the standard library's distribution implementation.
    std::mt19937_64 rng(*trace_.seed + trace_.steps.size());
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng() % i]);
  }
  if (trace_.strategy == Strategy::First) {
    if (trace_.seed) return order.front();
    return *std::min_element(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return candidates_[a].ray.key < candidates_[b].ray.key;
    });
  }
  std::size_t best = order.front();
  for (auto i : order)
    if (candidates_[i].value < candidates_[best].value) best = i;
  return best;
}

namespace {

MMPTrace drive(Run run, const ChoiceCallback& choose) {
  while (!run.finished()) {
    if (choose)
      run.choose(choose(run.candidates()));
    else
      run.advance();
  }
  return run.trace();
}

}  // namespace

MMPTrace run_lmmp(const Pair& p, Strategy s, std::optional<std::uint64_t> seed, const ChoiceCallback& choose,
                  std::size_t budget) {
  return drive(Run::plain(p, s, seed, budget), choose);
}

MMPTrace run_lmmp_scaling(const Pair& p, const Divisor& c, Strategy s, std::optional<std::uint64_t> seed,
                          const ChoiceCallback& choose, std::size_t budget) {
  return drive(Run::scaling(p, c, s, seed, budget), choose);
}

Pair replay(const MMPTrace& trace) {
  Pair p = trace.initial;
  for (const auto& step : trace.steps) {
    auto rays = certified_rays(p);
    auto it = std::find_if(rays.begin(), rays.end(), [&](const Ray& r) { return r.key == step.ray.key; });
    if (it == rays.end()) throw EngineError("trace does not replay: recorded ray is not certified");
    auto res = mmp_step(p, *it);
    if (res.step.type != step.type) throw EngineError("trace does not replay: step type differs");
    p = std::move(res.next);
  }
  return p;
}

// ---------------------------------------------------------------------------
// Thresholds and bounds

RationalityReport rationality_report(const Pair& p, const Divisor& h) {
  check_divisor(p, h);
  auto rays = certified_rays(p);
  if (p.backend() == Backend::Surface) {
    if (surface::nef_ample_check(p.model(), h).verdict != surface::Positivity::Ample)
      throw ValidationError("H is not ample");
  } else {
    for (const auto& r : rays)
      if (intersect(p, h, r) <= 0) throw ValidationError("H is not ample");
  }
  auto neg = negative_extremal_rays(p);
  if (neg.empty()) throw ValidationError("K+B is nef; the rationality threshold is undefined");
  std::optional<Rational> lambda;
  for (const auto& rv : neg) {
    Rational t = intersect(p, h, rv.ray) / -rv.value;
    if (!lambda || t < *lambda) lambda = t;
  }
  return {*lambda, lambda->denominator()};
}

bool cone_bound_check(const MMPTrace& trace, std::size_t d) {
  const Rational lower(-2 * static_cast<long long>(d));
  return std::all_of(trace.steps.begin(), trace.steps.end(),
                     [&](const MMPStep& s) { return s.value >= lower && s.value < 0; });
}

RationalPolytope nef_polytope(const Pair& p, const std::vector<std::size_t>& slots) {
  std::set<std::size_t> distinct(slots.begin(), slots.end());
  if (distinct.size() != slots.size()) throw ValidationError("nef polytope slots must be distinct");
  Divisor base = p.backend() == Backend::Toric ? p.log_canonical() : p.model().canonical();
  std::vector<Divisor> slot_divisors;
  if (p.backend() == Backend::Toric) {
    for (auto s : slots) {
      if (s >= p.fan().ray_count()) throw ValidationError("slot index out of range");
      base[s] = Rational(-1);
      Divisor e(p.fan().ray_count(), Rational(0));
      e[s] = Rational(1);
      slot_divisors.push_back(std::move(e));
    }
  } else {
    const auto& curves = p.model().curves();
    for (auto s : slots) {
      if (s >= curves.size()) throw ValidationError("slot index out of range");
      slot_divisors.push_back(curves[s].coords);
    }
    for (std::size_t i = 0; i < curves.size(); ++i) {
      if (distinct.count(i)) continue;
      for (std::size_t j = 0; j < base.size(); ++j) base[j] += curves[i].boundary * curves[i].coords[j];
    }
  }
  const std::size_t n = slots.size();
  std::vector<Halfspace> hs;
  for (std::size_t k = 0; k < n; ++k) {
    RationalVector lo(n, Rational(0)), hi(n, Rational(0));
    lo[k] = Rational(-1);
    hi[k] = Rational(1);
    hs.push_back({lo, Rational(0)});
    hs.push_back({hi, Rational(1)});
  }
  for (const auto& r : certified_rays(p)) {
    RationalVector normal(n);
    for (std::size_t k = 0; k < n; ++k) normal[k] = -intersect(p, slot_divisors[k], r);
    hs.push_back({std::move(normal), intersect(p, base, r)});
  }
  return RationalPolytope(n, std::move(hs));
}

}  // namespace mmp::engine
