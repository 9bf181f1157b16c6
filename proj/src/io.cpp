#include "mmp/io.hpp"

#include <stdexcept>

#include "mmp/errors.hpp"

namespace mmp::io {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ValidationError((path.empty() ? std::string("/") : path) + ": " + message);
}

// RFC 6901 escaping of one reference token.
std::string child(const std::string& path, std::string_view key) {
  std::string out = path + "/";
  for (char c : key) {
    if (c == '~')
      out += "~0";
    else if (c == '/')
      out += "~1";
    else
      out += c;
  }
  return out;
}

std::string child(const std::string& path, std::size_t i) { return path + "/" + std::to_string(i); }

const Json& require_object(const Json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "expected an object");
  return j;
}

const Json& field(const Json& j, const std::string& path, std::string_view key) {
  require_object(j, path);
  auto it = j.find(std::string(key));
  if (it == j.end()) fail(child(path, key), "missing field");
  return *it;
}

const Json* optional_field(const Json& j, std::string_view key) {
  auto it = j.find(std::string(key));
  if (it == j.end() || it->is_null()) return nullptr;
  return &*it;
}

const Json& require_array(const Json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array");
  return j;
}

std::int64_t int_from_json(const Json& j, const std::string& path) {
  if (j.is_number_float()) fail(path, "expected an integer, got a float");
  if (j.is_number_unsigned()) {
    auto v = j.get<std::uint64_t>();
    if (v > static_cast<std::uint64_t>(INT64_MAX)) fail(path, "integer out of range");
    return static_cast<std::int64_t>(v);
  }
  if (!j.is_number_integer()) fail(path, "expected an integer");
  return j.get<std::int64_t>();
}

std::size_t index_from_json(const Json& j, const std::string& path) {
  auto v = int_from_json(j, path);
  if (v < 0) fail(path, "expected a non-negative index");
  return static_cast<std::size_t>(v);
}

bool bool_from_json(const Json& j, const std::string& path) {
  if (!j.is_boolean()) fail(path, "expected true or false");
  return j.get<bool>();
}

std::string string_from_json(const Json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

BigInt bigint_from_json(const Json& j, const std::string& path) {
  auto r = rational_from_json(j, path);
  if (!r.is_integer()) fail(path, "expected an integer");
  return r.numerator();
}

LatticeVector lattice_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  std::vector<std::int64_t> v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(int_from_json(j[i], child(path, i)));
  return LatticeVector(std::move(v));
}

RationalMatrix matrix_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  std::vector<RationalVector> rows;
  for (std::size_t i = 0; i < j.size(); ++i) {
    rows.push_back(rational_vector_from_json(j[i], child(path, i)));
    if (rows.back().size() != rows.front().size()) fail(child(path, i), "rows differ in length");
  }
  if (rows.empty()) fail(path, "expected a nonempty matrix");
  return RationalMatrix::from_rows(rows);
}

// Rethrows constructor validation with the pointer of the object being built.
template <typename F>
auto at_path(const std::string& path, F&& build) {
  try {
    return build();
  } catch (const ValidationError& e) {
    fail(path, e.what());
  }
}

Json optional_json(const std::optional<Rational>& r) { return r ? to_json(*r) : Json(nullptr); }

template <typename E>
E enum_from_json(const Json& j, const std::string& path, std::initializer_list<E> values) {
  auto s = string_from_json(j, path);
  for (E v : values)
    if (engine::to_string(v) == s) return v;
  fail(path, "unknown value \"" + s + "\"");
}

}  // namespace

Json parse(std::string_view text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("/: malformed JSON at byte " + std::to_string(e.byte));
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

Rational rational_from_json(const Json& j, const std::string& path) {
  if (j.is_number_float()) fail(path, "expected an exact rational (\"p/q\" string or integer), got a float");
  if (j.is_number_integer()) return Rational(BigInt(j.dump()));
  if (!j.is_string()) fail(path, "expected a rational (\"p/q\" string or integer)");
  try {
    return Rational::parse(j.get<std::string>());
  } catch (const std::invalid_argument&) {
    fail(path, "malformed rational \"" + j.get<std::string>() + "\"");
  }
}

RationalVector rational_vector_from_json(const Json& j, const std::string& path) {
  require_array(j, path);
  RationalVector v;
  for (std::size_t i = 0; i < j.size(); ++i) v.push_back(rational_from_json(j[i], child(path, i)));
  return v;
}

RationalVector parse_rational_list(std::string_view text) {
  RationalVector out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto next = text.find(',', pos);
    if (next == std::string_view::npos) next = text.size();
    auto item = text.substr(pos, next - pos);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    try {
      out.push_back(Rational::parse(item));
    } catch (const std::invalid_argument&) {
      throw ValidationError("malformed rational \"" + std::string(item) + "\" in list \"" + std::string(text) + "\"");
    }
    pos = next + 1;
  }
  return out;
}

Json to_json(const Rational& r) { return r.str(); }
Json to_json(const BigInt& v) { return v.get_str(); }

Json to_json(const RationalVector& v) {
  Json a = Json::array();
  for (const auto& x : v) a.push_back(x.str());
  return a;
}

Json to_json(const LatticeVector& v) {
  Json a = Json::array();
  for (std::size_t i = 0; i < v.rank(); ++i) a.push_back(v[i]);
  return a;
}

Json to_json(const RationalMatrix& m) {
  Json a = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m.at(r, c).str());
    a.push_back(std::move(row));
  }
  return a;
}

// ---------------------------------------------------------------------------
// Fans

toric::Fan fan_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  auto rank = index_from_json(field(j, path, "rank"), child(path, "rank"));
  const auto& rays = require_array(field(j, path, "rays"), child(path, "rays"));
  std::vector<LatticeVector> rv;
  for (std::size_t i = 0; i < rays.size(); ++i) {
    auto p = child(child(path, "rays"), i);
    rv.push_back(lattice_from_json(rays[i], p));
    if (rv.back().rank() != rank) fail(p, "ray length differs from rank " + std::to_string(rank));
  }
  const auto& cones = require_array(field(j, path, "max_cones"), child(path, "max_cones"));
  std::vector<std::vector<std::size_t>> cv;
  for (std::size_t i = 0; i < cones.size(); ++i) {
    auto p = child(child(path, "max_cones"), i);
    require_array(cones[i], p);
    std::vector<std::size_t> c;
    for (std::size_t k = 0; k < cones[i].size(); ++k) {
      c.push_back(index_from_json(cones[i][k], child(p, k)));
      if (c.back() >= rv.size()) fail(child(p, k), "ray index out of range");
    }
    cv.push_back(std::move(c));
  }
  return at_path(path, [&] { return toric::Fan(rank, std::move(rv), std::move(cv)); });
}

Json to_json(const toric::Fan& f) {
  Json rays = Json::array();
  for (const auto& r : f.rays()) rays.push_back(to_json(r));
  Json cones = Json::array();
  for (const auto& c : f.max_cones()) cones.push_back(c);
  return Json{{"rank", f.rank()}, {"rays", std::move(rays)}, {"max_cones", std::move(cones)}};
}

// ---------------------------------------------------------------------------
// Surfaces

surface::SurfaceModel surface_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  const auto& basis = require_array(field(j, path, "basis"), child(path, "basis"));
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < basis.size(); ++i)
    labels.push_back(string_from_json(basis[i], child(child(path, "basis"), i)));
  auto gram = matrix_from_json(field(j, path, "gram"), child(path, "gram"));
  auto k = rational_vector_from_json(field(j, path, "K"), child(path, "K"));
  const auto& curves = require_array(field(j, path, "curves"), child(path, "curves"));
  std::vector<surface::CurveClass> cv;
  for (std::size_t i = 0; i < curves.size(); ++i) {
    auto p = child(child(path, "curves"), i);
    const auto& c = require_object(curves[i], p);
    surface::CurveClass cc;
    cc.coords = rational_vector_from_json(field(c, p, "coords"), child(p, "coords"));
    if (cc.coords.size() != labels.size()) fail(child(p, "coords"), "length differs from the basis");
    cc.pa = rational_from_json(field(c, p, "pa"), child(p, "pa"));
    if (const auto* f = optional_field(c, "flags")) {
      require_array(*f, child(p, "flags"));
      for (std::size_t k2 = 0; k2 < f->size(); ++k2)
        cc.flags.push_back(string_from_json((*f)[k2], child(child(p, "flags"), k2)));
    }
    if (const auto* l = optional_field(c, "label")) cc.label = string_from_json(*l, child(p, "label"));
    if (const auto* b = optional_field(c, "boundary")) cc.boundary = rational_from_json(*b, child(p, "boundary"));
    cv.push_back(std::move(cc));
  }
  bool certified = false;
  if (const auto* n = optional_field(j, "ne_certified")) certified = bool_from_json(*n, child(path, "ne_certified"));
  return at_path(path, [&] {
    return surface::SurfaceModel(std::move(labels), std::move(gram), std::move(k), std::move(cv), certified);
  });
}

Json to_json(const surface::SurfaceModel& m) {
  Json curves = Json::array();
  for (const auto& c : m.curves()) {
    curves.push_back(Json{{"coords", to_json(c.coords)},
                          {"pa", to_json(c.pa)},
                          {"flags", c.flags},
                          {"label", c.label},
                          {"boundary", to_json(c.boundary)}});
  }
  return Json{{"basis", m.labels()},
              {"gram", to_json(m.gram())},
              {"K", to_json(m.canonical())},
              {"curves", std::move(curves)},
              {"ne_certified", m.ne_certified()}};
}

// ---------------------------------------------------------------------------
// Resolution data

sing::ResolutionData resolution_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  auto q = matrix_from_json(field(j, path, "gram"), child(path, "gram"));
  auto k = rational_vector_from_json(field(j, path, "K_dot_E"), child(path, "K_dot_E"));
  std::vector<sing::BoundarySlot> slots;
  if (const auto* b = optional_field(j, "boundaries")) {
    auto bp = child(path, "boundaries");
    require_array(*b, bp);
    for (std::size_t i = 0; i < b->size(); ++i) {
      auto p = child(bp, i);
      const auto& s = require_object((*b)[i], p);
      sing::BoundarySlot slot;
      slot.name = string_from_json(field(s, p, "name"), child(p, "name"));
      slot.mults = rational_vector_from_json(field(s, p, "mults"), child(p, "mults"));
      if (slot.mults.size() != k.size()) fail(child(p, "mults"), "expected one multiplicity per exceptional curve");
      if (const auto* f = optional_field(s, "strict_coeff_slot"))
        slot.strict_coeff_slot = bool_from_json(*f, child(p, "strict_coeff_slot"));
      slots.push_back(std::move(slot));
    }
  }
  return at_path(path, [&] { return sing::ResolutionData(std::move(q), std::move(k), std::move(slots)); });
}

Json to_json(const sing::ResolutionData& r) {
  Json slots = Json::array();
  for (const auto& s : r.boundaries())
    slots.push_back(Json{{"name", s.name}, {"mults", to_json(s.mults)}, {"strict_coeff_slot", s.strict_coeff_slot}});
  return Json{{"gram", to_json(r.q())}, {"K_dot_E", to_json(r.k_dot_e())}, {"boundaries", std::move(slots)}};
}

// ---------------------------------------------------------------------------
// Pairs and traces

engine::Pair pair_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  if (j.contains("rays")) return engine::Pair::toric(fan_from_json(j, path));
  if (j.contains("basis")) return engine::Pair::surface(surface_from_json(j, path));
  auto backend = string_from_json(field(j, path, "backend"), child(path, "backend"));
  if (backend == "toric") {
    auto fan = fan_from_json(field(j, path, "fan"), child(path, "fan"));
    RationalVector boundary;
    if (const auto* b = optional_field(j, "boundary")) boundary = rational_vector_from_json(*b, child(path, "boundary"));
    return at_path(child(path, "boundary"), [&] { return engine::Pair::toric(std::move(fan), std::move(boundary)); });
  }
  if (backend == "surface") return engine::Pair::surface(surface_from_json(field(j, path, "surface"), child(path, "surface")));
  fail(child(path, "backend"), "expected \"toric\" or \"surface\"");
}

Json to_json(const engine::Pair& p) {
  if (p.backend() == engine::Backend::Toric)
    return Json{{"backend", "toric"}, {"fan", to_json(p.fan())}, {"boundary", to_json(p.toric_boundary())}};
  return Json{{"backend", "surface"}, {"surface", to_json(p.model())}};
}

Json to_json(const engine::Ray& r) {
  Json key = Json::array();
  for (const auto& k : r.key) key.push_back(to_json(k));
  return Json{{"label", r.label}, {"key", std::move(key)}, {"curve_class", to_json(r.curve_class)}, {"members", r.members}};
}

Json to_json(const engine::RayValue& r) {
  return Json{{"index", r.index}, {"ray", to_json(r.ray)}, {"value", to_json(r.value)}};
}

Json to_json(const engine::MMPStep& s) {
  Json removed = Json::array();
  for (const auto& v : s.removed_rays) removed.push_back(to_json(v));
  return Json{{"ray", to_json(s.ray)},
              {"value", to_json(s.value)},
              {"type", engine::to_string(s.type)},
              {"rho_before", s.rho_before},
              {"rho_after", s.rho_after},
              {"lambda", optional_json(s.lambda)},
              {"removed_rays", std::move(removed)},
              {"note", s.note},
              {"target_fan", s.target_fan ? to_json(*s.target_fan) : Json(nullptr)}};
}

Json to_json(const engine::MMPTrace& t) {
  Json steps = Json::array();
  for (const auto& s : t.steps) steps.push_back(to_json(s));
  return Json{{"schema", kTraceSchema},
              {"mode", t.scaling ? "scaling" : "plain"},
              {"strategy", engine::to_string(t.strategy)},
              {"seed", t.seed ? Json(*t.seed) : Json(nullptr)},
              {"scaling_divisor", t.scaling_divisor ? to_json(*t.scaling_divisor) : Json(nullptr)},
              {"initial", to_json(t.initial)},
              {"steps", std::move(steps)},
              {"state", engine::to_string(t.state)},
              {"final", to_json(t.final_model)}};
}

namespace {

engine::Ray ray_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  engine::Ray r;
  if (const auto* l = optional_field(j, "label")) r.label = string_from_json(*l, child(path, "label"));
  const auto& key = require_array(field(j, path, "key"), child(path, "key"));
  for (std::size_t i = 0; i < key.size(); ++i) r.key.push_back(bigint_from_json(key[i], child(child(path, "key"), i)));
  r.curve_class = rational_vector_from_json(field(j, path, "curve_class"), child(path, "curve_class"));
  if (const auto* m = optional_field(j, "members")) {
    require_array(*m, child(path, "members"));
    for (std::size_t i = 0; i < m->size(); ++i)
      r.members.push_back(index_from_json((*m)[i], child(child(path, "members"), i)));
  }
  return r;
}

engine::MMPStep step_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  engine::MMPStep s;
  s.ray = ray_from_json(field(j, path, "ray"), child(path, "ray"));
  s.value = rational_from_json(field(j, path, "value"), child(path, "value"));
  s.type = enum_from_json(field(j, path, "type"), child(path, "type"),
                          {engine::StepType::Divisorial, engine::StepType::Small, engine::StepType::Fibration});
  s.rho_before = index_from_json(field(j, path, "rho_before"), child(path, "rho_before"));
  s.rho_after = index_from_json(field(j, path, "rho_after"), child(path, "rho_after"));
  if (const auto* l = optional_field(j, "lambda")) s.lambda = rational_from_json(*l, child(path, "lambda"));
  if (const auto* rr = optional_field(j, "removed_rays")) {
    require_array(*rr, child(path, "removed_rays"));
    for (std::size_t i = 0; i < rr->size(); ++i)
      s.removed_rays.push_back(lattice_from_json((*rr)[i], child(child(path, "removed_rays"), i)));
  }
  if (const auto* n = optional_field(j, "note")) s.note = string_from_json(*n, child(path, "note"));
  if (const auto* f = optional_field(j, "target_fan")) s.target_fan = fan_from_json(*f, child(path, "target_fan"));
  return s;
}

}  // namespace

engine::MMPTrace trace_from_json(const Json& j, const std::string& path) {
  require_object(j, path);
  auto schema = string_from_json(field(j, path, "schema"), child(path, "schema"));
  if (schema != kTraceSchema) fail(child(path, "schema"), "unsupported trace schema \"" + schema + "\"");
  engine::MMPTrace t;
  auto mode = string_from_json(field(j, path, "mode"), child(path, "mode"));
  if (mode != "plain" && mode != "scaling") fail(child(path, "mode"), "expected \"plain\" or \"scaling\"");
  t.scaling = mode == "scaling";
  try {
    t.strategy = engine::parse_strategy(string_from_json(field(j, path, "strategy"), child(path, "strategy")));
  } catch (const ValidationError& e) {
    fail(child(path, "strategy"), e.what());
  }
  if (const auto* s = optional_field(j, "seed")) {
    if (!s->is_number_unsigned() && !(s->is_number_integer() && s->get<std::int64_t>() >= 0))
      fail(child(path, "seed"), "expected a non-negative integer");
    t.seed = s->get<std::uint64_t>();
  }
  if (const auto* c = optional_field(j, "scaling_divisor"))
    t.scaling_divisor = rational_vector_from_json(*c, child(path, "scaling_divisor"));
  t.initial = pair_from_json(field(j, path, "initial"), child(path, "initial"));
  const auto& steps = require_array(field(j, path, "steps"), child(path, "steps"));
  for (std::size_t i = 0; i < steps.size(); ++i) t.steps.push_back(step_from_json(steps[i], child(child(path, "steps"), i)));
  t.state = enum_from_json(field(j, path, "state"), child(path, "state"),
                           {engine::TerminalState::Running, engine::TerminalState::MinimalModel,
                            engine::TerminalState::MoriFibreSpace, engine::TerminalState::SmallStop});
  t.final_model = pair_from_json(field(j, path, "final"), child(path, "final"));
  return t;
}

// ---------------------------------------------------------------------------
// Reports

Json to_json(const RationalPolytope& p) {
  Json hs = Json::array();
  for (const auto& h : p.halfspaces()) hs.push_back(Json{{"normal", to_json(h.normal)}, {"bound", to_json(h.bound)}});
  Json out{{"ambient_dim", p.ambient_dim()}, {"halfspaces", std::move(hs)}};
  const bool bounded = p.is_bounded();
  out["bounded"] = bounded;
  Json verts = Json::array();
  for (const auto& v : p.vertices()) verts.push_back(to_json(v));
  out["vertices"] = std::move(verts);
  out["dimension"] = bounded ? Json(p.dimension()) : Json(nullptr);
  return out;
}

Json to_json(const sing::DiscrepancyReport& r) {
  return Json{{"discrepancies", to_json(r.discrepancies)},
              {"exceptional_coefficients", to_json(r.exceptional_coefficients)},
              {"strict_coefficients", to_json(r.strict_coefficients)}};
}

Json to_json(const kappa::PlurigenusSeries& s) {
  Json values = Json::array();
  for (std::size_t i = 0; i < s.values.size(); ++i) values.push_back(Json{{"m", i + 1}, {"h0", s.values[i]}});
  Json growth = Json::array();
  for (std::size_t i = 0; i < s.growth_values.size(); ++i)
    growth.push_back(Json{{"m", static_cast<std::size_t>(s.step) * (i + 1)}, {"h0", s.growth_values[i]}});
  return Json{{"divisor", to_json(s.divisor.coefficients)},
              {"values", std::move(values)},
              {"step", s.step},
              {"growth_values", std::move(growth)},
              {"growth_degree", s.growth_degree ? Json(*s.growth_degree) : Json(nullptr)}};
}

Json to_json(const kappa::KodairaReport& r) {
  const bool determined = r.status == kappa::KodairaReport::Status::Determined;
  return Json{{"status", determined ? "determined" : "undetermined"},
              {"kappa", determined ? Json(r.kappa.str()) : Json(nullptr)},
              {"nef", r.nef},
              {"polytope_dimension", r.polytope_dimension ? Json(*r.polytope_dimension) : Json(nullptr)},
              {"series", to_json(r.series)}};
}

Json to_json(const kappa::TruncationReport& r) {
  auto profile = [](const std::map<long, std::size_t>& p) {
    Json a = Json::array();
    for (const auto& [deg, n] : p) a.push_back(Json{{"degree", deg}, {"generators", n}});
    return a;
  };
  auto opt = [](const std::optional<long>& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"truncation", r.truncation},
              {"levels", r.levels},
              {"full_profile", profile(r.full_profile)},
              {"truncated_profile", profile(r.truncated_profile)},
              {"full_max_degree", opt(r.full_max_degree)},
              {"truncated_max_degree", opt(r.truncated_max_degree)},
              {"consistent", r.consistent}};
}

}  // namespace mmp::io
