// Acceptance runner: one PASS/FAIL line per criterion, with pinned time
// limits. Exits non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "mmp/engine.hpp"
#include "mmp/errors.hpp"
#include "mmp/io.hpp"
#include "mmp/kappa.hpp"
#include "mmp/service.hpp"
#include "mmp/singularities.hpp"
#include "mmp/surface.hpp"
#include "mmp/toric.hpp"
#include "oracles.hpp"

using namespace mmp;
using namespace mmp::oracle;

namespace {

const std::filesystem::path kFixtures = MMP_FIXTURES;

class Checker {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    if (failures_.size() < 4) failures_.push_back(what);
    ++failed_;
  }
  bool ok() const { return failed_ == 0; }
  std::string summary() const {
    std::string s;
    for (const auto& f : failures_) s += (s.empty() ? "" : "; ") + f;
    if (failed_ > failures_.size()) s += "; " + std::to_string(failed_ - failures_.size()) + " more";
    return s;
  }

 private:
  std::vector<std::string> failures_;
  std::size_t failed_ = 0;
};

struct Criterion {
  std::string name;
  double limit_seconds;  // 0: no limit
  std::function<void(Checker&)> body;
};

std::string str(const Rational& r) { return r.str(); }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<engine::MMPTrace> fixture_traces() {
  std::vector<engine::MMPTrace> out;
  std::vector<std::filesystem::path> files;
  for (const auto& e : std::filesystem::directory_iterator(kFixtures / "traces")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) out.push_back(io::trace_from_json(io::parse(slurp(f))));
  return out;
}

long det(const LatticeVector& a, const LatticeVector& b) { return a[0] * b[1] - a[1] * b[0]; }

// A complete fan with three rays summing to zero and unimodular cones is P^2.
bool looks_like_p2(const toric::Fan& f) {
  if (f.rank() != 2 || f.ray_count() != 3 || f.max_cones().size() != 3) return false;
  const auto& r = f.rays();
  for (std::size_t i = 0; i < 2; ++i)
    if (r[0][i] + r[1][i] + r[2][i] != 0) return false;
  for (const auto& c : f.max_cones())
    if (std::abs(det(r[c[0]], r[c[1]])) != 1) return false;
  return true;
}

// (-1)-classes (d; -m) with 0 <= d <= bound, from D^2 = -1 and K.D = -1:
// sum m_i = 3d - 1 and sum m_i^2 = d^2 + 1, searched coordinate by coordinate.
std::set<std::vector<std::int64_t>> minus_one_oracle(std::size_t k, int bound) {
  std::set<std::vector<std::int64_t>> out;
  for (std::int64_t d = 0; d <= bound; ++d) {
    const std::int64_t target_sum = 3 * d - 1, target_sq = d * d + 1;
    const auto cap = static_cast<std::int64_t>(std::sqrt(static_cast<double>(target_sq))) + 1;
    std::vector<std::int64_t> m(k);
    std::function<void(std::size_t, std::int64_t, std::int64_t)> walk = [&](std::size_t i, std::int64_t sum,
                                                                         std::int64_t sq) {
      if (sq > target_sq) return;
      if (i == k) {
        if (sum == target_sum && sq == target_sq) {
          std::vector<std::int64_t> v{d};
          for (auto x : m) v.push_back(-x);
          out.insert(v);
        }
        return;
      }
      for (std::int64_t x = -cap; x <= cap; ++x) {
        m[i] = x;
        walk(i + 1, sum + x, sq + x * x);
      }
    };
    walk(0, 0, 0);
  }
  return out;
}

// A boundary-free single curve E^2 = -a: (K_Y + G).E = 0 with G = g E gives
// g = (a - 2) / a, and the discrepancy is -g.
Rational single_curve_discrepancy(long a) { return Rational(a - 2, -a); }

void discrepancy_formula(Checker& c) {
  for (long a = 1; a <= 6; ++a) {
    auto rep = sing::crepant_pullback(single_curve(a));
    c.expect(rep.discrepancies[0] == single_curve_discrepancy(a),
             "a=" + std::to_string(a) + ": discrepancy " + str(rep.discrepancies[0]));
    auto expected = a == 1 ? SingularityClass::Terminal : a == 2 ? SingularityClass::Canonical : SingularityClass::KLT;
    c.expect(sing::classify(rep) == expected, "a=" + std::to_string(a) + ": class " + sing::to_string(sing::classify(rep)));
  }
}

void toric_surface_agreement(Checker& c) {
  for (long a = 1; a <= 6; ++a) {
    toric::Cone cone({{1, 0}, {-1, a}});
    std::optional<Rational> toric_value;
    for (const auto& d : toric::toric_discrepancies(cone, 4))
      if (d.v == LatticeVector{0, 1}) toric_value = d.discrepancy;
    const auto surface_value = sing::crepant_pullback(single_curve(a)).discrepancies[0];
    c.expect(toric_value.has_value(), "a=" + std::to_string(a) + ": (0,1) not listed");
    if (toric_value)
      c.expect(*toric_value == surface_value,
               "a=" + std::to_string(a) + ": toric " + str(*toric_value) + " vs surface " + str(surface_value));
  }
}

void twenty_seven_lines(Checker& c) {
  auto classes = surface::enumerate_minus_one_classes(6, 5);
  c.expect(classes.size() == 27, "k=6 gives " + std::to_string(classes.size()) + " classes");
  std::set<std::vector<std::int64_t>> got(classes.begin(), classes.end());
  c.expect(got == minus_one_oracle(6, 5), "k=6 classes differ from the direct search");
  auto near = surface::count_minus_one_classes(9, 3), far = surface::count_minus_one_classes(9, 30);
  c.expect(far > near, "k=9: bound 30 gives " + far.get_str() + ", bound 3 gives " + near.get_str());
  c.expect(BigInt(static_cast<long>(minus_one_oracle(9, 3).size())) == near, "k=9 bound 3 differs from the direct search");
}

void surface_mmp_termination(Checker& c) {
  std::mt19937_64 rng(41);
  for (std::size_t k = 1; k <= 8; ++k) {
    auto p = Pair::surface(surface::SurfaceModel::del_pezzo(k));
    // C = 10H - sum E_i: the exceptional curves are the only rays critical at lambda = 1
    Divisor cdiv(k + 1, Rational(-1));
    cdiv[0] = 10;
    for (auto strategy : {engine::Strategy::First, engine::Strategy::MostNegative}) {
      for (int rep = 0; rep < 3; ++rep) {
        auto t = engine::run_lmmp_scaling(p, cdiv, strategy, rng() % 1000);
        const std::string tag = "k=" + std::to_string(k) + " " + engine::to_string(strategy);
        std::size_t divisorial = 0;
        std::size_t rho = k + 1;
        for (const auto& s : t.steps) {
          if (s.type != engine::StepType::Divisorial) break;
          c.expect(s.rho_before == rho && s.rho_after == rho - 1, tag + ": rho does not drop by one");
          rho = s.rho_after;
          ++divisorial;
        }
        c.expect(divisorial == k, tag + ": " + std::to_string(divisorial) + " divisorial steps");
        c.expect(rho == 1, tag + ": stops at rho " + std::to_string(rho));
        for (const auto& s : t.steps) c.expect(s.type != engine::StepType::Small, tag + ": small step");
      }
    }
    // any ample C: every divisorial step drops rho by one and nothing is small
    auto t = engine::run_lmmp_scaling(p, p.anticanonical(), engine::Strategy::First, rng() % 1000);
    for (const auto& s : t.steps) {
      c.expect(s.type != engine::StepType::Small, "k=" + std::to_string(k) + " -K: small step");
      if (s.type == engine::StepType::Divisorial) c.expect(s.rho_after + 1 == s.rho_before, "-K: rho jump");
    }
  }
}

void toric_golden_traces(Checker& c) {
  auto f1 = toric::hirzebruch(1);
  auto rays = toric::toric_mori_rays(f1);
  c.expect(rays.size() == 2, "F1 has " + std::to_string(rays.size()) + " extremal rays");
  c.expect(toric::toric_mori_rays(toric::product_of_lines()).size() == 2, "P1xP1 does not have 2 extremal rays");
  std::set<toric::ContractionType> seen;
  for (const auto& r : rays) {
    auto k = toric::toric_contract(f1, r);
    seen.insert(k.type);
    if (k.type == toric::ContractionType::Divisorial) {
      c.expect(looks_like_p2(k.target), "section contraction is not P^2");
      c.expect(toric::lattice_isomorphic(k.target, toric::projective_plane()), "lattice isomorphism test disagrees");
    }
    if (k.type == toric::ContractionType::Fibration) {
      const auto& base = k.target;
      c.expect(base.rank() == 1 && base.ray_count() == 2 && base.rays()[0][0] == -base.rays()[1][0],
               "fiber contraction base is not P^1");
    }
  }
  c.expect(seen == std::set<toric::ContractionType>{toric::ContractionType::Divisorial, toric::ContractionType::Fibration},
           "F1 contractions are not one divisorial and one fibration");

  // the stored golden traces regenerate byte for byte
  auto pair = Pair::toric(f1);
  for (auto [file, choices] : {std::pair<const char*, std::vector<std::size_t>>{"f1_section.json", {1, 0}},
                               {"f1_fiber.json", {0}}}) {
    auto run = engine::Run::plain(pair, engine::Strategy::Interactive);
    for (auto i : choices) run.choose(i);
    c.expect(io::dump(io::to_json(run.trace())) == slurp(kFixtures / "traces" / file), std::string(file) + " differs");
  }
  auto section = io::trace_from_json(io::parse(slurp(kFixtures / "traces" / "f1_section.json")));
  c.expect(section.steps.size() == 2 && section.steps[0].type == engine::StepType::Divisorial &&
               section.steps[1].type == engine::StepType::Fibration,
           "f1_section step types");
  auto fiber = io::trace_from_json(io::parse(slurp(kFixtures / "traces" / "f1_fiber.json")));
  c.expect(fiber.steps.size() == 1 && fiber.steps[0].type == engine::StepType::Fibration && fiber.steps[0].note == "P^1",
           "f1_fiber is not a fibration over P^1");
}

void rationality(Checker& c) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_instance(rng);
    auto h = random_ample(p, rng);
    auto rep = engine::rationality_report(p, h);
    auto oracle = stern_brocot_threshold(p, h, 10000);
    c.expect(rep.lambda == oracle, "trial " + std::to_string(trial) + ": " + str(rep.lambda) + " vs " + str(oracle));
    c.expect(rep.denominator == rep.lambda.denominator() && rep.denominator > 0, "denominator mismatch");
  }
}

void scaling_monotonicity(Checker& c) {
  std::mt19937_64 rng(103);
  int runs = 0;
  while (runs < 120) {
    auto p = random_instance(rng);
    auto h = random_ample(p, rng);
    auto th = engine::nef_threshold(p, h);
    if (th.already_nef) continue;
    Divisor cdiv = h;
    for (auto& x : cdiv) x *= th.lambda;
    auto strategy = rng() % 2 ? engine::Strategy::First : engine::Strategy::MostNegative;
    auto t = engine::run_lmmp_scaling(p, cdiv, strategy, rng() % 100);
    for (std::size_t i = 1; i < t.steps.size(); ++i)
      c.expect(*t.steps[i].lambda <= *t.steps[i - 1].lambda, "run " + std::to_string(runs) + ": lambda increases");
    ++runs;
  }
  for (const auto& t : fixture_traces()) {
    if (!t.scaling) continue;
    for (std::size_t i = 1; i < t.steps.size(); ++i)
      c.expect(*t.steps[i].lambda <= *t.steps[i - 1].lambda, "fixture trace: lambda increases");
  }
}

void negativity(Checker& c) {
  std::mt19937_64 rng(107);
  int tested = 0, klt_seen = 0;
  while (tested < 100) {
    auto r = random_minimal_config(rng, false);
    if (!r) continue;
    const std::size_t n = r->size();
    auto rep = sing::crepant_pullback(*r);
    const auto& g = rep.exceptional_coefficients;
    for (std::size_t i = 0; i < n; ++i) {
      c.expect(g[i].sign() >= 0, "G has a negative coefficient");
      // (K_Y + G).E_j = 0 recomputed from the matrix
      Rational s = r->k_dot_e()[i];
      for (std::size_t j = 0; j < n; ++j) s += g[j] * r->q().at(j, i);
      c.expect(s == 0, "G is not crepant");
    }
    auto cls = sing::classify(rep);
    if (cls == SingularityClass::KLT || cls == SingularityClass::Canonical || cls == SingularityClass::Terminal) {
      ++klt_seen;
      for (std::size_t i = 0; i < n; ++i) {
        Rational pa = Rational(1) + (r->k_dot_e()[i] + r->q().at(i, i)) / Rational(2);
        c.expect(pa == 0, "KLT report with a curve of genus " + str(pa));
      }
    }
    ++tested;
  }
  c.expect(klt_seen > 0, "no KLT configuration drawn");
}

void du_val(Checker& c) {
  // nodes listed in reverse so the classifier cannot rely on input order
  auto reversed = [](std::size_t n) {
    std::vector<std::size_t> p(n);
    for (std::size_t i = 0; i < n; ++i) p[i] = n - 1 - i;
    return p;
  };
  auto check = [&](const ResolutionData& r, const std::string& name) {
    c.expect(sing::du_val_type(r).str() == name, name + " classified as " + sing::du_val_type(r).str());
    for (const auto& d : sing::crepant_pullback(r).discrepancies) c.expect(d == 0, name + ": discrepancy " + str(d));
  };
  for (std::size_t n = 1; n <= 8; ++n) check(minus_two_graph(n, chain(n), reversed(n)), "A" + std::to_string(n));
  for (std::size_t n = 4; n <= 8; ++n) {
    std::size_t count = 0;
    auto e = star_edges({1, 1, n - 3}, count);
    check(minus_two_graph(count, e, reversed(count)), "D" + std::to_string(n));
  }
  for (std::size_t k : {2, 3, 4}) {
    std::size_t count = 0;
    auto e = star_edges({1, 2, k}, count);
    check(minus_two_graph(count, e, reversed(count)), "E" + std::to_string(count));
  }
  c.expect(!sing::du_val_type(single_curve(3)).is_du_val(), "(-3)-curve accepted as Du Val");
}

void lc_thresholds(Checker& c) {
  auto n = node(), cu = cusp();
  c.expect(sing::lc_threshold(n) == 1, "node lct " + str(sing::lc_threshold(n)));
  c.expect(sing::classify(sing::crepant_pullback(n, {1})) == SingularityClass::LC, "node at 1 is not LC");
  c.expect(!sing::dlt_indication(n, {1}).indicated, "node at 1 indicated dlt");
  c.expect(sing::lc_threshold(cu) == Rational(5, 6), "cusp lct " + str(sing::lc_threshold(cu)));
  c.expect(grid_threshold(cu, 60) == Rational(5, 6), "cusp grid threshold " + str(grid_threshold(cu, 60)));

  // polytope vertices are exact rationals and cut out the lc region
  c.expect(sing::lc_polytope(cu).vertices() == std::vector<RationalVector>{{0}, {Rational(5, 6)}}, "cusp polytope");
  ResolutionData two(cu.q(), cu.k_dot_e(), {{"C", {2, 3, 6}, true}, {"L", {1, 1, 2}, true}});
  auto poly = sing::lc_polytope(two);
  for (const auto& v : poly.vertices())
    c.expect(sing::classify(sing::crepant_pullback(two, v)) != SingularityClass::NotLC, "vertex outside the lc region");
  for (int i = 0; i <= 12; ++i)
    for (int j = 0; j <= 12; ++j) {
      RationalVector t{Rational(i, 12), Rational(j, 12)};
      bool lc = sing::classify(sing::crepant_pullback(two, t)) != SingularityClass::NotLC;
      c.expect(poly.contains(t) == lc, "membership differs at " + str(t[0]) + "," + str(t[1]));
    }
}

void kodaira(Checker& c) {
  auto p2 = toric::projective_plane();
  ToricDivisor h{{1, 0, 0}};
  for (long m = 0; m <= 12; ++m) {
    auto box = box_count(p2, h, m, 20);
    c.expect(box && kappa::section_count(p2, h, m) == *box, "h0(" + std::to_string(m) + "H) differs from the box count");
  }
  c.expect(kappa::kodaira_dimension(p2, h).kappa == kappa::Kappa::of(2), "kappa(H) on P^2");
  c.expect(kappa::kodaira_dimension(toric::product_of_lines(), ToricDivisor{{1, 0, 0, 0}}).kappa == kappa::Kappa::of(1),
           "kappa of the ruling on P1xP1");
  c.expect(kappa::kodaira_dimension(p2, ToricDivisor{{0, 0, 0}}).kappa == kappa::Kappa::of(0), "kappa(0)");
  std::mt19937_64 rng(109);
  for (int t = 0; t < 100; ++t) {
    auto f = random_fan(rng);
    auto d = random_divisor(f, rng, true);
    c.expect(kappa::check_kappa_scaling(f, d, 1 + static_cast<long>(rng() % 4)), "kappa changes under scaling");
  }
  for (const auto& t : fixture_traces()) {
    const auto dim = static_cast<long>(t.initial.dimension());
    c.expect(engine::cone_bound_check(t, t.initial.dimension()), "cone bound fails on a fixture trace");
    for (const auto& s : t.steps) c.expect(s.value >= Rational(-2 * dim) && s.value < 0, "step value " + str(s.value));
    // the stored values are the ones a fresh run computes
    auto again = engine::Run::resume(t);
    for (std::size_t i = 0; i < t.steps.size(); ++i)
      c.expect(again.trace().steps[i].value == t.steps[i].value, "resumed step value differs");
  }
}

void primary_without_secondary(Checker& c) {
  service::Service svc;  // no UI assets
  int port = svc.bind(0);
  c.expect(port > 0, "bind failed");
  if (port <= 0) return;
  std::thread th([&] { svc.run(); });
  while (!svc.running()) std::this_thread::sleep_for(std::chrono::milliseconds(1));
  httplib::Client cli("127.0.0.1", port);
  auto created = cli.Post("/session", slurp(kFixtures / "f1.json"), "application/json");
  c.expect(created && created->status == 201, "session not created");
  if (created && created->status == 201) {
    auto id = io::parse(created->body)["id"].get<std::string>();
    auto rays = cli.Get("/session/" + id + "/rays");
    c.expect(rays && rays->status == 200, "rays endpoint");
    auto step = cli.Post("/session/" + id + "/step", R"({"ray": 1})", "application/json");
    c.expect(step && step->status == 200, "step endpoint");
  }
  auto ui = cli.Get("/ui/index.html");
  c.expect(ui && ui->status == 404, "UI route answered without assets");
  svc.stop();
  th.join();
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"discrepancy formula", 1, discrepancy_formula},
      {"toric/surface agreement", 1, toric_surface_agreement},
      {"27 lines", 10, twenty_seven_lines},
      {"surface MMP termination", 5, surface_mmp_termination},
      {"toric MMP golden traces", 0, toric_golden_traces},
      {"rationality", 0, rationality},
      {"scaling monotonicity", 0, scaling_monotonicity},
      {"negativity/minimal resolution", 0, negativity},
      {"Du Val", 0, du_val},
      {"lc thresholds", 0, lc_thresholds},
      {"Kodaira dimension", 10, kodaira},
      {"primary suite without secondary component", 0, primary_without_secondary},
  };
  int failed = 0;
  for (const auto& cr : criteria) {
    Checker c;
    const auto start = std::chrono::steady_clock::now();
    try {
      cr.body(c);
    } catch (const std::exception& e) {
      c.expect(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (cr.limit_seconds > 0 && secs > cr.limit_seconds) {
      std::ostringstream s;
      s << "took " << secs << " s, limit " << cr.limit_seconds << " s";
      c.expect(false, s.str());
    }
    std::ostringstream line;
    line << (c.ok() ? "PASS" : "FAIL") << "  " << cr.name << " (" << static_cast<long>(secs * 1000) << " ms)";
    if (!c.ok()) line << ": " << c.summary();
    std::cout << line.str() << "\n";
    if (!c.ok()) ++failed;
  }
  std::cout << (failed == 0 ? "all criteria pass" : std::to_string(failed) + " criteria fail") << "\n";
  return failed == 0 ? 0 : 1;
}
