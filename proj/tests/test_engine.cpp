#include <doctest.h>

#include <random>

#include "mmp/engine.hpp"
#include "mmp/errors.hpp"
#include "oracles.hpp"

using namespace mmp;
using namespace mmp::engine;
using namespace mmp::oracle;

namespace {

Pair f1() { return Pair::toric(toric::hirzebruch(1)); }

const RayValue& ray_labelled(const std::vector<RayValue>& rays, const std::string& label) {
  for (const auto& r : rays)
    if (r.ray.label == label) return r;
  FAIL("no ray labelled " << label);
  return rays.front();
}

// Nefness checked against every wall curve or every stored curve, without the
// Mori-ray extraction.
bool nef_everywhere(const Pair& p, const Divisor& d) {
  if (p.backend() == Backend::Toric) {
    for (const auto& w : toric::wall_curves(p.fan()))
      if (dot(d, w.intersections) < 0) return false;
    return true;
  }
  for (const auto& c : p.model().curves())
    if (p.model().dot(d, c.coords) < 0) return false;
  return true;
}

Divisor combine(const Divisor& a, const Rational& t, const Divisor& b) {
  Divisor out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += t * b[i];
  return out;
}

}  // namespace

TEST_CASE("negative extremal rays") {
  auto rays = negative_extremal_rays(f1());
  REQUIRE(rays.size() == 2);
  CHECK(rays[0].value == -2);
  CHECK(rays[1].value == -1);
  CHECK(ray_labelled(rays, "wall{1}").value == -1);

  CHECK(negative_extremal_rays(Pair::toric(toric::projective_plane())).size() == 1);
  // K + B = 0 with the full toric boundary
  CHECK(negative_extremal_rays(Pair::toric(toric::projective_plane(), {1, 1, 1})).empty());
  // surface side: P^2 with a cubic in the boundary is numerically trivial
  auto p2 = surface::SurfaceModel::del_pezzo(0);
  auto cubic = surface::SurfaceModel(p2.labels(), p2.gram(), p2.canonical(),
                                     {{RationalVector{3}, Rational(1), {}, "cubic", Rational(1)}}, true);
  CHECK(negative_extremal_rays(Pair::surface(cubic)).empty());

  CHECK(negative_extremal_rays(Pair::surface(surface::SurfaceModel::del_pezzo(6))).size() == 27);
  CHECK_THROWS_AS(negative_extremal_rays(Pair::surface(surface::blow_up(p2, {}))), ValidationError);
}

TEST_CASE("nef thresholds") {
  auto p = f1();
  CHECK(nef_threshold(p, p.anticanonical()).lambda == 1);
  // H = s + 2f with s = D_1 the negative section and f = D_0 a fibre
  Divisor h{2, 1, 0, 0};
  CHECK(nef_threshold(p, h).lambda == 2);
  CHECK(rationality_report(p, h).lambda == Rational(1, 2));
  CHECK(rationality_report(p, h).denominator == 2);
  // brute force over a grid of t for max{t : tK + H nef}
  Rational best(0);
  for (int k = 0; k <= 120; ++k) {
    Rational t(k, 60);
    if (nef_everywhere(p, combine(h, t, p.log_canonical()))) best = t;
  }
  CHECK(best == Rational(1, 2));

  auto p2 = Pair::toric(toric::projective_plane());
  CHECK(nef_threshold(p2, Divisor{3, 0, 0}).lambda == 1);
  CHECK(rationality_report(p2, Divisor{1, 0, 0}).lambda == Rational(1, 3));
  CHECK(rationality_report(p2, Divisor{1, 0, 0}).denominator == 3);

  auto f2 = Pair::toric(toric::hirzebruch(2));
  Divisor h2{3, 1, 0, 0};
  REQUIRE(ample_everywhere(f2, h2));
  CHECK(rationality_report(f2, h2).lambda == stern_brocot_threshold(f2, h2, 100));

  auto nef = Pair::toric(toric::projective_plane(), {1, 1, 1});
  CHECK(nef_threshold(nef, Divisor{1, 0, 0}).already_nef);
  CHECK_THROWS_AS(rationality_report(nef, Divisor{1, 0, 0}), ValidationError);
  CHECK_THROWS_AS(rationality_report(p, Divisor{1, 0, 0, 0}), ValidationError);  // not ample
  CHECK_THROWS_WITH_AS(nef_threshold(p, Divisor{0, 1, 0, 0}), "C does not dominate the negative cone",
                       ValidationError);
}

TEST_CASE("single steps") {
  auto p = f1();
  auto rays = negative_extremal_rays(p);
  auto section = mmp_step(p, ray_labelled(rays, "wall{1}").ray);
  CHECK(section.step.type == StepType::Divisorial);
  CHECK(section.step.rho_before == 2);
  CHECK(section.step.rho_after == 1);
  CHECK(toric::lattice_isomorphic(section.next.fan(), toric::projective_plane()));

  auto fibre = mmp_step(p, rays.front().ray);
  CHECK(fibre.step.type == StepType::Fibration);
  CHECK(fibre.step.note == "P^1");
  REQUIRE(fibre.step.target_fan);
  CHECK(fibre.step.target_fan->rank() == 1);
  CHECK(fibre.next == p);

  // surface side: the ruling of F_1 and the exceptional curve
  auto s = Pair::surface(surface::SurfaceModel::del_pezzo(1));
  auto srays = negative_extremal_rays(s);
  REQUIRE(srays.size() == 2);
  auto ruling = mmp_step(s, ray_labelled(srays, "H-E1").ray);
  CHECK(ruling.step.type == StepType::Fibration);
  CHECK(ruling.step.rho_after == 1);
  auto down = mmp_step(s, ray_labelled(srays, "E1").ray);
  CHECK(down.step.type == StepType::Divisorial);
  CHECK(down.next.picard_number() == 1);
  auto point = mmp_step(down.next, negative_extremal_rays(down.next).front().ray);
  CHECK(point.step.type == StepType::Fibration);
  CHECK(point.step.note == "point");
  CHECK(point.step.value == -3);

  // six (-1)-curves in a row
  Pair m = Pair::surface(surface::SurfaceModel::del_pezzo(6));
  for (int i = 0; i < 6; ++i) {
    auto neg = negative_extremal_rays(m);
    auto res = mmp_step(m, neg.back().ray);
    CHECK(res.step.type == StepType::Divisorial);
    CHECK(res.step.rho_after + 1 == res.step.rho_before);
    m = res.next;
  }
  CHECK(m.picard_number() == 1);

  CHECK_THROWS_AS(mmp_step(Pair::toric(toric::projective_plane(), {1, 1, 1}),
                           certified_rays(Pair::toric(toric::projective_plane())).front()),
                  ValidationError);
}

TEST_CASE("uncontractible surface ray") {
  // F_3 with half of the negative section in the boundary: (K+B).s = 1 - 3/2
  const Rational a(3);
  surface::SurfaceModel f3({"f", "s"}, RationalMatrix{{0, 1}, {1, -3}}, RationalVector{-5, -2},
                           {{RationalVector{0, 1}, Rational(0), {}, "s", Rational(1, 2)},
                            {RationalVector{1, 0}, Rational(0), {}, "f", Rational(0)}},
                           true);
  auto p = Pair::surface(f3);
  auto rays = negative_extremal_rays(p);
  auto& s = ray_labelled(rays, "s");
  CHECK(s.value == Rational(-1, 2));
  CHECK_THROWS_WITH_AS(mmp_step(p, s.ray), "uncontractible with available data", EngineError);
}

TEST_CASE("scaling runs") {
  auto p = f1();
  for (auto strategy : {Strategy::First, Strategy::MostNegative}) {
    auto t = run_lmmp_scaling(p, p.anticanonical(), strategy);
    CHECK(t.steps.size() == 1);
    CHECK(t.steps[0].lambda == Rational(1));
    CHECK(t.state != TerminalState::Running);
  }
  CHECK(run_lmmp_scaling(p, p.anticanonical(), Strategy::MostNegative).state == TerminalState::MoriFibreSpace);

  // already nef
  auto nef = Pair::toric(toric::projective_plane(), {1, 1, 1});
  auto empty = run_lmmp_scaling(nef, Divisor{1, 0, 0}, Strategy::First);
  CHECK(empty.steps.empty());
  CHECK(empty.state == TerminalState::MinimalModel);

  // del Pezzo surfaces with C = 10H - sum E_i
  for (std::size_t k = 1; k <= 8; ++k) {
    auto dp = Pair::surface(surface::SurfaceModel::del_pezzo(k));
    Divisor c(k + 1, Rational(-1));
    c[0] = 10;
    auto t = run_lmmp_scaling(dp, c, Strategy::First);
    REQUIRE(t.steps.size() == k + 1);
    for (std::size_t i = 0; i < k; ++i) {
      CHECK(t.steps[i].type == StepType::Divisorial);
      CHECK(t.steps[i].rho_before == k + 1 - i);
      CHECK(t.steps[i].rho_after == k - i);
      CHECK(t.steps[i].lambda == Rational(1));
    }
    CHECK(t.steps[k].type == StepType::Fibration);
    CHECK(t.steps[k].lambda == Rational(3, 10));
    CHECK(t.state == TerminalState::MoriFibreSpace);
    CHECK(t.final_model.picard_number() == 1);
    CHECK(cone_bound_check(t, 2));
  }

  CHECK_THROWS_WITH_AS(Run::scaling(p, Divisor{1, 0, 0, 0}, Strategy::First), "C does not dominate the negative cone",
                       ValidationError);
  CHECK_THROWS_WITH_AS(Run::scaling(p, Divisor{Rational(1, 2), Rational(1, 2), Rational(1, 2), Rational(1, 2)}, Strategy::First), "K+B+C is not nef", ValidationError);
}

TEST_CASE("plain runs, choices and budget") {
  auto dp3 = Pair::surface(surface::SurfaceModel::del_pezzo(3));
  auto t = run_lmmp(dp3, Strategy::First);
  CHECK(t.state == TerminalState::MoriFibreSpace);
  CHECK(cone_bound_check(t, 2));
  CHECK(replay(t) == t.final_model);

  auto run = Run::plain(f1(), Strategy::Interactive);
  CHECK_THROWS_AS(run.advance(), ValidationError);
  CHECK_THROWS_AS(run.choose(7), ValidationError);
  run.choose(1);
  CHECK(run.trace().steps.size() == 1);
  CHECK(run.pair().picard_number() == 1);
  run.choose(0);
  CHECK(run.finished());
  CHECK(run.trace().state == TerminalState::MoriFibreSpace);
  CHECK_THROWS_AS(run.choose(0), ValidationError);

  try {
    run_lmmp(dp3, Strategy::First, std::nullopt, {}, 1);
    FAIL("budget not enforced");
  } catch (const BudgetExceeded& e) {
    CHECK(e.partial().steps.size() == 1);
  }

  // seeds change the tie-break among (-1)-curves but not the outcome shape
  auto dp6 = Pair::surface(surface::SurfaceModel::del_pezzo(6));
  auto a = run_lmmp(dp6, Strategy::First, 1);
  auto b = run_lmmp(dp6, Strategy::First, 1);
  CHECK(a.steps.size() == b.steps.size());
  for (std::size_t i = 0; i < a.steps.size(); ++i) CHECK(a.steps[i].ray.key == b.steps[i].ray.key);
  CHECK(replay(a) == a.final_model);
}

TEST_CASE("toric traces replay and satisfy the cone bound") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    auto p = random_instance(rng);
    if (p.backend() != Backend::Toric) continue;
    auto t = run_lmmp(p, trial % 2 ? Strategy::First : Strategy::MostNegative, rng() % 1000);
    CHECK(replay(t) == t.final_model);
    CHECK(cone_bound_check(t, 2));
    if (t.state == TerminalState::MinimalModel) {
      for (const auto& r : certified_rays(t.final_model))
        CHECK(intersect(t.final_model, t.final_model.log_canonical(), r) >= 0);
    }
  }
  // P^3 stops at a point with K.line = -4 >= -6
  auto p3 = run_lmmp(Pair::toric(toric::projective_space(3)), Strategy::First);
  REQUIRE(p3.steps.size() == 1);
  CHECK(p3.steps[0].value == -4);
  CHECK(p3.steps[0].note == "point");
  CHECK(cone_bound_check(p3, 3));

  MMPTrace synthetic;
  synthetic.steps.push_back(MMPStep{});
  synthetic.steps.back().value = -5;
  CHECK_FALSE(cone_bound_check(synthetic, 2));
}

TEST_CASE("small contraction stops the run") {
  toric::Fan x(3, {{1, 0, 0}, {0, 1, 0}, {-1, -1, 0}, {0, 0, 1}, {1, 1, -1}},
               {{0, 1, 3}, {1, 2, 3}, {0, 2, 3}, {0, 1, 4}, {1, 2, 4}, {0, 2, 4}});
  // the curve of the wall {0,1} satisfies v3 + v4 = v0 + v1, so K.C = 0 and
  // half of D_0 + D_1 in the boundary makes it negative
  auto p = Pair::toric(x, {Rational(1, 2), Rational(1, 2), 0, 0, 0});
  auto rays = negative_extremal_rays(p);
  const auto& flipping = ray_labelled(rays, "wall{0,1}");
  CHECK(flipping.value == -1);
  std::size_t pick = &flipping - rays.data();
  auto t = run_lmmp(p, Strategy::Interactive, std::nullopt, [&](const std::vector<RayValue>&) { return pick; });
  CHECK(t.state == TerminalState::SmallStop);
  REQUIRE(t.steps.size() == 1);
  CHECK(t.steps[0].type == StepType::Small);
  CHECK(t.steps[0].rho_after + 1 == t.steps[0].rho_before);
  REQUIRE(t.steps[0].target_fan);
  CHECK_FALSE(t.steps[0].target_fan->is_simplicial());
  CHECK(t.final_model == p);
}

TEST_CASE("scaling thresholds never increase") {
  std::mt19937_64 rng(5);
  int runs = 0;
  while (runs < 120) {
    auto p = random_instance(rng);
    auto h = random_ample(p, rng);
    auto th = nef_threshold(p, h);
    if (th.already_nef) continue;
    Divisor c = h;
    for (auto& x : c) x *= th.lambda;  // K+B+C nef exactly at the start
    auto strategy = rng() % 2 ? Strategy::First : Strategy::MostNegative;
    auto t = run_lmmp_scaling(p, c, strategy, rng() % 100);
    for (std::size_t i = 1; i < t.steps.size(); ++i) CHECK(*t.steps[i].lambda <= *t.steps[i - 1].lambda);
    CHECK(t.steps.front().lambda == Rational(1));
    CHECK(cone_bound_check(t, p.dimension()));
    ++runs;
  }
}

TEST_CASE("rationality against a Stern-Brocot oracle") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 50; ++trial) {
    auto p = random_instance(rng);
    auto h = random_ample(p, rng);
    auto rep = rationality_report(p, h);
    CHECK(rep.lambda == stern_brocot_threshold(p, h, 10000));
    CHECK(rep.denominator == rep.lambda.denominator());
  }
}

TEST_CASE("nef polytopes") {
  auto p2 = Pair::toric(toric::projective_plane());
  auto poly = nef_polytope(p2, {0, 1, 2});
  CHECK(poly.vertices() == std::vector<RationalVector>{{1, 1, 1}});
  auto f = nef_polytope(f1(), {1});
  CHECK(f.is_empty());

  // surface: P^2 with a conic and a line as boundary slots, (K + a C + b L).H >= 0
  auto base = surface::SurfaceModel::del_pezzo(0);
  surface::SurfaceModel m(base.labels(), base.gram(), base.canonical(),
                          {{RationalVector{2}, Rational(0), {}, "conic", Rational(0)},
                           {RationalVector{1}, Rational(0), {}, "line", Rational(0)}},
                          true);
  auto sp = nef_polytope(Pair::surface(m), {0, 1});
  // 2a + b >= 3 inside the unit square
  CHECK(sp.vertices() == std::vector<RationalVector>{{1, 1}});
  CHECK_THROWS_AS(nef_polytope(p2, {0, 0}), ValidationError);
}
