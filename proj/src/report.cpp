#include "mmp/report.hpp"

#include "mmp/kappa.hpp"
#include "mmp/singularities.hpp"
#include "mmp/surface.hpp"

namespace mmp::report {

using io::Json;

namespace {

RationalVector diagonal(const RationalMatrix& q) {
  RationalVector d;
  for (std::size_t k = 0; k < q.rows(); ++k) d.push_back(q.at(k, k));
  return d;
}

Json cone_report(const toric::Fan& f, std::size_t i) {
  auto cone = f.cone(i);
  Json out{{"index", i}, {"rays", f.max_cones()[i]}, {"regular", toric::check_regular(cone)}};
  const bool simplicial = toric::check_simplicial(cone);
  out["simplicial"] = simplicial;
  out["multiplicity"] = simplicial ? io::to_json(toric::multiplicity(cone)) : Json(nullptr);
  Json terminal = nullptr;
  Json certificate = nullptr;
  if (simplicial && cone.dimension() == f.rank()) {
    auto check = toric::check_terminal(cone);
    terminal = check.terminal;
    if (check.certificate) certificate = io::to_json(*check.certificate);
  }
  out["terminal"] = terminal;
  out["certificate"] = certificate;
  Json singularity = nullptr;
  if (f.rank() == 2 && cone.dimension() == 2) {
    if (auto chain = sing::resolution_from_cone(cone)) {
      auto rep = sing::crepant_pullback(chain->data);
      singularity = Json{{"exceptional_curves", chain->data.size()},
                         {"self_intersections", io::to_json(diagonal(chain->data.q()))},
                         {"discrepancies", io::to_json(rep.discrepancies)},
                         {"class", sing::to_string(sing::classify(rep))}};
    }
  }
  out["singularity"] = singularity;
  return out;
}

}  // namespace

Json fan_report(const toric::Fan& f) {
  Json out{{"rank", f.rank()}, {"complete", f.is_complete()}, {"simplicial", f.is_simplicial()}};
  Json cones = Json::array();
  bool regular = true;
  bool decided = true, terminal = true;
  for (std::size_t i = 0; i < f.max_cones().size(); ++i) {
    auto c = cone_report(f, i);
    regular = regular && c["regular"].get<bool>();
    if (c["terminal"].is_null())
      decided = false;
    else
      terminal = terminal && c["terminal"].get<bool>();
    cones.push_back(std::move(c));
  }
  out["regular"] = regular;
  out["terminal"] = decided ? Json(terminal) : Json(nullptr);
  out["picard_number"] = f.is_complete() && f.is_simplicial() ? Json(toric::picard_number(f)) : Json(nullptr);
  out["cones"] = std::move(cones);
  return out;
}

Json pair_report(const engine::Pair& p) {
  Json out{{"backend", engine::to_string(p.backend())},
           {"dimension", p.dimension()},
           {"log_canonical", io::to_json(p.log_canonical())}};
  if (p.backend() == engine::Backend::Toric) {
    const auto& f = p.fan();
    const bool projective_data = f.is_complete() && f.is_simplicial();
    out["rho"] = projective_data ? Json(p.picard_number()) : Json(nullptr);
    out["negative_rays"] = projective_data ? Json(engine::negative_extremal_rays(p).size()) : Json(nullptr);
    out["fan"] = fan_report(f);
    out["kappa_log_canonical"] =
        f.is_complete() ? io::to_json(kappa::kodaira_dimension(f, toric::ToricDivisor{p.log_canonical()})) : Json(nullptr);
    return out;
  }
  const auto& m = p.model();
  out["rho"] = p.picard_number();
  out["smooth"] = true;
  out["ne_certified"] = m.ne_certified();
  out["negative_rays"] = m.ne_certified() ? Json(engine::negative_extremal_rays(p).size()) : Json(nullptr);
  Json lines = Json::array();
  for (const auto& c : surface::find_minus_one_curves(m))
    lines.push_back(c.label.empty() ? surface::class_label(m, c.coords) : c.label);
  out["minus_one_curves"] = std::move(lines);
  Json anti = nullptr;
  if (m.ne_certified()) {
    auto d = p.log_canonical();
    for (auto& x : d) x = -x;
    anti = surface::to_string(surface::nef_ample_check(m, d).verdict);
  }
  out["minus_log_canonical_positivity"] = std::move(anti);
  return out;
}

}  // namespace mmp::report
