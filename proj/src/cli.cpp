#include "mmp/cli.hpp"

#include <csignal>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "mmp/engine.hpp"
#include "mmp/errors.hpp"
#include "mmp/io.hpp"
#include "mmp/kappa.hpp"
#include "mmp/report.hpp"
#include "mmp/service.hpp"
#include "mmp/singularities.hpp"
#include "mmp/surface.hpp"
#include "mmp/toric.hpp"

namespace mmp::cli {

using io::Json;

namespace {

std::string read_all(std::istream& s) {
  std::stringstream buf;
  buf << s.rdbuf();
  return buf.str();
}

std::vector<std::size_t> parse_index_list(const std::string& text) {
  std::vector<std::size_t> out;
  if (text.empty()) return out;
  for (const auto& r : io::parse_rational_list(text)) {
    if (!r.is_integer() || r < 0) throw ValidationError("expected non-negative indices, got \"" + text + "\"");
    out.push_back(static_cast<std::size_t>(r.to_int64()));
  }
  return out;
}

// "(d, -m_1, .., -m_k)" as "dH-m1E1-..".
std::string blown_up_plane_label(const std::vector<std::int64_t>& c) {
  std::string s;
  if (c[0] != 0) s = (c[0] == 1 ? std::string() : std::to_string(c[0])) + "H";
  for (std::size_t i = 1; i < c.size(); ++i) {
    if (c[i] == 0) continue;
    const auto a = c[i] < 0 ? -c[i] : c[i];
    s += (c[i] < 0 ? "-" : (s.empty() ? "" : "+")) + (a == 1 ? std::string() : std::to_string(a)) + "E" + std::to_string(i);
  }
  return s.empty() ? "0" : s;
}

// One leaf subcommand: a model argument, --out, and its action.
struct Leaf {
  std::string model;
  std::string out_path;
};

volatile std::sig_atomic_t g_stop = 0;
service::Service* g_service = nullptr;

void on_signal(int) {
  g_stop = 1;
  if (g_service) g_service->stop();
}

}  // namespace

int dispatch(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact minimal model program on toric varieties and rational surfaces", "mmp"};
  app.require_subcommand(1);
  std::function<void()> action;
  std::vector<std::unique_ptr<Leaf>> leaves;

  auto leaf = [&](CLI::App* parent, const std::string& name, const std::string& help, bool needs_model = true) {
    auto* sub = parent->add_subcommand(name, help);
    leaves.push_back(std::make_unique<Leaf>());
    auto* l = leaves.back().get();
    if (needs_model) sub->add_option("model", l->model, "model JSON file; stdin when omitted or -");
    sub->add_option("--out", l->out_path, "write the result here instead of stdout");
    return std::pair{sub, l};
  };
  auto load = [&](const Leaf& l) {
    if (l.model.empty() || l.model == "-") return io::parse(read_all(in));
    std::ifstream f(l.model);
    if (!f) throw ValidationError("cannot read model file " + l.model);
    return io::parse(read_all(f));
  };
  auto emit = [&](const Leaf& l, const std::string& text) {
    if (l.out_path.empty()) {
      out << text;
      return;
    }
    std::ofstream f(l.out_path);
    if (!f) throw ValidationError("cannot write " + l.out_path);
    f << text;
  };
  auto load_fan = [&](const Leaf& l) {
    auto j = load(l);
    if (j.is_object() && j.contains("backend")) {
      auto p = io::pair_from_json(j);
      if (p.backend() != engine::Backend::Toric) throw ValidationError("/backend: expected a toric model");
      return p.fan();
    }
    return io::fan_from_json(j);
  };

  // ---- toric -------------------------------------------------------------
  auto* toric_cmd = app.add_subcommand("toric", "fans: singularities, resolution, Mori cone, contractions");
  toric_cmd->require_subcommand(1);
  {
    auto [sub, l] = leaf(toric_cmd, "check", "regular / simplicial / terminal per cone and for the fan");
    sub->callback([&, l = l] { action = [&, l] { emit(*l, io::dump(report::fan_report(load_fan(*l)))); }; });
  }
  {
    auto [sub, l] = leaf(toric_cmd, "resolve", "resolve by star subdivisions; lists the added rays and discrepancies");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto res = toric::resolve(load_fan(*l));
        Json added = Json::array();
        for (const auto& a : res.added) added.push_back(Json{{"ray", io::to_json(a.v)}, {"discrepancy", io::to_json(a.discrepancy)}});
        emit(*l, io::dump(Json{{"fan", io::to_json(res.fan)}, {"added", std::move(added)}}));
      };
    });
  }
  {
    auto [sub, l] = leaf(toric_cmd, "mori", "extremal rays of the Mori cone with their (K+B)-degrees");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto p = io::pair_from_json(load(*l));
        if (p.backend() != engine::Backend::Toric) throw ValidationError("/backend: expected a toric model");
        auto kb = p.log_canonical();
        Json rays = Json::array();
        auto certified = engine::certified_rays(p);
        for (std::size_t i = 0; i < certified.size(); ++i) {
          auto v = engine::intersect(p, kb, certified[i]);
          rays.push_back(Json{{"index", i}, {"ray", io::to_json(certified[i])}, {"value", io::to_json(v)}, {"negative", v < 0}});
        }
        emit(*l, io::dump(Json{{"count", certified.size()}, {"rays", std::move(rays)}}));
      };
    });
  }
  std::size_t ray = 0;
  std::string compare;
  {
    auto [sub, l] = leaf(toric_cmd, "contract", "contract one extremal ray of the Mori cone");
    sub->add_option("--ray", ray, "index into the Mori rays (see `toric mori`)")->required();
    sub->add_option("--compare", compare, "fan file to test the target against for lattice isomorphism");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto f = load_fan(*l);
        auto rays = toric::toric_mori_rays(f);
        if (ray >= rays.size())
          throw ValidationError("--ray " + std::to_string(ray) + " out of range; " + std::to_string(rays.size()) + " rays");
        auto c = toric::toric_contract(f, rays[ray]);
        Json map = Json::array();
        for (const auto& m : c.ray_map) map.push_back(m ? Json(*m) : Json(nullptr));
        Json result{{"type", toric::to_string(c.type)},
                    {"target", io::to_json(c.target)},
                    {"target_normal_form", toric::normal_form(c.target)},
                    {"ray_map", std::move(map)},
                    {"removed_rays", c.removed_rays},
                    {"removed_walls", c.removed_walls},
                    {"read_only", c.read_only}};
        if (!compare.empty()) {
          Leaf other{compare, {}};
          result["isomorphic_to_compare"] = toric::lattice_isomorphic(c.target, load_fan(other));
        }
        emit(*l, io::dump(result));
      };
    });
  }

  // ---- surface -----------------------------------------------------------
  auto* surface_cmd = app.add_subcommand("surface", "resolutions of surface singularities and blown-up planes");
  surface_cmd->require_subcommand(1);
  std::string coeffs;
  {
    auto [sub, l] = leaf(surface_cmd, "classify", "discrepancies, singularity class and Du Val type of resolution data");
    sub->add_option("--t", coeffs, "boundary coefficients, one per slot (default 0)");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto r = io::resolution_from_json(load(*l));
        RationalVector t = coeffs.empty() ? RationalVector(r.boundaries().size(), Rational(0)) : io::parse_rational_list(coeffs);
        auto rep = sing::crepant_pullback(r, t);
        Json genera = Json::array();
        for (std::size_t i = 0; i < r.size(); ++i) genera.push_back(io::to_json(r.genus(i)));
        Json du_val = nullptr;
        bool all_minus_two = true;
        for (std::size_t i = 0; i < r.size(); ++i) all_minus_two = all_minus_two && r.q().at(i, i) == -2;
        if (all_minus_two && r.size() <= 10) {
          auto dv = sing::du_val_type(r);
          if (dv.is_du_val()) du_val = dv.str();
        }
        Json out_json{{"coefficients", io::to_json(t)},
                      {"genera", std::move(genera)},
                      {"discrepancy", io::to_json(rep)},
                      {"class", sing::to_string(sing::classify(rep))},
                      {"du_val", std::move(du_val)}};
        if (!r.boundaries().empty()) {
          auto dlt = sing::dlt_indication(r, t);
          out_json["dlt"] = Json{{"indicated", dlt.indicated}, {"caveat", dlt.caveat}, {"reason", dlt.reason}};
        }
        emit(*l, io::dump(out_json));
      };
    });
  }
  std::size_t slot = 0;
  {
    auto [sub, l] = leaf(surface_cmd, "lct", "log canonical threshold of one boundary slot");
    sub->add_option("--slot", slot, "boundary slot index (default 0)");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto r = io::resolution_from_json(load(*l));
        if (slot >= r.boundaries().size()) throw ValidationError("--slot " + std::to_string(slot) + " out of range");
        emit(*l, io::dump(Json{{"slot", slot}, {"name", r.boundaries()[slot].name}, {"lct", io::to_json(sing::lc_threshold(r, slot))}}));
      };
    });
  }
  std::string at;
  {
    auto [sub, l] = leaf(surface_cmd, "blowup", "blow up a point lying on listed curves");
    sub->add_option("--at", at, "curve:multiplicity pairs, e.g. 0:1,3:1; empty for a general point");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto m = io::surface_from_json(load(*l));
        std::vector<surface::BlowUpCenter> center;
        std::stringstream ss(at);
        for (std::string item; std::getline(ss, item, ',');) {
          auto colon = item.find(':');
          try {
            if (colon == std::string::npos) throw std::invalid_argument(item);
            center.push_back({std::stoul(item.substr(0, colon)), std::stol(item.substr(colon + 1))});
          } catch (const std::logic_error&) {
            throw ValidationError("--at expects curve:multiplicity pairs, got \"" + item + "\"");
          }
        }
        emit(*l, io::dump(io::to_json(surface::blow_up(m, center))));
      };
    });
  }
  std::size_t curve = 0;
  {
    auto [sub, l] = leaf(surface_cmd, "contract", "Castelnuovo contraction of a stored (-1)-curve");
    sub->add_option("--curve", curve, "curve index")->required();
    sub->callback([&, l = l] {
      action = [&, l] {
        auto m = io::surface_from_json(load(*l));
        if (curve >= m.curves().size()) throw ValidationError("--curve " + std::to_string(curve) + " out of range");
        auto c = surface::castelnuovo_contract(m, m.curves()[curve].coords);
        emit(*l, io::dump(Json{{"model", io::to_json(c.model)}, {"pushforward", io::to_json(c.pushforward)}}));
      };
    });
  }
  std::size_t k = 6;
  int bound = 5;
  bool count_only = false;
  {
    auto [sub, l] = leaf(surface_cmd, "del-pezzo", "P^2 blown up at k <= 8 general points with its certified curves", false);
    sub->add_option("--k", k, "number of points")->required();
    sub->callback([&, l = l] { action = [&, l] { emit(*l, io::dump(io::to_json(surface::SurfaceModel::del_pezzo(k)))); }; });
  }
  {
    auto [sub, l] = leaf(surface_cmd, "lines", "(-1)-classes on P^2 blown up at k general points", false);
    sub->add_option("--k", k, "number of points")->required();
    sub->add_option("--bound", bound, "largest degree d of dH - sum m_i E_i")->required();
    sub->add_flag("--count-only", count_only, "report the count without listing classes");
    sub->callback([&, l = l] {
      action = [&, l] {
        Json result{{"k", k}, {"bound", bound}};
        if (count_only) {
          result["count"] = io::to_json(surface::count_minus_one_classes(k, bound));
        } else {
          auto classes = surface::enumerate_minus_one_classes(k, bound);
          Json list = Json::array();
          for (const auto& c : classes) list.push_back(Json{{"coords", c}, {"label", blown_up_plane_label(c)}});
          result["count"] = std::to_string(classes.size());
          result["classes"] = std::move(list);
        }
        emit(*l, io::dump(result));
      };
    });
  }

  // ---- mmp ---------------------------------------------------------------
  auto* mmp_cmd = app.add_subcommand("mmp", "run the log minimal model program");
  mmp_cmd->require_subcommand(1);
  std::string strategy = "first", choices, trace_path, c_text = "anticanonical";
  std::optional<std::uint64_t> seed;
  std::size_t budget = engine::kDefaultBudget;
  auto run_options = [&](CLI::App* sub) {
    sub->add_option("--strategy", strategy, "first | most-negative | interactive");
    sub->add_option("--seed", seed, "seed for the tie-break order among candidates");
    sub->add_option("--choices", choices, "comma-separated candidate indices used before the strategy");
    sub->add_option("--trace", trace_path, "write the MMP trace JSON here");
    sub->add_option("--budget", budget, "maximal number of steps");
  };
  auto execute = [&](const Leaf& l, engine::Run run) {
    auto picks = parse_index_list(choices);
    auto write_trace = [&](const engine::MMPTrace& t) {
      if (trace_path.empty()) return;
      std::ofstream f(trace_path);
      if (!f) throw ValidationError("cannot write " + trace_path);
      f << io::dump(io::to_json(t));
    };
    try {
      std::size_t next = 0;
      while (!run.finished()) {
        if (next < picks.size())
          run.choose(picks[next++]);
        else
          run.advance();
      }
    } catch (const engine::BudgetExceeded& e) {
      write_trace(e.partial());
      throw;
    } catch (const ValidationError&) {
      write_trace(run.trace());
      throw;
    }
    const auto& t = run.trace();
    write_trace(t);
    Json lambdas = Json::array();
    for (const auto& s : t.steps) lambdas.push_back(s.lambda ? io::to_json(*s.lambda) : Json(nullptr));
    Json steps = Json::array();
    for (const auto& s : t.steps)
      steps.push_back(Json{{"type", engine::to_string(s.type)}, {"ray", s.ray.label}, {"value", io::to_json(s.value)},
                           {"rho_before", s.rho_before}, {"rho_after", s.rho_after}, {"note", s.note}});
    emit(l, io::dump(Json{{"state", engine::to_string(t.state)},
                          {"steps", std::move(steps)},
                          {"lambdas", std::move(lambdas)},
                          {"rho_initial", t.initial.picard_number()},
                          {"rho_final", t.final_model.picard_number()},
                          {"cone_bound_holds", engine::cone_bound_check(t, t.initial.dimension())},
                          {"final", io::to_json(t.final_model)}}));
  };
  {
    auto [sub, l] = leaf(mmp_cmd, "run", "plain LMMP: contract (K+B)-negative rays until none is left");
    run_options(sub);
    sub->callback([&, l = l] {
      action = [&, l] {
        auto p = io::pair_from_json(load(*l));
        execute(*l, engine::Run::plain(std::move(p), engine::parse_strategy(strategy), seed, budget));
      };
    });
  }
  {
    auto [sub, l] = leaf(mmp_cmd, "scale", "LMMP with scaling of a divisor C");
    run_options(sub);
    sub->add_option("--C", c_text, "anticanonical, or comma-separated coefficients of C");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto p = io::pair_from_json(load(*l));
        auto c = c_text == "anticanonical" ? p.anticanonical() : io::parse_rational_list(c_text);
        execute(*l, engine::Run::scaling(std::move(p), std::move(c), engine::parse_strategy(strategy), seed, budget));
      };
    });
  }

  // ---- kappa -------------------------------------------------------------
  auto* kappa_cmd = app.add_subcommand("kappa", "sections and Kodaira dimension of toric divisors");
  kappa_cmd->require_subcommand(1);
  std::string d_text, l_text;
  long m = 1, samples = kappa::kDefaultSamples, truncation = 2, levels = 6;
  bool csv = false;
  auto divisor = [&](const toric::Fan& f, const std::string& text) {
    auto kc = toric::toric_canonical(f);
    if (text == "K") return kc;
    if (text == "-K") return kc.scaled(Rational(-1));
    return toric::ToricDivisor{io::parse_rational_list(text)};
  };
  {
    auto [sub, l] = leaf(kappa_cmd, "count", "h^0(floor(mD)) by lattice points");
    sub->add_option("--D", d_text, "coefficients per ray, or K / -K")->required();
    sub->add_option("--m", m, "multiple");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto f = load_fan(*l);
        auto d = divisor(f, d_text);
        emit(*l, io::dump(Json{{"divisor", io::to_json(d.coefficients)}, {"m", m}, {"h0", kappa::section_count(f, d, m)}}));
      };
    });
  }
  {
    auto [sub, l] = leaf(kappa_cmd, "dim", "Kodaira dimension with the plurigenus table");
    sub->add_option("--D", d_text, "coefficients per ray, or K / -K")->required();
    sub->add_option("--samples", samples, "number of multiples sampled");
    sub->add_option("--L", l_text, "divisor for the bigness margin D - eps L");
    sub->add_flag("--csv", csv, "emit the plurigenus table as CSV (m,h0)");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto f = load_fan(*l);
        auto d = divisor(f, d_text);
        auto rep = kappa::kodaira_dimension(f, d, samples);
        if (csv) {
          emit(*l, kappa::series_csv(rep.series));
          return;
        }
        std::optional<toric::ToricDivisor> ld;
        if (!l_text.empty()) ld = divisor(f, l_text);
        auto big = kappa::big_check(f, d, ld);
        emit(*l, io::dump(Json{{"kodaira", io::to_json(rep)},
                               {"big", big.big},
                               {"epsilon", big.epsilon ? io::to_json(*big.epsilon) : Json(nullptr)}}));
      };
    });
  }
  {
    auto [sub, l] = leaf(kappa_cmd, "probe", "generator degrees of the section ring and of its truncation");
    sub->add_option("--D", d_text, "coefficients per ray, or K / -K")->required();
    sub->add_option("--I", truncation, "truncation index");
    sub->add_option("--M", levels, "highest level sampled");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto f = load_fan(*l);
        emit(*l, io::dump(io::to_json(kappa::truncation_probe(f, divisor(f, d_text), truncation, levels))));
      };
    });
  }

  // ---- polytope ----------------------------------------------------------
  auto* poly_cmd = app.add_subcommand("polytope", "lc and nef polytopes of boundary coefficients");
  poly_cmd->require_subcommand(1);
  {
    auto [sub, l] = leaf(poly_cmd, "lc", "coefficients t in [0,1]^slots with (X, sum t_k B_k) lc");
    sub->callback([&, l = l] {
      action = [&, l] {
        auto r = io::resolution_from_json(load(*l));
        Json names = Json::array();
        for (const auto& b : r.boundaries()) names.push_back(b.name);
        emit(*l, io::dump(Json{{"slots", std::move(names)}, {"polytope", io::to_json(sing::lc_polytope(r))}}));
      };
    });
  }
  std::string slots;
  {
    auto [sub, l] = leaf(poly_cmd, "nef", "coefficients b in [0,1]^slots with K + B nef");
    sub->add_option("--slots", slots, "ray indices (toric) or curve indices (surface)")->required();
    sub->callback([&, l = l] {
      action = [&, l] {
        auto p = io::pair_from_json(load(*l));
        auto idx = parse_index_list(slots);
        emit(*l, io::dump(Json{{"slots", idx}, {"polytope", io::to_json(engine::nef_polytope(p, idx))}}));
      };
    });
  }

  // ---- serve -------------------------------------------------------------
  int port = 8080;
  bool allow_remote = false;
  std::string persist, ui;
  {
    auto* sub = app.add_subcommand("serve", "HTTP bridge for the explorer UI");
    sub->add_option("--port", port, "listening port (0 picks a free one)");
    sub->add_flag("--allow-remote", allow_remote, "listen on all interfaces instead of localhost");
    sub->add_option("--persist", persist, "directory for session snapshots");
    sub->add_option("--ui", ui, "directory of static UI assets served under /ui");
    sub->callback([&] {
      action = [&] {
        service::Options o;
        if (allow_remote) o.host = "0.0.0.0";
        if (!persist.empty()) o.persist_dir = persist;
        if (!ui.empty()) o.ui_dir = ui;
        service::Service svc(o);
        int bound_port = svc.bind(port);
        if (bound_port < 0) throw ValidationError("cannot bind " + o.host + ":" + std::to_string(port));
        err << "listening on http://" << o.host << ":" << bound_port << std::endl;
        g_service = &svc;
        std::signal(SIGINT, on_signal);
        std::signal(SIGTERM, on_signal);
        svc.run();
        g_service = nullptr;
      };
    });
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (action) action();
    return kExitOk;
  } catch (const std::invalid_argument& e) {  // ValidationError and malformed rationals
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const EngineError& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  } catch (const std::overflow_error& e) {
    err << "engine error: " << e.what() << "\n";
    return kExitEngine;
  }
}

}  // namespace mmp::cli
