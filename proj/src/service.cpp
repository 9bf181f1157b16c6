#include "mmp/service.hpp"

#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include <httplib.h>

#include "mmp/errors.hpp"
#include "mmp/report.hpp"

namespace mmp::service {

using io::Json;

namespace {

struct HttpError {
  int status;
  Json body;
};

Json error_body(const std::string& kind, const std::string& message) {
  return Json{{"error", Json{{"kind", kind}, {"message", message}}}};
}

Json optional_rational(const std::optional<Rational>& r) { return r ? io::to_json(*r) : Json(nullptr); }

}  // namespace

Json candidates_json(const engine::Run& run) {
  Json a = Json::array();
  for (std::size_t j = 0; j < run.candidates().size(); ++j) {
    auto c = io::to_json(run.candidates()[j]);
    c["choice"] = j;
    a.push_back(std::move(c));
  }
  return a;
}

// ---------------------------------------------------------------------------

struct Session {
  explicit Session(engine::Run r, std::string parent_id = {}) : run(std::move(r)), parent(std::move(parent_id)) {}
  std::mutex mu;
  engine::Run run;
  std::string parent;
};

struct Service::Impl {
  Options options;
  httplib::Server server;
  mutable std::mutex map_mu;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::mt19937_64 ids{std::random_device{}()};
  bool bound = false;

  explicit Impl(Options o) : options(std::move(o)) {
    if (options.persist_dir) load_snapshots();
    install_routes();
  }

  // -- sessions ------------------------------------------------------------

  std::string fresh_id() {
    for (;;) {
      std::ostringstream s;
      s << std::hex << ids();
      if (!sessions.count(s.str())) return s.str();
    }
  }

  std::string add(std::shared_ptr<Session> s) {
    std::lock_guard lk(map_mu);
    auto id = fresh_id();
    sessions.emplace(id, std::move(s));
    return id;
  }

  std::shared_ptr<Session> find(const std::string& id) const {
    std::lock_guard lk(map_mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw HttpError{404, error_body("not_found", "unknown session " + id)};
    return it->second;
  }

  std::size_t clones_of(const std::string& id) const {
    std::lock_guard lk(map_mu);
    std::size_t n = 0;
    for (const auto& [k, s] : sessions)
      if (s->parent == id) ++n;
    return n;
  }

  // -- persistence ---------------------------------------------------------

  std::filesystem::path snapshot_path(const std::string& id) const { return *options.persist_dir / (id + ".json"); }

  void persist(const std::string& id, const Session& s) const {
    if (!options.persist_dir) return;
    Json snap{{"id", id}, {"parent", s.parent}, {"trace", io::to_json(s.run.trace())}};
    auto path = snapshot_path(id);
    auto tmp = path;
    tmp += ".tmp";
    {
      std::ofstream f(tmp);
      f << io::dump(snap);
    }
    std::filesystem::rename(tmp, path);
  }

  void forget(const std::string& id) const {
    if (options.persist_dir) std::filesystem::remove(snapshot_path(id));
  }

  void load_snapshots() {
    std::filesystem::create_directories(*options.persist_dir);
    for (const auto& entry : std::filesystem::directory_iterator(*options.persist_dir)) {
      if (entry.path().extension() != ".json") continue;
      try {
        std::ifstream f(entry.path());
        std::stringstream text;
        text << f.rdbuf();
        auto snap = io::parse(text.str());
        auto run = engine::Run::resume(io::trace_from_json(snap.at("trace"), "/trace"));
        sessions.emplace(snap.at("id").get<std::string>(),
                         std::make_shared<Session>(std::move(run), snap.value("parent", std::string())));
      } catch (const std::exception& e) {
        std::cerr << "skipping snapshot " << entry.path() << ": " << e.what() << "\n";
      }
    }
  }

  // -- payloads ------------------------------------------------------------

  static Json state_json(const std::string& id, const Session& s) {
    const auto& run = s.run;
    const auto& t = run.trace();
    return Json{{"id", id},
                {"parent", s.parent.empty() ? Json(nullptr) : Json(s.parent)},
                {"backend", engine::to_string(run.pair().backend())},
                {"mode", t.scaling ? "scaling" : "plain"},
                {"strategy", engine::to_string(t.strategy)},
                {"state", engine::to_string(t.state)},
                {"finished", run.finished()},
                {"rho", run.pair().picard_number()},
                {"steps", t.steps.size()},
                {"lambda", optional_rational(run.lambda())},
                {"model", io::to_json(run.pair())},
                {"candidates", candidates_json(run)},
                {"last_step", t.steps.empty() ? Json(nullptr) : io::to_json(t.steps.back())}};
  }

  static Json body_of(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    auto j = io::parse(req.body);
    if (!j.is_object()) throw ValidationError("/: expected an object");
    return j;
  }

  static std::size_t ray_index(const Json& body) {
    auto it = body.find("ray");
    if (it == body.end()) throw ValidationError("/ray: missing field");
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0)
      throw ValidationError("/ray: expected a non-negative integer");
    return it->get<std::size_t>();
  }

  static engine::Strategy strategy_of(const Json& body) {
    auto it = body.find("strategy");
    if (it == body.end() || it->is_null()) return engine::Strategy::Interactive;
    if (!it->is_string()) throw ValidationError("/strategy: expected a string");
    return engine::parse_strategy(it->get<std::string>());
  }

  static std::optional<std::uint64_t> seed_of(const Json& body) {
    auto it = body.find("seed");
    if (it == body.end() || it->is_null()) return std::nullopt;
    if (!it->is_number_unsigned()) throw ValidationError("/seed: expected a non-negative integer");
    return it->get<std::uint64_t>();
  }

  static void choose(Session& s, std::size_t i) {
    if (s.run.finished())
      throw HttpError{409, Json{{"error", Json{{"kind", "conflict"},
                                               {"message", "run already finished in state " +
                                                               engine::to_string(s.run.trace().state)}}},
                                {"state", engine::to_string(s.run.trace().state)}}};
    if (i >= s.run.candidates().size())
      throw HttpError{409, Json{{"error", Json{{"kind", "conflict"},
                                               {"message", "ray index " + std::to_string(i) +
                                                               " is not a candidate"}}},
                                {"candidates", candidates_json(s.run)}}};
    s.run.choose(i);
  }

  static void drive(engine::Run& run) {
    if (run.trace().strategy == engine::Strategy::Interactive) return;
    while (!run.finished()) run.advance();
  }

  // -- routes --------------------------------------------------------------

  struct Reply {
    int status = 200;
    Json body;
    std::optional<std::string> raw;  // sent verbatim instead of body
  };

  template <typename F>
  void route(const std::string& method, const std::string& pattern, F handler) {
    auto wrapped = [handler](const httplib::Request& req, httplib::Response& res) {
      Reply reply;
      try {
        reply = handler(req);
      } catch (const HttpError& e) {
        reply = {e.status, e.body, {}};
      } catch (const engine::BudgetExceeded& e) {
        reply = {422, error_body("budget", e.what()), {}};
      } catch (const ValidationError& e) {
        reply = {400, error_body("validation", e.what()), {}};
      } catch (const EngineError& e) {
        reply = {422, error_body("engine", e.what()), {}};
      } catch (const std::exception& e) {
        reply = {500, error_body("internal", e.what()), {}};
      }
      res.status = reply.status;
      res.set_content(reply.raw ? *reply.raw : io::dump(reply.body), "application/json");
    };
    if (method == "GET")
      server.Get(pattern, wrapped);
    else if (method == "POST")
      server.Post(pattern, wrapped);
    else
      server.Delete(pattern, wrapped);
  }

  void install_routes() {
    route("POST", "/session", [this](const httplib::Request& req) {
      auto body = io::parse(req.body);
      engine::Strategy strategy = engine::Strategy::Interactive;
      std::optional<std::uint64_t> seed;
      engine::Pair pair;
      if (body.is_object() && body.contains("model")) {
        strategy = strategy_of(body);
        seed = seed_of(body);
        pair = io::pair_from_json(body["model"], "/model");
      } else {
        pair = io::pair_from_json(body);
      }
      auto run = engine::Run::plain(std::move(pair), strategy, seed);
      drive(run);
      auto s = std::make_shared<Session>(std::move(run));
      auto id = add(s);
      std::lock_guard lk(s->mu);
      persist(id, *s);
      return Reply{201, state_json(id, *s), {}};
    });

    route("GET", R"(/session/([^/]+))", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      std::lock_guard lk(s->mu);
      return Reply{200, state_json(id, *s), {}};
    });

    route("GET", R"(/session/([^/]+)/rays)", [this](const httplib::Request& req) {
      auto s = find(req.matches[1].str());
      std::lock_guard lk(s->mu);
      const auto& p = s->run.pair();
      auto kb = p.log_canonical();
      Json rays = Json::array();
      auto certified = engine::certified_rays(p);
      for (std::size_t i = 0; i < certified.size(); ++i) {
        auto v = engine::intersect(p, kb, certified[i]);
        rays.push_back(Json{{"index", i}, {"ray", io::to_json(certified[i])}, {"value", io::to_json(v)}, {"negative", v < 0}});
      }
      return Reply{200,
                   Json{{"rays", std::move(rays)},
                        {"candidates", candidates_json(s->run)},
                        {"state", engine::to_string(s->run.trace().state)},
                        {"lambda", optional_rational(s->run.lambda())}},
                   {}};
    });

    route("POST", R"(/session/([^/]+)/step)", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      std::lock_guard lk(s->mu);
      choose(*s, ray_index(body_of(req)));
      persist(id, *s);
      return Reply{200, state_json(id, *s), {}};
    });

    route("POST", R"(/session/([^/]+)/scale/start)", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      std::lock_guard lk(s->mu);
      auto body = body_of(req);
      const auto& p = s->run.pair();
      engine::Divisor c;
      auto it = body.find("C");
      if (it == body.end() || (it->is_string() && it->get<std::string>() == "anticanonical"))
        c = p.anticanonical();
      else
        c = io::rational_vector_from_json(*it, "/C");
      auto run = engine::Run::scaling(p, std::move(c), strategy_of(body), seed_of(body));
      drive(run);
      s->run = std::move(run);
      persist(id, *s);
      return Reply{200, state_json(id, *s), {}};
    });

    route("POST", R"(/session/([^/]+)/scale/choose)", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      std::lock_guard lk(s->mu);
      if (!s->run.trace().scaling)
        throw HttpError{409, error_body("conflict", "no scaling run in progress; POST scale/start first")};
      choose(*s, ray_index(body_of(req)));
      persist(id, *s);
      return Reply{200, state_json(id, *s), {}};
    });

    route("GET", R"(/session/([^/]+)/trace)", [this](const httplib::Request& req) {
      auto s = find(req.matches[1].str());
      std::lock_guard lk(s->mu);
      return Reply{200, {}, io::dump(io::to_json(s->run.trace()))};
    });

    route("GET", R"(/session/([^/]+)/report)", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      std::lock_guard lk(s->mu);
      auto rep = report::pair_report(s->run.pair());
      rep["id"] = id;
      rep["state"] = engine::to_string(s->run.trace().state);
      Json lambdas = Json::array();
      for (const auto& st : s->run.trace().steps) lambdas.push_back(optional_rational(st.lambda));
      rep["lambdas"] = std::move(lambdas);
      return Reply{200, std::move(rep), {}};
    });

    route("POST", R"(/session/([^/]+)/clone)", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      auto s = find(id);
      if (clones_of(id) >= options.max_clones_per_session)
        throw HttpError{429, error_body("clone_limit", "clone limit of " + std::to_string(options.max_clones_per_session) +
                                                           " reached for session " + id)};
      std::shared_ptr<Session> copy;
      {
        std::lock_guard lk(s->mu);
        copy = std::make_shared<Session>(s->run, id);
      }
      auto cid = add(copy);
      std::lock_guard lk(copy->mu);
      persist(cid, *copy);
      return Reply{201, state_json(cid, *copy), {}};
    });

    route("DELETE", R"(/session/([^/]+))", [this](const httplib::Request& req) {
      auto id = req.matches[1].str();
      {
        std::lock_guard lk(map_mu);
        if (!sessions.erase(id)) throw HttpError{404, error_body("not_found", "unknown session " + id)};
      }
      forget(id);
      return Reply{200, Json{{"deleted", id}}, {}};
    });

    if (options.ui_dir && !server.set_mount_point("/ui", options.ui_dir->string()))
      throw ValidationError("UI directory " + options.ui_dir->string() + " does not exist");
  }
};

Service::Service(Options options) : impl_(std::make_unique<Impl>(std::move(options))) {}
Service::~Service() { stop(); }

int Service::bind(int port) {
  int bound = port == 0 ? impl_->server.bind_to_any_port(impl_->options.host)
                        : (impl_->server.bind_to_port(impl_->options.host, port) ? port : -1);
  impl_->bound = bound > 0;
  return bound;
}

bool Service::run() {
  if (!impl_->bound) throw ValidationError("service is not bound to a port");
  return impl_->server.listen_after_bind();
}

void Service::stop() {
  if (impl_->server.is_running()) impl_->server.stop();
}

bool Service::running() const { return impl_->server.is_running(); }

std::size_t Service::session_count() const {
  std::lock_guard lk(impl_->map_mu);
  return impl_->sessions.size();
}

}  // namespace mmp::service
