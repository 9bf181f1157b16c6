#pragma once

// Local HTTP bridge for stepping MMP runs from a browser. Every session owns
// one engine::Run; requests on one session are serialised, different
// sessions proceed concurrently.
//
//   POST   /session                    create from a model (pair JSON, or
//                                      {"model": .., "strategy": .., "seed": ..})
//   GET    /session/{id}               current state
//   GET    /session/{id}/rays          certified rays with (K+B).R and the candidates
//   POST   /session/{id}/step          {"ray": i}, i indexes the candidate list
//   POST   /session/{id}/scale/start   {"C": "anticanonical" | [..], "strategy": .., "seed": ..}
//   POST   /session/{id}/scale/choose  {"ray": i}
//   GET    /session/{id}/trace         the trace, byte-identical to `mmp run --trace`
//   GET    /session/{id}/report        singularities, rho, kappa(K+B) where defined
//   POST   /session/{id}/clone         independent copy for what-if previews
//   DELETE /session/{id}
//
// Status codes: 400 for invalid input, 404 for an unknown session, 409 for a
// step on a finished run or an index outside the candidate list, 422 when the
// engine cannot proceed, 429 when a session has too many live clones.

#include <cstddef>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "mmp/engine.hpp"
#include "mmp/io.hpp"

namespace mmp::service {

struct Options {
  std::string host = "127.0.0.1";
  /// Writes a JSON snapshot per session to this directory and reloads the
  /// snapshots on start.
  std::optional<std::filesystem::path> persist_dir;
  /// Static assets served under /ui.
  std::optional<std::filesystem::path> ui_dir;
  std::size_t max_clones_per_session = 8;
};

/// Candidate list of a run as served by the rays endpoint and 409 bodies.
io::Json candidates_json(const engine::Run& run);

class Service {
 public:
  explicit Service(Options options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  /// Binds the listening socket; port 0 picks a free port. Returns the port
  /// or -1 when binding fails.
  int bind(int port);
  /// Serves until stop(); requires a successful bind.
  bool run();
  void stop();
  bool running() const;

  std::size_t session_count() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mmp::service
