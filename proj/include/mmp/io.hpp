#pragma once

// JSON encodings of the model files, traces and reports. Rationals travel as
// "p/q" strings; integral inputs may also be plain JSON integers. Floats are
// rejected everywhere. Decoding errors are ValidationErrors whose message
// starts with the JSON pointer of the offending field.

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "mmp/engine.hpp"
#include "mmp/kappa.hpp"
#include "mmp/polytope.hpp"
#include "mmp/singularities.hpp"
#include "mmp/surface.hpp"
#include "mmp/toric.hpp"

namespace mmp::io {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kTraceSchema = "mmp-trace/1";

/// Parses JSON text; syntax errors become ValidationError with the byte offset.
Json parse(std::string_view text);
/// Two-space indented text with a trailing newline.
std::string dump(const Json& j);

Rational rational_from_json(const Json& j, const std::string& path);
RationalVector rational_vector_from_json(const Json& j, const std::string& path);
/// Comma-separated rationals as given on a command line, e.g. "1,1/2,0".
RationalVector parse_rational_list(std::string_view text);

Json to_json(const Rational& r);
Json to_json(const BigInt& v);
Json to_json(const RationalVector& v);
Json to_json(const LatticeVector& v);
Json to_json(const RationalMatrix& m);

toric::Fan fan_from_json(const Json& j, const std::string& path = "");
Json to_json(const toric::Fan& f);

surface::SurfaceModel surface_from_json(const Json& j, const std::string& path = "");
Json to_json(const surface::SurfaceModel& m);

sing::ResolutionData resolution_from_json(const Json& j, const std::string& path = "");
Json to_json(const sing::ResolutionData& r);

/// Accepts a bare fan, a bare surface model, or
/// {"backend": "toric", "fan": .., "boundary": [..]} / {"backend": "surface", "surface": ..}.
engine::Pair pair_from_json(const Json& j, const std::string& path = "");
Json to_json(const engine::Pair& p);

Json to_json(const engine::Ray& r);
Json to_json(const engine::RayValue& r);
Json to_json(const engine::MMPStep& s);
Json to_json(const engine::MMPTrace& t);
engine::MMPTrace trace_from_json(const Json& j, const std::string& path = "");

Json to_json(const RationalPolytope& p);
Json to_json(const sing::DiscrepancyReport& r);
Json to_json(const kappa::PlurigenusSeries& s);
Json to_json(const kappa::KodairaReport& r);
Json to_json(const kappa::TruncationReport& r);

}  // namespace mmp::io
