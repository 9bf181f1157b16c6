#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "mmp/cli.hpp"
#include "mmp/io.hpp"

using namespace mmp;
using io::Json;

namespace {

const std::string kFixtures = MMP_FIXTURES;

struct Result {
  int code = 0;
  std::string out;
  std::string err;
  Json json() const { return io::parse(out); }
};

Result run(const std::vector<std::string>& args, const std::string& stdin_text = "") {
  std::istringstream in(stdin_text);
  std::ostringstream out, err;
  Result r;
  r.code = cli::dispatch(args, in, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string fixture(const std::string& name) { return kFixtures + "/" + name; }

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream s;
  s << f.rdbuf();
  return s.str();
}

std::filesystem::path temp_file(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / "mmp_cli_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST_CASE("toric subcommands on fixtures") {
  auto check = run({"toric", "check", fixture("p2.json")});
  REQUIRE(check.code == 0);
  auto j = check.json();
  CHECK(j["regular"] == true);
  CHECK(j["simplicial"] == true);
  CHECK(j["terminal"] == true);
  CHECK(j["picard_number"] == 1);

  // the A_3 cone: not regular, not terminal, canonical with one chain of three curves
  auto a3 = run({"toric", "check", fixture("a3_cone.json")}).json();
  CHECK(a3["regular"] == false);
  CHECK(a3["terminal"] == false);
  CHECK(a3["cones"][0]["multiplicity"] == "4");
  CHECK(a3["cones"][0]["singularity"]["class"] == "Canonical");
  CHECK(a3["cones"][0]["singularity"]["self_intersections"] == Json::array({"-2", "-2", "-2"}));

  auto res = run({"toric", "resolve", fixture("a3_cone.json")}).json();
  CHECK(res["added"].size() == 3);
  for (const auto& a : res["added"]) CHECK(a["discrepancy"] == "0");

  auto mori = run({"toric", "mori", fixture("f1.json")}).json();
  CHECK(mori["count"] == 2);
  std::set<std::string> values;
  for (const auto& r : mori["rays"]) values.insert(r["value"].get<std::string>());
  CHECK(values == std::set<std::string>{"-1", "-2"});
  CHECK(run({"toric", "mori", fixture("p1xp1.json")}).json()["count"] == 2);

  // contract each F_1 ray: one goes to P^2, the other fibres over P^1
  std::set<std::string> types;
  for (const char* ray : {"0", "1"}) {
    auto c = run({"toric", "contract", fixture("f1.json"), "--ray", ray, "--compare", fixture("p2.json")});
    REQUIRE(c.code == 0);
    auto cj = c.json();
    types.insert(cj["type"].get<std::string>());
    if (cj["type"] == "Divisorial") CHECK(cj["isomorphic_to_compare"] == true);
    if (cj["type"] == "Fibration") CHECK(cj["target"]["rank"] == 1);
  }
  CHECK(types == std::set<std::string>{"Divisorial", "Fibration"});
  CHECK(run({"toric", "contract", fixture("f1.json"), "--ray", "5"}).code == cli::kExitValidation);
}

TEST_CASE("surface subcommands") {
  auto lines = run({"surface", "lines", "--k", "6", "--bound", "5"});
  REQUIRE(lines.code == 0);
  auto j = lines.json();
  CHECK(j["count"] == "27");
  REQUIRE(j["classes"].size() == 27);
  for (const auto& c : j["classes"]) {
    // D^2 = -1 and K.D = -1 with K = -3H + sum E_i, recomputed from the coordinates
    long d = c["coords"][0], sq = d * d, kd = -3 * d;
    for (std::size_t i = 1; i < c["coords"].size(); ++i) {
      long m = c["coords"][i];
      sq -= m * m;
      kd -= m;
    }
    CHECK(sq == -1);
    CHECK(kd == -1);
  }
  auto far = run({"surface", "lines", "--k", "9", "--bound", "30", "--count-only"}).json();
  auto near = run({"surface", "lines", "--k", "9", "--bound", "3", "--count-only"}).json();
  CHECK(std::stol(far["count"].get<std::string>()) > std::stol(near["count"].get<std::string>()));

  auto lct = run({"surface", "lct", fixture("cusp.json")}).json();
  CHECK(lct["lct"] == "5/6");
  auto node = run({"surface", "classify", fixture("node.json"), "--t", "1"}).json();
  CHECK(node["class"] == "LC");
  CHECK(node["dlt"]["indicated"] == false);
  auto a3 = run({"surface", "classify", fixture("a3_chain.json")}).json();
  CHECK(a3["du_val"] == "A3");
  CHECK(a3["discrepancy"]["discrepancies"] == Json::array({"0", "0", "0"}));

  // blow up P^2 at a point on the line, then contract the new curve again
  auto p2 = run({"surface", "del-pezzo", "--k", "0"});
  REQUIRE(p2.code == 0);
  auto blown = run({"surface", "blowup", "--at", "0:1"}, p2.out);
  REQUIRE(blown.code == 0);
  auto bj = blown.json();
  CHECK(bj["basis"].size() == 2);
  const auto last = std::to_string(bj["curves"].size() - 1);
  auto back = run({"surface", "contract", "--curve", last}, blown.out);
  REQUIRE(back.code == 0);
  CHECK(back.json()["model"]["gram"] == io::parse(p2.out)["gram"]);
  CHECK(run({"surface", "blowup", "--at", "zero"}, p2.out).code == cli::kExitValidation);
}

TEST_CASE("mmp runs write replayable traces") {
  auto trace = temp_file("f1_scale.json");
  auto r = run({"mmp", "scale", fixture("f1.json"), "--C", "anticanonical", "--strategy", "first", "--trace", trace.string()});
  REQUIRE(r.code == 0);
  auto t = io::trace_from_json(io::parse(slurp(trace)));
  CHECK(t.steps.size() == 1);
  CHECK(t.scaling);
  CHECK(engine::replay(t) == t.final_model);
  CHECK(r.json()["cone_bound_holds"] == true);

  // explicit choices: the section first (candidates are most negative first),
  // then the only ray of P^2, which fibres over a point
  auto plain = run({"mmp", "run", fixture("f1.json"), "--strategy", "interactive", "--choices", "1,0"}).json();
  CHECK(plain["state"] == "MoriFibreSpace");
  CHECK(plain["steps"][0]["type"] == "Divisorial");
  CHECK(plain["steps"][1]["note"] == "point");
  CHECK(plain["rho_final"] == 1);

  // same seed, same trace; the model can come from stdin
  auto a = temp_file("seed_a.json"), b = temp_file("seed_b.json");
  auto dp = run({"surface", "del-pezzo", "--k", "5"}).out;
  REQUIRE(run({"mmp", "scale", "-", "--strategy", "first", "--seed", "17", "--trace", a.string()}, dp).code == 0);
  REQUIRE(run({"mmp", "scale", "-", "--strategy", "first", "--seed", "17", "--trace", b.string()}, dp).code == 0);
  CHECK(slurp(a) == slurp(b));
  CHECK(io::trace_from_json(io::parse(slurp(a))).steps.size() == 5);

  // an exhausted budget is an engine error and still leaves the partial trace
  auto partial = temp_file("partial.json");
  auto budget = run({"mmp", "scale", "-", "--budget", "2", "--trace", partial.string()}, dp);
  CHECK(budget.code == cli::kExitEngine);
  CHECK(io::trace_from_json(io::parse(slurp(partial))).steps.size() == 2);

  CHECK(run({"mmp", "run", fixture("f1.json"), "--strategy", "interactive"}).code == cli::kExitValidation);
  CHECK(run({"mmp", "run", fixture("f1.json"), "--choices", "9"}).code == cli::kExitValidation);
  CHECK(run({"mmp", "run", fixture("f1.json"), "--strategy", "greedy"}).code == cli::kExitValidation);
}

TEST_CASE("kappa and polytope subcommands") {
  auto csv = run({"kappa", "dim", fixture("p2.json"), "--D", "1,0,0", "--samples", "3", "--csv"});
  REQUIRE(csv.code == 0);
  CHECK(csv.out == "m,h0\n1,3\n2,6\n3,10\n");
  auto dim = run({"kappa", "dim", fixture("p1xp1.json"), "--D", "1,0,0,0"}).json();
  CHECK(dim["kodaira"]["kappa"] == "1");
  CHECK(dim["big"] == false);
  auto anti = run({"kappa", "dim", fixture("p2.json"), "--D", "-K", "--L", "1,0,0"}).json();
  CHECK(anti["kodaira"]["kappa"] == "2");
  CHECK(anti["epsilon"] == "1");
  CHECK(run({"kappa", "count", fixture("p2.json"), "--D", "1,0,0", "--m", "2"}).json()["h0"] == 6);
  auto probe = run({"kappa", "probe", fixture("p2.json"), "--D", "1,0,0", "--I", "2", "--M", "4"}).json();
  CHECK(probe["full_profile"] == Json::array({Json{{"degree", 1}, {"generators", 3}}}));

  auto lc = run({"polytope", "lc", fixture("cusp.json")}).json();
  CHECK(lc["polytope"]["vertices"] == Json::array({Json::array({"0"}), Json::array({"5/6"})}));
  auto nef = run({"polytope", "nef", fixture("p2.json"), "--slots", "0,1,2"}).json();
  CHECK(nef["polytope"]["vertices"] == Json::array({Json::array({"1", "1", "1"})}));
}

TEST_CASE("exit codes and error pointers") {
  auto malformed = run({"toric", "check"}, "{\"rank\": 2, \"rays\": [[1, 0], [0, \"x\"]], \"max_cones\": []}");
  CHECK(malformed.code == cli::kExitValidation);
  CHECK(malformed.err.find("/rays/1/1") != std::string::npos);
  auto syntax = run({"toric", "check"}, "{\"rank\": 2,");
  CHECK(syntax.code == cli::kExitValidation);
  CHECK(syntax.err.find("malformed JSON") != std::string::npos);
  CHECK(run({"toric", "check", "/nonexistent/model.json"}).code == cli::kExitValidation);
  CHECK(run({"bogus"}).code == cli::kExitValidation);
  CHECK(run({"toric"}).code == cli::kExitValidation);
  CHECK(run({"--help"}).code == cli::kExitOk);

  // engine errors: a surface ray the numerical data cannot contract
  const std::string f3 =
      R"({"basis": ["f", "s"], "gram": [["0", "1"], ["1", "-3"]], "K": ["-5", "-2"],
          "curves": [{"coords": ["0", "1"], "pa": "0", "label": "s", "boundary": "1/2"},
                     {"coords": ["1", "0"], "pa": "0", "label": "f"}],
          "ne_certified": true})";
  // candidates come most negative first: f at -3/2, then s at -1/2
  auto stuck = run({"mmp", "run", "--strategy", "interactive", "--choices", "1"}, f3);
  CHECK(stuck.code == cli::kExitEngine);
  CHECK(stuck.err.find("uncontractible") != std::string::npos);

  auto out = temp_file("check.json");
  REQUIRE(run({"toric", "check", fixture("f2.json"), "--out", out.string()}).code == 0);
  CHECK(io::parse(slurp(out))["terminal"] == true);
}
