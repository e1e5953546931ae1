#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "anosov/classifier.hpp"
#include "anosov/errors.hpp"
#include "anosov/periodic.hpp"

using namespace anosov;
namespace fs = std::filesystem;

namespace {

std::string path(const std::string& name) { return std::string(ANOSOV_SPEC_DIR) + "/" + name + ".json"; }
MapSpec spec(const std::string& name) { return load_map_spec(path(name)); }

}  // namespace

TEST_CASE("verdict rule") {
  const double tol = 1e-6;
  CHECK(decide_verdict({}, tol) == Verdict::ConjugateConsistent);
  CHECK(decide_verdict({0, 1e-9, 9e-7}, tol) == Verdict::ConjugateConsistent);
  CHECK(decide_verdict({0, 5e-6}, tol) == Verdict::Inconclusive);
  CHECK(decide_verdict({1e-6}, tol) == Verdict::Inconclusive);
  CHECK(decide_verdict({9.9e-6}, tol) == Verdict::Inconclusive);
  CHECK(decide_verdict({0, 1.1e-5, 3e-6}, tol) == Verdict::NotConjugate);
  CHECK(decide_verdict({std::numeric_limits<double>::quiet_NaN()}, tol) == Verdict::NotConjugate);
  // the rule depends on the values only, not their order
  CHECK(decide_verdict({2e-5, 0}, tol) == decide_verdict({0, 2e-5}, tol));
  CHECK(to_string(Verdict::ConjugateConsistent) == "ConjugateConsistent");
  CHECK(to_string(Verdict::NotConjugate) == "NotConjugate");
}

TEST_CASE("a map against itself") {
  MapSpec f = spec("generic_1");
  ClassificationReport r = classify_topological(f, f, 4);
  CHECK(r.verdict == Verdict::ConjugateConsistent);
  CHECK(r.max_discrepancy == 0.0);
  CHECK(r.rows.size() == std::size_t(1 + 3 + 10 + 28));
  CHECK(r.citation.empty());
  CHECK(!r.caveat.empty());
}

TEST_CASE("constructed conjugate pair") {
  ClassificationReport t = classify_topological(path("generic_1"), path("conjugated_g1"), 5);
  CHECK(t.verdict == Verdict::ConjugateConsistent);
  CHECK(t.max_discrepancy < 1e-8);
  ClassificationReport s = classify_smooth(path("generic_1"), path("conjugated_g1"), 5);
  CHECK(s.mode == ClassificationMode::Smooth);
  CHECK(s.topological_verdict == Verdict::ConjugateConsistent);
  CHECK(s.verdict == Verdict::ConjugateConsistent);
  double jac = 0;
  for (const auto& row : s.rows) jac = std::max(jac, row.d_log_jac);
  CHECK(jac < 1e-8);
}

TEST_CASE("detuned fixed point") {
  MapSpec f = spec("single_a3"), g = spec("detuned_a3");
  ClassificationReport r = classify_topological(f, g, 4);
  CHECK(r.verdict == Verdict::NotConjugate);
  REQUIRE(!r.rows.empty());
  CHECK(r.rows[0].period == 1);
  // the stable exponents at the common fixed point, read from the enumeration
  double ls_f = 0, ls_g = 0;
  for (const auto& o : enumerate_periodic(f, 1).orbits) ls_f = o.lambda_s;
  for (const auto& o : enumerate_periodic(g, 1).orbits) ls_g = o.lambda_s;
  CHECK(std::abs(r.rows[0].d_lam_s - std::abs(ls_f - ls_g)) < 1e-12);
  CHECK(std::abs(std::exp(ls_g - ls_f) - 1) >= 1e-3);
  CHECK(r.citation.rfind("period 1 ", 0) == 0);
  CHECK_THROWS_AS(classify_smooth(f, g, 3), TopologicalPrerequisiteFailed);
}

TEST_CASE("verdicts are symmetric in the pair") {
  for (auto [a, b] : {std::pair{"single_a3", "detuned_a3"}, std::pair{"generic_1", "conjugated_g1"}}) {
    ClassificationReport ab = classify_topological(path(a), path(b), 3);
    ClassificationReport ba = classify_topological(path(b), path(a), 3);
    CHECK(ab.verdict == ba.verdict);
    CHECK(std::abs(ab.max_discrepancy - ba.max_discrepancy) < 1e-10);
  }
}

TEST_CASE("stable data match but Jacobians do not") {
  ClassificationReport t = classify_topological(path("linear_a3"), path("eu_skew_a3"), 4);
  CHECK(t.verdict == Verdict::ConjugateConsistent);
  ClassificationReport s = classify_smooth(path("linear_a3"), path("eu_skew_a3"), 4);
  CHECK(s.topological_verdict == Verdict::ConjugateConsistent);
  CHECK(s.verdict == Verdict::NotConjugate);
  CHECK(s.citation.find("log Jac") != std::string::npos);
}

TEST_CASE("different linear parts") {
  MapSpec f = spec("linear_a3");
  MapSpec g = MapSpec::linear_model({4, 1, 1, 1});
  CHECK_THROWS_AS(classify_topological(f, g, 2), HomotopyMismatch);
  CHECK_THROWS_AS(classify_smooth(f, g, 2), HomotopyMismatch);
}

TEST_CASE("uncertifiable input") {
  MapSpec f = spec("linear_a3");
  MapSpec g = f;
  g.terms = {{{1, 0}, {10, 0}, 0.0}};
  CHECK_THROWS_AS(classify_topological(f, g, 2), CertificationFailure);
}

TEST_CASE("orbit databases feed the classifier") {
  fs::path dir = fs::temp_directory_path() / "anosov_classifier_db";
  fs::remove_all(dir);
  ClassifyOptions opt{dir.string()};
  ClassificationReport a = classify_topological(path("single_a3"), path("detuned_a3"), 3, 1e-6, opt);
  ClassificationReport b = classify_topological(path("single_a3"), path("detuned_a3"), 3, 1e-6, opt);
  CHECK(a.verdict == b.verdict);
  CHECK(a.max_discrepancy == b.max_discrepancy);
  std::size_t files = 0;
  for (const auto& e : fs::directory_iterator(dir)) files += e.is_regular_file();
  CHECK(files == 2);
  auto orbits = collect_orbits(spec("single_a3"), 3, dir.string());
  CHECK(orbits.size() == 14);
  fs::remove_all(dir);
}

TEST_CASE("report serialisation") {
  ClassificationReport r = classify_topological(path("single_a3"), path("detuned_a3"), 2);
  Json j = classification_to_json(r);
  CHECK(j["verdict"] == "NotConjugate");
  CHECK(j["rows"].size() == r.rows.size());
  CHECK(j["citation"] == r.citation);
  std::string csv = classification_to_csv(r);
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == r.rows.size() + 1);
}

TEST_CASE("config files") {
  const std::string text =
      "{\n"
      "  \"subcommand\": \"classify\",\n"
      "  \"inputs\": [\"a.json\", \"/abs/b.json\"],\n"
      "  \"max_period\": 3,\n"
      "  \"tol\": 1e-7,\n"
      "  \"out\": \"results\",\n"
      "  \"seed\": 7,\n"
      "  \"options\": {\"depth\": 30, \"from\": [0.1, 0.2]}\n"
      "}\n";
  CommandRequest r = parse_config(text, "/tmp/cfg/run.json");
  CHECK(r.subcommand == "classify");
  REQUIRE(r.inputs.size() == 2);
  CHECK(r.inputs[0] == "/tmp/cfg/a.json");
  CHECK(r.inputs[1] == "/abs/b.json");
  CHECK(r.max_period == 3);
  CHECK(r.tol == 1e-7);
  CHECK(r.out_dir == "/tmp/cfg/results");
  CHECK(r.options["seed"] == "7");
  CHECK(r.options["depth"] == "30");
  CHECK(r.options["from"] == "0.10000000000000001,0.20000000000000001");

  auto fails_with = [](const std::string& t, const std::string& needle) {
    try {
      parse_config(t, "c.json");
    } catch (const SchemaError& e) {
      CAPTURE(e.what());
      return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
  };
  CHECK(fails_with("{\n\"subcommand\": \"classify\",\n\"bogus\": 1\n}", "c.json:3: field 'bogus'"));
  CHECK(fails_with("{\n\"subcommand\": \"classify\",\n\"max_period\": -2\n}", "c.json:3: field 'max_period'"));
  CHECK(fails_with("{\"subcommand\": \"nope\"}", "field 'subcommand'"));
  CHECK(fails_with("{\"inputs\": []}", "field 'subcommand'"));
  CHECK(fails_with("{\n\"subcommand\": \"classify\",,\n}", "c.json:2: malformed JSON"));
  CHECK(fails_with("[1, 2]", "JSON object"));
}

TEST_CASE("in-process commands") {
  CommandRequest req;
  req.subcommand = "classify";
  req.inputs = {path("single_a3"), path("detuned_a3")};
  req.max_period = 2;
  std::ostringstream out, err;
  CHECK(run_command(req, out, err) == 0);
  CHECK(out.str().find("\"NotConjugate\"") != std::string::npos);
  CHECK(err.str().empty());

  CommandRequest bad = req;
  bad.inputs = {path("single_a3")};
  std::ostringstream o2, e2;
  CHECK(run_command(bad, o2, e2) == 1);
  CHECK(e2.str().find("\"error\"") != std::string::npos);

  CommandRequest unknown = req;
  unknown.subcommand = "frobnicate";
  std::ostringstream o3, e3;
  CHECK(run_command(unknown, o3, e3) == 1);
}
