#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out, err;
};

std::string spec(const std::string& name) { return std::string(ANOSOV_SPEC_DIR) + "/" + name + ".json"; }

Run run(const std::string& args, const std::string& env = "") {
  fs::path errf = fs::temp_directory_path() / "anosov_cli_err.txt";
  std::string cmd = env + " " + ANOSOV_CLI_PATH + " " + args + " 2>" + errf.string();
  Run r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  std::array<char, 4096> buf;
  std::size_t n;
  while ((n = fread(buf.data(), 1, buf.size(), p)) > 0) r.out.append(buf.data(), n);
  int st = pclose(p);
  r.code = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  std::ifstream in(errf);
  r.err.assign(std::istreambuf_iterator<char>(in), {});
  return r;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream o(p);
  o << text;
}

}  // namespace

TEST_CASE("verify and periodic") {
  Run v = run("verify " + spec("generic_1"));
  CHECK(v.code == 0);
  auto j = nlohmann::json::parse(v.out);
  CHECK(j["anosov"] == true);
  CHECK(j["expansion_lb"].get<double>() > 1);

  Run p = run("periodic " + spec("single_a3") + " --max-period 4");
  CHECK(p.code == 0);
  auto q = nlohmann::json::parse(p.out);
  CHECK(q["exact"] == true);
  const int want[] = {1, 7, 31, 119};
  for (int n = 0; n < 4; ++n) CHECK(q["counts"][n]["points"] == want[n]);
}

TEST_CASE("classification exit codes") {
  Run nc = run("classify " + spec("single_a3") + " " + spec("detuned_a3") + " --max-period 2");
  CHECK(nc.code == 0);
  CHECK(nlohmann::json::parse(nc.out)["verdict"] == "NotConjugate");
  // the discrepancy sits between tol and 10 tol
  Run inc = run("classify " + spec("single_a3") + " " + spec("detuned_a3") + " --max-period 1 --tol 0.01");
  CHECK(inc.code == 2);
  CHECK(nlohmann::json::parse(inc.out)["verdict"] == "Inconclusive");
  Run hm = run("classify-smooth " + spec("single_a3") + " " + spec("detuned_a3") + " --max-period 2");
  CHECK(hm.code == 1);
  CHECK(nlohmann::json::parse(hm.err)["error"] == "TopologicalPrerequisiteFailed");
  Run cs = run("classify-smooth " + spec("linear_a3") + " " + spec("eu_skew_a3") + " --max-period 2");
  CHECK(cs.code == 0);
  auto j = nlohmann::json::parse(cs.out);
  CHECK(j["topological_verdict"] == "ConjugateConsistent");
  CHECK(j["verdict"] == "NotConjugate");
}

TEST_CASE("errors are reported as JSON with exit 1") {
  fs::path dir = fs::temp_directory_path() / "anosov_cli_bad";
  fs::create_directories(dir);
  write(dir / "bad.json", "{\n  \"name\": \"bad\",\n  \"linear\": [[3, 1], [1, 1]],\n  \"amplitude\": 3\n}\n");
  Run r = run("verify " + (dir / "bad.json").string());
  CHECK(r.code == 1);
  auto j = nlohmann::json::parse(r.err);
  CHECK(j["error"] == "SchemaError");
  std::string msg = j["message"];
  CHECK(msg.find("amplitude") != std::string::npos);
  CHECK(msg.find(":4") != std::string::npos);
  CHECK(r.out.empty());

  CHECK(run("verify /nonexistent/spec.json").code == 1);
  // the dichotomy alone is fine on a special map, a path query is not
  CHECK(run("access " + spec("linear_a3")).code == 0);
  Run sp = run("access " + spec("linear_a3") + " --from 0.1,0.1 --to 0.5,0.5");
  CHECK(sp.code == 1);
  CHECK(nlohmann::json::parse(sp.err)["error"] == "SpecialMap");
  CHECK(run("frobnicate x.json").code == 1);
  CHECK(run("classify " + spec("single_a3")).code == 1);
  fs::remove_all(dir);
}

TEST_CASE("outputs are deterministic under a fixed seed") {
  const std::string args = "access " + spec("generic_1") + " --from 0.1,0.2 --to 0.6,0.7";
  Run a = run(args, "ANOSOV_SEED=5");
  Run b = run(args, "ANOSOV_SEED=5");
  CHECK(a.code == 0);
  CHECK(a.out == b.out);
  Run c = run(args + " --seed 5");
  CHECK(c.out == a.out);
  Run d = run("special " + spec("generic_1") + " --samples 16", "ANOSOV_SEED=5");
  Run e = run("special " + spec("generic_1") + " --samples 16", "ANOSOV_SEED=5");
  CHECK(d.out == e.out);
}

TEST_CASE("artifacts and pipeline configs") {
  fs::path dir = fs::temp_directory_path() / "anosov_cli_run";
  fs::remove_all(dir);
  fs::create_directories(dir);
  write(dir / "cfg.json", "{\n  \"subcommand\": \"classify\",\n  \"inputs\": [\"" + spec("single_a3") + "\", \"" +
                              spec("detuned_a3") + "\"],\n  \"max_period\": 2,\n  \"out\": \"results\",\n  \"seed\": 3\n}\n");
  Run r = run("run " + (dir / "cfg.json").string());
  CHECK(r.code == 0);
  CHECK(fs::exists(dir / "results" / "classify.json"));
  std::ifstream in(dir / "results" / "classify.json");
  std::string stored((std::istreambuf_iterator<char>(in)), {});
  CHECK(stored == r.out);
  bool csv = false;
  for (const auto& e : fs::directory_iterator(dir / "results")) csv = csv || e.path().extension() == ".csv";
  CHECK(csv);
  Run again = run("run " + (dir / "cfg.json").string());
  CHECK(again.out == r.out);

  write(dir / "bad.json", "{\n  \"subcommand\": \"classify\",\n  \"toll\": 1\n}\n");
  Run b = run("run " + (dir / "bad.json").string());
  CHECK(b.code == 1);
  std::string msg = nlohmann::json::parse(b.err)["message"];
  CHECK(msg.find("bad.json:3") != std::string::npos);
  CHECK(msg.find("toll") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("help and usage") {
  CHECK(run("--help").code == 0);
  CHECK(run("").code == 1);
  CHECK(run("verify").code == 1);
}
