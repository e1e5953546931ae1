// anosov: command-line front end. Every subcommand prints a JSON report on
// stdout; --out collects tables, fields, paths and orbit databases.
#include <cstdlib>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "anosov/classifier.hpp"

namespace {

// Subcommand specific options, passed through as text.
const std::vector<std::pair<std::string, std::string>> kExtra = {
    {"depth", "series depth K (conjugacy, special)"},
    {"grid", "grid size (conjugacy)"},
    {"samples", "sample count (special)"},
    {"from", "u-path source x1,x2 (access)"},
    {"to", "u-path target x1,x2 (access)"},
    {"radius", "initial u-segment radius (access)"},
    {"ensemble", "pasts tried per radius (access)"},
    {"x", "anchor x1,x2 (rho)"},
    {"s", "comma separated leaf positions (rho)"},
    {"direction", "stable or unstable (regularity)"},
    {"probes", "probe count (regularity)"},
    {"largest", "largest separation (regularity)"},
    {"count", "number of dyadic separations (regularity)"},
    {"check-period", "period bound of the obstruction pre-check (regularity)"},
    {"force", "1 skips the obstruction pre-check (regularity)"},
    {"ratio-law", "1 cross-checks the transfer-function ratio law (regularity)"},
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rigidity diagnostics for non-invertible Anosov maps of the 2-torus"};
  app.require_subcommand(1);

  anosov::CommandRequest req;
  std::string seed;
  std::map<std::string, std::string> extra;

  for (const auto& name : anosov::kSubcommands) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("inputs", req.inputs, "map-spec JSON files")->required();
    sub->add_option("--max-period", req.max_period, "largest period enumerated")->check(CLI::PositiveNumber);
    sub->add_option("--tol", req.tol, "discrepancy tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--out", req.out_dir, "artifact directory");
    sub->add_option("--seed", seed, "overrides ANOSOV_SEED");
    for (const auto& [key, help] : kExtra) sub->add_option("--" + key, extra[key], help);
    sub->callback([&req, name] { req.subcommand = name; });
  }
  std::string config;
  CLI::App* run = app.add_subcommand("run", "run a pipeline config file");
  run->add_option("config", config, "config JSON")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (!seed.empty()) setenv("ANOSOV_SEED", seed.c_str(), 1);
  if (run->parsed()) return anosov::run_pipeline(config, std::cout, std::cerr);
  for (const auto& [key, value] : extra)
    if (!value.empty()) req.options[key] = value;
  return anosov::run_command(req, std::cout, std::cerr);
}
