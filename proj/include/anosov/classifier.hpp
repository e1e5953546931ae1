#pragma once

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/orbit.hpp"
#include "anosov/report.hpp"

namespace anosov {

enum class ClassificationMode { Topological, Smooth };
enum class Verdict { ConjugateConsistent, NotConjugate, Inconclusive };
std::string to_string(ClassificationMode m);
std::string to_string(Verdict v);

struct ClassificationRow {
  int period = 1;
  TorusPoint p, hp;
  double lam_s_f = 0, lam_s_g = 0, d_lam_s = 0;
  double log_jac_f = 0, log_jac_g = 0, d_log_jac = 0;  // smooth mode only
  double match_gap = 0;
};

struct ClassificationReport {
  ClassificationMode mode = ClassificationMode::Topological;
  std::string f_name, g_name;
  int max_period = 0;
  double tol = 1e-6;
  std::vector<ClassificationRow> rows;
  double max_discrepancy = 0;
  int worst_row = -1;
  Verdict verdict = Verdict::Inconclusive;
  Verdict topological_verdict = Verdict::Inconclusive;  // smooth mode: the prerequisite
  std::string citation;  // first row beyond 10 tol, lowest period first
  std::string caveat;
};

// Pure verdict logic: ConjugateConsistent when every discrepancy is below
// tol, NotConjugate when one exceeds 10 tol, Inconclusive otherwise.
Verdict decide_verdict(const std::vector<double>& discrepancies, double tol);

struct ClassifyOptions {
  std::string db_dir;  // orbit databases; empty = enumerate in memory
};

// Orbits of minimal period 1..max_period.
std::vector<PeriodicOrbit> collect_orbits(const MapSpec& spec, int max_period, const std::string& db_dir = "");

ClassificationReport classify_topological(const MapSpec& f, const MapSpec& g, int max_period, double tol = 1e-6,
                                          const ClassifyOptions& opt = {});
ClassificationReport classify_topological(const std::string& f_path, const std::string& g_path, int max_period,
                                          double tol = 1e-6, const ClassifyOptions& opt = {});
// Throws TopologicalPrerequisiteFailed unless the topological verdict is
// ConjugateConsistent.
ClassificationReport classify_smooth(const MapSpec& f, const MapSpec& g, int max_period, double tol = 1e-6,
                                     const ClassifyOptions& opt = {});
ClassificationReport classify_smooth(const std::string& f_path, const std::string& g_path, int max_period,
                                     double tol = 1e-6, const ClassifyOptions& opt = {});

Json classification_to_json(const ClassificationReport& rep);
std::string classification_to_csv(const ClassificationReport& rep);

// One invocation of the command-line tool, from argv or from a config file.
struct CommandRequest {
  std::string subcommand;
  std::vector<std::string> inputs;
  int max_period = 5;
  double tol = 1e-6;
  std::string out_dir;
  std::map<std::string, std::string> options;  // subcommand specific, as text
};

extern const std::vector<std::string> kSubcommands;

// JSON report on `out`, artifacts under req.out_dir. Exit code 0 on a
// verdict, 2 on Inconclusive, 1 on errors (message on `err`).
int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err);

// Config file: {"subcommand", "inputs", "max_period", "tol", "out", "seed",
// "options": {...}}. Schema errors name the key and its line.
CommandRequest parse_config(const std::string& text, const std::string& origin = "<config>");
int run_pipeline(const std::string& config_path, std::ostream& out, std::ostream& err);

}  // namespace anosov
