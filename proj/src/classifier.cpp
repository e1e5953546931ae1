#include "anosov/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "anosov/accessibility.hpp"
#include "anosov/cocycle.hpp"
#include "anosov/errors.hpp"
#include "anosov/periodic.hpp"
#include "anosov/regularity.hpp"

namespace anosov {

std::string to_string(ClassificationMode m) { return m == ClassificationMode::Topological ? "topological" : "smooth"; }

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::ConjugateConsistent: return "ConjugateConsistent";
    case Verdict::NotConjugate: return "NotConjugate";
    default: return "Inconclusive";
  }
}

Verdict decide_verdict(const std::vector<double>& discrepancies, double tol) {
  bool all_small = true;
  for (double d : discrepancies) {
    if (!(d <= 10 * tol)) return Verdict::NotConjugate;  // NaN counts as a discrepancy
    if (!(d < tol)) all_small = false;
  }
  return all_small ? Verdict::ConjugateConsistent : Verdict::Inconclusive;
}

std::vector<PeriodicOrbit> collect_orbits(const MapSpec& spec, int max_period, const std::string& db_dir) {
  if (!db_dir.empty()) {
    ensure_directory(db_dir);
    OrbitDb db(db_dir, spec);
    return db.orbits_up_to(max_period);
  }
  std::vector<PeriodicOrbit> all;
  for (int n = 1; n <= max_period; ++n)
    for (auto& o : enumerate_periodic(spec, n).orbits)
      if (o.period == n) all.push_back(std::move(o));
  return all;
}

namespace {

void certify(const MapSpec& spec) {
  try {
    cached_certificate(spec);
  } catch (const Error& e) {
    throw CertificationFailure(spec.name + ": " + e.kind() + ": " + e.what());
  }
}

const char* kCaveat =
    "finite periodic evidence only: agreement up to the enumerated period is consistent with "
    "the sufficient condition for a conjugacy but does not prove one";

void settle(ClassificationReport& rep, bool smooth) {
  std::vector<double> d;
  rep.max_discrepancy = 0;
  rep.worst_row = -1;
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    double x = smooth ? std::max(rep.rows[i].d_lam_s, rep.rows[i].d_log_jac) : rep.rows[i].d_lam_s;
    d.push_back(x);
    if (rep.worst_row < 0 || !(x <= rep.max_discrepancy)) {
      rep.max_discrepancy = x;
      rep.worst_row = int(i);
    }
  }
  rep.verdict = decide_verdict(d, rep.tol);
  rep.citation.clear();
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    if (d[i] <= 10 * rep.tol) continue;
    const auto& r = rep.rows[i];
    char buf[256];
    std::snprintf(buf, sizeof buf, "period %d orbit at (%.6f, %.6f): lambda_s %.12g vs %.12g%s", r.period, r.p.x1,
                  r.p.x2, r.lam_s_f, r.lam_s_g,
                  smooth ? (", log Jac " + format_double(r.log_jac_f) + " vs " + format_double(r.log_jac_g)).c_str()
                         : "");
    rep.citation = buf;
    break;
  }
  rep.caveat = kCaveat;
}

ClassificationReport evidence(const MapSpec& f, const MapSpec& g, int max_period, double tol,
                              const ClassifyOptions& opt) {
  if (!(f.linear.a == g.linear.a)) throw HomotopyMismatch("the two maps have different linear parts");
  certify(f);
  certify(g);
  ClassificationReport rep;
  rep.f_name = f.name;
  rep.g_name = g.name;
  rep.max_period = max_period;
  rep.tol = tol;
  std::vector<PeriodicOrbit> fo = collect_orbits(f, max_period, opt.db_dir);
  std::vector<PeriodicOrbit> go = collect_orbits(g, max_period, opt.db_dir);
  ConjugacyMap H = conjugacy_between(f, g);
  std::vector<PeriodicMatch> m = match_all(H, fo, go);
  for (std::size_t i = 0; i < fo.size(); ++i) {
    ClassificationRow r;
    r.period = fo[i].period;
    r.p = fo[i].point;
    r.hp = m[i].image;
    r.lam_s_f = fo[i].lambda_s;
    r.lam_s_g = m[i].q.lambda_s;
    r.d_lam_s = std::abs(r.lam_s_f - r.lam_s_g);
    r.log_jac_f = fo[i].log_jac;
    r.log_jac_g = m[i].q.log_jac;
    r.d_log_jac = std::abs(r.log_jac_f - r.log_jac_g);
    r.match_gap = m[i].gap;
    rep.rows.push_back(r);
  }
  return rep;
}

}  // namespace

ClassificationReport classify_topological(const MapSpec& f, const MapSpec& g, int max_period, double tol,
                                          const ClassifyOptions& opt) {
  ClassificationReport rep = evidence(f, g, max_period, tol, opt);
  rep.mode = ClassificationMode::Topological;
  settle(rep, false);
  rep.topological_verdict = rep.verdict;
  return rep;
}

ClassificationReport classify_topological(const std::string& f_path, const std::string& g_path, int max_period,
                                          double tol, const ClassifyOptions& opt) {
  return classify_topological(load_map_spec(f_path), load_map_spec(g_path), max_period, tol, opt);
}

ClassificationReport classify_smooth(const MapSpec& f, const MapSpec& g, int max_period, double tol,
                                     const ClassifyOptions& opt) {
  ClassificationReport rep = evidence(f, g, max_period, tol, opt);
  settle(rep, false);
  if (rep.verdict != Verdict::ConjugateConsistent)
    throw TopologicalPrerequisiteFailed("topological verdict is " + to_string(rep.verdict) +
                                        " (max |d lambda_s| " + format_double(rep.max_discrepancy) + ")");
  rep.topological_verdict = rep.verdict;
  rep.mode = ClassificationMode::Smooth;
  settle(rep, true);
  return rep;
}

ClassificationReport classify_smooth(const std::string& f_path, const std::string& g_path, int max_period,
                                     double tol, const ClassifyOptions& opt) {
  return classify_smooth(load_map_spec(f_path), load_map_spec(g_path), max_period, tol, opt);
}

Json classification_to_json(const ClassificationReport& rep) {
  const bool smooth = rep.mode == ClassificationMode::Smooth;
  Json j;
  j["mode"] = to_string(rep.mode);
  j["f"] = rep.f_name;
  j["g"] = rep.g_name;
  j["max_period"] = rep.max_period;
  j["tol"] = rep.tol;
  j["verdict"] = to_string(rep.verdict);
  if (smooth) j["topological_verdict"] = to_string(rep.topological_verdict);
  j["max_discrepancy"] = rep.max_discrepancy;
  j["worst_row"] = rep.worst_row;
  j["citation"] = rep.citation;
  j["caveat"] = rep.caveat;
  Json rows = Json::array();
  for (const auto& r : rep.rows) {
    Json x;
    x["period"] = r.period;
    x["p"] = {r.p.x1, r.p.x2};
    x["hp"] = {r.hp.x1, r.hp.x2};
    x["lambda_s_f"] = r.lam_s_f;
    x["lambda_s_g"] = r.lam_s_g;
    x["d_lambda_s"] = r.d_lam_s;
    if (smooth) {
      x["log_jac_f"] = r.log_jac_f;
      x["log_jac_g"] = r.log_jac_g;
      x["d_log_jac"] = r.d_log_jac;
    }
    x["match_gap"] = r.match_gap;
    rows.push_back(x);
  }
  j["rows"] = rows;
  return j;
}

std::string classification_to_csv(const ClassificationReport& rep) {
  std::string s = "period,p1,p2,hp1,hp2,lambda_s_f,lambda_s_g,d_lambda_s,log_jac_f,log_jac_g,d_log_jac\n";
  for (const auto& r : rep.rows) {
    std::ostringstream os;
    os << r.period;
    for (double v : {r.p.x1, r.p.x2, r.hp.x1, r.hp.x2, r.lam_s_f, r.lam_s_g, r.d_lam_s, r.log_jac_f, r.log_jac_g,
                     r.d_log_jac})
      os << "," << format_double(v);
    s += os.str() + "\n";
  }
  return s;
}

// ---------------------------------------------------------------------------
// Commands

const std::vector<std::string> kSubcommands = {"verify",  "periodic",  "exponents", "conjugacy",
                                               "special", "access",    "livschitz", "rho",
                                               "classify", "classify-smooth", "regularity"};

namespace {

struct Outcome {
  Json report;
  int code = 0;
};

std::string opt_str(const CommandRequest& r, const std::string& key, const std::string& dflt) {
  auto it = r.options.find(key);
  return it == r.options.end() ? dflt : it->second;
}

double parse_number(const std::string& s, const std::string& key) {
  char* end = nullptr;
  double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw SchemaError("option '" + key + "': expected a number, got '" + s + "'");
  return v;
}

double opt_num(const CommandRequest& r, const std::string& key, double dflt) {
  auto it = r.options.find(key);
  return it == r.options.end() ? dflt : parse_number(it->second, key);
}

std::vector<double> parse_list(const std::string& s, const std::string& key) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number(item, key));
  return out;
}

bool has_opt(const CommandRequest& r, const std::string& key) { return r.options.count(key) > 0; }

TorusPoint opt_point(const CommandRequest& r, const std::string& key) {
  std::vector<double> v = parse_list(opt_str(r, key, ""), key);
  if (v.size() != 2) throw SchemaError("option '" + key + "': expected x1,x2");
  return project({v[0], v[1]});
}

void need_inputs(const CommandRequest& r, std::size_t lo, std::size_t hi) {
  if (r.inputs.size() < lo || r.inputs.size() > hi)
    throw SchemaError(r.subcommand + ": expected " + std::to_string(lo) + (lo == hi ? "" : "-" + std::to_string(hi)) +
                      " map-spec file(s), got " + std::to_string(r.inputs.size()));
}

void artifact(const CommandRequest& r, const std::string& name, const std::string& text) {
  if (r.out_dir.empty()) return;
  ensure_directory(r.out_dir);
  write_text_file((std::filesystem::path(r.out_dir) / name).string(), text);
}

Json point_json(const TorusPoint& p) { return Json::array({p.x1, p.x2}); }

Outcome cmd_verify(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  AnosovCertificate c = verify_anosov(f);
  Json j;
  j["map"] = f.name;
  j["anosov"] = true;
  j["cone_aperture_s"] = c.cone_aperture_s;
  j["cone_aperture_u"] = c.cone_aperture_u;
  j["expansion_lb"] = c.expansion_lb;
  j["contraction_ub"] = c.contraction_ub;
  j["grid_step"] = c.grid_step;
  j["lipschitz_slack"] = c.lipschitz_slack;
  j["product_delta"] = c.product_delta;
  j["product_epsilon"] = c.product_epsilon;
  j["default_depth"] = c.default_depth();
  return {j, 0};
}

Outcome cmd_periodic(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  Json counts = Json::array();
  bool exact = true;
  for (int n = 1; n <= r.max_period; ++n) {
    PeriodicEnumeration e = enumerate_periodic(f, n);
    std::int64_t expected = periodic_count(f.linear.a, n);
    std::int64_t prim = 0;
    for (const auto& o : e.orbits) prim += o.period == n;
    exact = exact && std::int64_t(e.points.size()) == expected;
    counts.push_back({{"n", n},
                      {"points", e.points.size()},
                      {"expected", expected},
                      {"primitive_orbits", prim},
                      {"expected_primitive_orbits", primitive_orbit_count(f.linear.a, n)}});
  }
  std::string db;
  if (!r.out_dir.empty()) {
    ensure_directory(r.out_dir);
    OrbitDb d(r.out_dir, f);
    d.orbits_up_to(r.max_period);
    db = d.path();
  }
  Json j;
  j["map"] = f.name;
  j["counts"] = counts;
  j["exact"] = exact;
  if (!db.empty()) j["orbit_db"] = db;
  return {j, exact ? 0 : 1};
}

Outcome cmd_exponents(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  std::vector<PeriodicOrbit> orbits = collect_orbits(f, r.max_period, r.out_dir);
  Json rows = Json::array();
  double worst = 0;
  std::string csv = "period,x1,x2,lambda_s,lambda_u,log_jac,identity_residual\n";
  for (const auto& o : orbits) {
    double res = std::abs(o.period * (o.lambda_s + o.lambda_u) - o.log_jac);
    worst = std::max(worst, res);
    rows.push_back({{"period", o.period},
                    {"point", point_json(o.point)},
                    {"lambda_s", o.lambda_s},
                    {"lambda_u", o.lambda_u},
                    {"log_jac", o.log_jac},
                    {"identity_residual", res}});
    csv += std::to_string(o.period);
    for (double v : {o.point.x1, o.point.x2, o.lambda_s, o.lambda_u, o.log_jac, res}) csv += "," + format_double(v);
    csv += "\n";
  }
  artifact(r, "exponents.csv", csv);
  Json j;
  j["map"] = f.name;
  j["orbits"] = orbits.size();
  j["max_identity_residual"] = worst;
  j["rows"] = rows;
  return {j, 0};
}

Outcome cmd_conjugacy(const CommandRequest& r) {
  need_inputs(r, 1, 2);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  Json j;
  j["f"] = f.name;
  if (r.inputs.size() == 1) {
    int depth = int(opt_num(r, "depth", 40));
    ConjugacyField field = conjugacy_to_linear(f, depth, int(opt_num(r, "grid", 256)));
    j["depth"] = depth;
    j["residual"] = field.residual();
    j["tail_bound"] = field.tail_bound();
    j["bound"] = field.bound();
    j["p_grid_max"] = field.p_grid_max();
    j["validation_grid"] = field.validation_grid();
    j["residual_below_tail"] = field.residual() <= field.tail_bound();
    artifact(r, "field.csv", field_to_csv(field));
    return {j, 0};
  }
  MapSpec g = load_map_spec(r.inputs[1]);
  certify(g);
  ConjugacyMap H = conjugacy_between(f, g);
  const int n = int(opt_num(r, "grid", 8));
  Json rows = Json::array();
  double mx = 0;
  std::string csv = "x1,x2,h1,h2\n";
  for (int a = 0; a < n; ++a)
    for (int b = 0; b < n; ++b) {
      PlanePoint x{(a + 0.5) / n, (b + 0.5) / n};
      PlanePoint y = H(x);
      mx = std::max(mx, norm(y - x));
      rows.push_back({{"x", {x.x1, x.x2}}, {"H", {y.x1, y.x2}}});
      csv += format_double(x.x1) + "," + format_double(x.x2) + "," + format_double(y.x1) + "," +
             format_double(y.x2) + "\n";
    }
  artifact(r, "conjugacy.csv", csv);
  j["g"] = g.name;
  j["max_displacement"] = mx;
  j["samples"] = rows;
  return {j, 0};
}

Outcome cmd_special(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  ConjugacyField field = conjugacy_to_linear(f, int(opt_num(r, "depth", 40)), 64);
  Rng rng = make_rng(11);
  SpecialnessReport s = specialness_defect(field, int(opt_num(r, "samples", 64)), rng);
  Json j;
  j["map"] = f.name;
  j["verdict"] = to_string(s.verdict);
  j["defect"] = s.defect;
  j["noise_floor"] = s.noise_floor;
  j["unstable_jump"] = s.unstable_jump;
  j["samples"] = s.samples;
  j["depth"] = field.depth();
  return {j, s.verdict == Specialness::Inconclusive ? 2 : 0};
}

Outcome cmd_access(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  Rng rng = make_rng(13);
  DichotomyReport d = dichotomy_verdict(f, rng);
  Json j = Json::parse(dichotomy_to_json(d));
  j["map"] = f.name;
  int code = d.verdict == Dichotomy::Inconclusive ? 2 : 0;
  if (has_opt(r, "from") || has_opt(r, "to")) {
    if (d.verdict == Dichotomy::Special) throw SpecialMap("map is special, no u-path search");
    UPathFinder finder(f, rng, int(opt_num(r, "ensemble", 8)));
    try {
      UPath p = finder.find(opt_point(r, "from"), opt_point(r, "to"), opt_num(r, "radius", 0.35), rng);
      j["path"] = Json::parse(upath_to_json(p));
      artifact(r, "upath.csv", upath_to_csv(p));
      artifact(r, "upath.json", upath_to_json(p));
    } catch (const SearchExhausted& e) {
      j["path"] = {{"status", "SearchExhausted"}, {"message", e.what()}};
      code = 2;
    }
  }
  return {j, code};
}

Outcome cmd_livschitz(const CommandRequest& r) {
  need_inputs(r, 2, 2);
  MapSpec f = load_map_spec(r.inputs[0]), g = load_map_spec(r.inputs[1]);
  certify(f);
  certify(g);
  if (!(f.linear.a == g.linear.a)) throw HomotopyMismatch("the two maps have different linear parts");
  std::vector<PeriodicOrbit> fo = collect_orbits(f, r.max_period, r.out_dir);
  std::vector<PeriodicOrbit> go = collect_orbits(g, r.max_period, r.out_dir);
  ConjugacyMap H = conjugacy_between(f, g);
  std::vector<OrbitPair> pairs = pairs_from_matches(fo, match_all(H, fo, go));
  ObstructionReport s = periodic_obstruction(f, g, pairs, log_stable_norm(), log_stable_norm());
  ObstructionReport jac = periodic_obstruction(f, g, pairs, log_jacobian(), log_jacobian());
  artifact(r, "obstruction_stable.csv", obstruction_to_csv(s));
  artifact(r, "obstruction_jacobian.csv", obstruction_to_csv(jac));
  Json j;
  j["f"] = f.name;
  j["g"] = g.name;
  j["max_period"] = r.max_period;
  j["log_stable_norm"] = Json::parse(obstruction_to_json(s));
  j["log_jacobian"] = Json::parse(obstruction_to_json(jac));
  return {j, 0};
}

Outcome cmd_rho(const CommandRequest& r) {
  need_inputs(r, 1, 1);
  MapSpec f = load_map_spec(r.inputs[0]);
  certify(f);
  TorusPoint x = has_opt(r, "x") ? opt_point(r, "x") : TorusPoint{0.3, 0.7};
  std::vector<double> s = parse_list(opt_str(r, "s", "-0.05,-0.02,-0.01,0.01,0.02,0.05"), "s");
  StableLeafChart chart(f, x.lift());
  DensityProfile prof = chart.profile(s);
  Json rows = Json::array();
  std::string csv = "s,x1,x2,log_rho,d_s\n";
  for (std::size_t i = 0; i < s.size(); ++i) {
    PlanePoint y = chart.point(s[i]);
    AffineDistance d = chart.affine(0, s[i]);
    rows.push_back({{"s", s[i]},
                    {"point", {y.x1, y.x2}},
                    {"log_rho", prof.log_rho[i]},
                    {"affine_distance", d.value},
                    {"richardson", d.richardson}});
    csv += format_double(s[i]) + "," + format_double(y.x1) + "," + format_double(y.x2) + "," +
           format_double(prof.log_rho[i]) + "," + format_double(d.value) + "\n";
  }
  artifact(r, "rho.csv", csv);
  Json j;
  j["map"] = f.name;
  j["anchor"] = point_json(x);
  j["levels"] = prof.levels;
  j["tail_bound"] = prof.tail_bound;
  j["rows"] = rows;
  return {j, 0};
}

Outcome cmd_classify(const CommandRequest& r, bool smooth) {
  need_inputs(r, 2, 2);
  ClassifyOptions opt;
  opt.db_dir = r.out_dir;
  ClassificationReport rep = smooth ? classify_smooth(r.inputs[0], r.inputs[1], r.max_period, r.tol, opt)
                                    : classify_topological(r.inputs[0], r.inputs[1], r.max_period, r.tol, opt);
  artifact(r, smooth ? "classify_smooth.csv" : "classify.csv", classification_to_csv(rep));
  return {classification_to_json(rep), rep.verdict == Verdict::Inconclusive ? 2 : 0};
}

Outcome cmd_regularity(const CommandRequest& r) {
  need_inputs(r, 2, 2);
  MapSpec f = load_map_spec(r.inputs[0]), g = load_map_spec(r.inputs[1]);
  certify(f);
  certify(g);
  ConjugacyMap H = conjugacy_between(f, g);
  ObstructionReport obs;
  const ObstructionReport* pre = nullptr;
  if (opt_str(r, "force", "0") != "1") {
    int n = int(opt_num(r, "check-period", 3));
    std::vector<PeriodicOrbit> fo = collect_orbits(f, n, r.out_dir), go = collect_orbits(g, n, r.out_dir);
    obs = periodic_obstruction(f, g, pairs_from_matches(fo, match_all(H, fo, go)), log_stable_norm(),
                               log_stable_norm());
    pre = &obs;
  }
  std::vector<double> seps = dyadic_separations(opt_num(r, "largest", 1e-2), int(opt_num(r, "count", 8)));
  Rng rng = make_rng(17);
  const int probes = int(opt_num(r, "probes", 4));
  std::string dir = opt_str(r, "direction", "stable");
  RegularityReport rep;
  if (dir == "stable") {
    std::vector<PlanePoint> xs;
    for (int i = 0; i < probes; ++i) xs.push_back({uniform01(rng), uniform01(rng)});
    rep = stable_regularity(H, xs, seps, pre, r.tol);
    if (opt_str(r, "ratio-law", "0") == "1") ratio_law_check(rep, transfer_P(H, 20000));
  } else if (dir == "unstable") {
    TorusPoint x{uniform01(rng), uniform01(rng)};
    rep = unstable_derivative_estimate(H, random_chain(f, x, 60, rng), seps, pre, r.tol);
  } else {
    throw SchemaError("option 'direction': expected stable or unstable, got '" + dir + "'");
  }
  Json j = Json::parse(regularity_to_json(rep));
  j["f"] = f.name;
  j["g"] = g.name;
  artifact(r, "regularity.json", dump_json(j));
  return {j, 0};
}

Outcome dispatch(const CommandRequest& r) {
  const std::string& c = r.subcommand;
  if (c == "verify") return cmd_verify(r);
  if (c == "periodic") return cmd_periodic(r);
  if (c == "exponents") return cmd_exponents(r);
  if (c == "conjugacy") return cmd_conjugacy(r);
  if (c == "special") return cmd_special(r);
  if (c == "access") return cmd_access(r);
  if (c == "livschitz") return cmd_livschitz(r);
  if (c == "rho") return cmd_rho(r);
  if (c == "classify") return cmd_classify(r, false);
  if (c == "classify-smooth") return cmd_classify(r, true);
  if (c == "regularity") return cmd_regularity(r);
  throw SchemaError("unknown subcommand '" + c + "'");
}

}  // namespace

int run_command(const CommandRequest& req, std::ostream& out, std::ostream& err) {
  try {
    Outcome o = dispatch(req);
    out << dump_json(o.report) << "\n";
    artifact(req, req.subcommand + ".json", dump_json(o.report) + "\n");
    return o.code;
  } catch (const Error& e) {
    Json j{{"error", e.kind()}, {"message", e.what()}};
    err << dump_json(j) << "\n";
    return 1;
  } catch (const std::exception& e) {
    Json j{{"error", "Exception"}, {"message", e.what()}};
    err << dump_json(j) << "\n";
    return 1;
  }
}

namespace {

int line_of_key(const std::string& text, const std::string& key) {
  auto pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + int(std::count(text.begin(), text.begin() + pos, '\n'));
}

[[noreturn]] void config_fail(const std::string& origin, const std::string& text, const std::string& key,
                              const std::string& msg) {
  int ln = line_of_key(text, key);
  throw SchemaError(origin + (ln ? ":" + std::to_string(ln) : "") + ": field '" + key + "': " + msg);
}

std::string option_text(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_float()) return format_double(v.get<double>());
  if (v.is_array()) {
    std::string s;
    for (const auto& e : v) s += (s.empty() ? "" : ",") + option_text(e);
    return s;
  }
  return v.dump();
}

}  // namespace

CommandRequest parse_config(const std::string& text, const std::string& origin) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    int ln = 1 + int(std::count(text.begin(), text.begin() + std::min<std::size_t>(e.byte, text.size()), '\n'));
    throw SchemaError(origin + ":" + std::to_string(ln) + ": malformed JSON: " + e.what());
  }
  if (!doc.is_object()) throw SchemaError(origin + ": config must be a JSON object");
  CommandRequest req;
  std::filesystem::path base = std::filesystem::path(origin).parent_path();
  auto resolve = [&](const std::string& p) {
    std::filesystem::path q(p);
    return (q.is_absolute() || base.empty()) ? q.string() : (base / q).string();
  };
  bool have_sub = false;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "subcommand") {
      if (!v.is_string()) config_fail(origin, text, k, "expected a string");
      req.subcommand = v.get<std::string>();
      if (std::find(kSubcommands.begin(), kSubcommands.end(), req.subcommand) == kSubcommands.end())
        config_fail(origin, text, k, "unknown subcommand '" + req.subcommand + "'");
      have_sub = true;
    } else if (k == "inputs") {
      if (!v.is_array()) config_fail(origin, text, k, "expected an array of paths");
      for (const auto& e : v) {
        if (!e.is_string()) config_fail(origin, text, k, "expected an array of paths");
        req.inputs.push_back(resolve(e.get<std::string>()));
      }
    } else if (k == "max_period") {
      if (!v.is_number_integer() || v.get<int>() < 1) config_fail(origin, text, k, "expected a positive integer");
      req.max_period = v.get<int>();
    } else if (k == "tol") {
      if (!v.is_number() || !(v.get<double>() > 0)) config_fail(origin, text, k, "expected a positive number");
      req.tol = v.get<double>();
    } else if (k == "out") {
      if (!v.is_string()) config_fail(origin, text, k, "expected a string");
      req.out_dir = resolve(v.get<std::string>());
    } else if (k == "seed") {
      if (!v.is_number_integer()) config_fail(origin, text, k, "expected an integer");
      req.options["seed"] = std::to_string(v.get<std::int64_t>());
    } else if (k == "options") {
      if (!v.is_object()) config_fail(origin, text, k, "expected an object");
      for (auto o = v.begin(); o != v.end(); ++o) req.options[o.key()] = option_text(o.value());
    } else {
      config_fail(origin, text, k, "unknown field in config");
    }
  }
  if (!have_sub) throw SchemaError(origin + ": field 'subcommand': required field missing");
  return req;
}

int run_pipeline(const std::string& config_path, std::ostream& out, std::ostream& err) {
  CommandRequest req;
  try {
    req = parse_config(read_text_file(config_path), config_path);
  } catch (const Error& e) {
    err << dump_json(Json{{"error", e.kind()}, {"message", e.what()}}) << "\n";
    return 1;
  }
  if (req.options.count("seed")) setenv("ANOSOV_SEED", req.options["seed"].c_str(), 1);
  return run_command(req, out, err);
}

}  // namespace anosov
