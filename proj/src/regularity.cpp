#include "anosov/regularity.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "anosov/errors.hpp"
#include "anosov/report.hpp"
#include "anosov/parallel.hpp"

namespace anosov {

std::string to_string(RegularityDirection d) { return d == RegularityDirection::Stable ? "stable" : "unstable"; }

std::string to_string(RegularityVerdict v) {
  switch (v) {
    case RegularityVerdict::Differentiable: return "Differentiable";
    case RegularityVerdict::LipschitzOnly: return "LipschitzOnly";
    default: return "HolderOnly";
  }
}

std::vector<double> dyadic_separations(double largest, int count) {
  std::vector<double> s;
  for (int k = 0; k < count; ++k) s.push_back(largest * std::ldexp(1.0, -k));
  return s;
}

namespace {

void check_pair(const ObstructionReport* obstruction, double tol) {
  if (obstruction && !(obstruction->max_abs <= tol)) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "periodic obstruction %.3g exceeds %.3g", obstruction->max_abs, tol);
    throw NotConjugatePair(buf);
  }
}

// Fills ratios, limit, convergence and the log-log fit.
void finish_probe(RegularityProbe& p) {
  const std::size_t n = p.separations.size();
  p.ratios.resize(n);
  for (std::size_t k = 0; k < n; ++k) p.ratios[k] = p.images[k] / p.separations[k];
  if (n == 0) return;
  double last = p.ratios.back();
  if (n >= 2) {
    double prev = p.ratios[n - 2];
    double q = p.separations[n - 1] / p.separations[n - 2];
    // R(s) = D + c s: extrapolate from the last pair.
    p.derivative = (last - q * prev) / (1 - q);
    p.convergence_gap = std::abs(last - prev);
  } else {
    p.derivative = last;
  }
  p.cauchy = n >= 2 && std::isfinite(last) && last > 0 && p.convergence_gap < 0.02 * std::abs(last);
  auto [lo, hi] = std::minmax_element(p.ratios.begin(), p.ratios.end());
  p.bounded = *lo > 0 && std::isfinite(*hi) && *hi < 2 * *lo;

  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double x = std::log(p.separations[k]), y = std::log(p.images[k]);
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  double den = n * sxx - sx * sx;
  p.exponent = den > 0 ? (n * sxy - sx * sy) / den : 1.0;
  double icpt = (sy - p.exponent * sx) / n, ss = 0;
  for (std::size_t k = 0; k < n; ++k) {
    double r = std::log(p.images[k]) - (icpt + p.exponent * std::log(p.separations[k]));
    ss += r * r;
  }
  p.fit_residual = std::sqrt(ss / n);
}

void finish_report(RegularityReport& rep) {
  double sum = 0;
  bool all_cauchy = !rep.probes.empty(), all_bounded = !rep.probes.empty();
  for (const auto& p : rep.probes) {
    sum += p.exponent;
    all_cauchy = all_cauchy && p.cauchy;
    all_bounded = all_bounded && p.bounded;
  }
  rep.raw_exponent = rep.probes.empty() ? 0 : sum / rep.probes.size();
  rep.exponent = std::clamp(rep.raw_exponent, 1e-6, 1.5);
  // A log-log slope clearly below 1 rules out Lipschitz even when the finite
  // window of ratios happens to stay within the factor 2.
  const bool sublinear = rep.raw_exponent < 0.98;
  rep.verdict = sublinear      ? RegularityVerdict::HolderOnly
                : all_cauchy   ? RegularityVerdict::Differentiable
                : all_bounded  ? RegularityVerdict::LipschitzOnly
                               : RegularityVerdict::HolderOnly;
}

RegularityProbe identity_probe(const PlanePoint& x, const std::vector<double>& seps) {
  RegularityProbe p;
  p.x = x;
  for (double s : seps) {
    p.separations.push_back(std::abs(s));
    p.images.push_back(std::abs(s));
  }
  finish_probe(p);
  p.derivative = 1.0;
  return p;
}

RegularityProbe stable_probe(const ConjugacyMap& H, const PlanePoint& x, const std::vector<double>& seps) {
  if (H.identity()) return identity_probe(x, seps);
  StableLeafChart cf(H.f(), x);
  StableLeafChart cg(H.g(), H(x));
  RegularityProbe p;
  p.x = x;
  for (double s : seps) {
    double step = std::min(1e-3, std::abs(s) / 8);
    PlanePoint y = cf.point(s);
    double df = cf.affine(0, s, step).value;
    double t = cg.coordinate(H(y));
    double dg = cg.affine(0, t, step).value;
    p.separations.push_back(std::abs(df));
    p.images.push_back(std::abs(dg));
  }
  finish_probe(p);
  return p;
}

}  // namespace

RegularityReport stable_derivative_estimate(const ConjugacyMap& H, const PlanePoint& x,
                                            const std::vector<double>& separations,
                                            const ObstructionReport* obstruction, double tol) {
  return stable_regularity(H, {x}, separations, obstruction, tol);
}

RegularityReport stable_regularity(const ConjugacyMap& H, const std::vector<PlanePoint>& probes,
                                   const std::vector<double>& separations, const ObstructionReport* obstruction,
                                   double tol) {
  check_pair(obstruction, tol);
  if (separations.size() < 4) throw std::invalid_argument("regression needs at least 4 separations");
  RegularityReport rep;
  rep.direction = RegularityDirection::Stable;
  rep.probes.resize(probes.size());
  parallel_for(probes.size(), [&](std::size_t i) { rep.probes[i] = stable_probe(H, probes[i], separations); });
  finish_report(rep);
  return rep;
}

namespace {

// Window on the cover through y^ whose past follows the branches of `chain`
// (y^ near the lift of the chain base): F(y_-(i+1)) = y_-i + m_i with the
// same jumps m_i as the chain itself.
ShadowWindow leaf_window(const MapSpec& f, const PastChain& chain, const PlanePoint& y, int fwd) {
  const int D = int(chain.length());
  std::vector<PlanePoint> past{y};
  for (int i = 0; i < D; ++i) {
    PlanePoint a0 = chain.points[i].lift(), a1 = chain.points[i + 1].lift();
    LatticeVector m = round_lattice(f.lift(a1) - a0);
    past.push_back(invert_lift(f, past.back() + m.as_vec()));
  }
  ShadowWindow w;
  for (int k = D; k >= 0; --k) w.t.push_back(past[k]);
  w.origin = D;
  PlanePoint z = y;
  for (int k = 0; k < fwd; ++k) {
    z = project(f.lift(z)).lift();
    w.t.push_back(z);
  }
  for (int j = 0; j + 1 < w.size(); ++j) w.n.push_back(round_lattice(f.lift(w.t[j]) - w.t[j + 1]));
  return w;
}

// Seed parameter of the point of `leaf` nearest to y modulo Z^2.
double locate(const UnstableLeaf& leaf, const PlanePoint& y) {
  Vec2 v;
  leaf.eval(0.0, &v);
  double s = dot(torus_delta(y, leaf.base()), v) / dot(v, v);
  double gap = 1e300;
  for (int it = 0; it < 30; ++it) {
    PlanePoint z = leaf.eval(s, &v);
    Vec2 d = torus_delta(y, z);
    double ds = dot(d, v) / dot(v, v);
    s += ds;
    gap = norm(d - v * ds);
    if (std::abs(ds) * norm(v) < 1e-15) break;
  }
  if (gap > 1e-8) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "point is %.3g off the unstable leaf", gap);
    throw NotOnLeaf(buf);
  }
  return s;
}

}  // namespace

RegularityReport unstable_derivative_estimate(const ConjugacyMap& H, const PastChain& chain,
                                              const std::vector<double>& separations,
                                              const ObstructionReport* obstruction, double tol) {
  check_pair(obstruction, tol);
  if (separations.size() < 4) throw std::invalid_argument("regression needs at least 4 separations");
  const MapSpec& f = H.f();
  const MapSpec& g = H.g();
  RegularityReport rep;
  rep.direction = RegularityDirection::Unstable;

  // Each separation gets its own push depth so the seed stays near `seed`:
  // G carries ~1e-17 of absolute roundoff per evaluation, amplified by
  // lambda^N along the push, while the straight seed costs O(seed) relative.
  const double seed = 3e-9;
  const int depth = 30;
  const double elb = cached_certificate(f).expansion_lb;
  std::vector<int> steps;
  for (double s : separations)
    steps.push_back(std::max(1, int(std::ceil(std::log(std::abs(s) / seed) / std::log(elb)))));
  const int N = *std::max_element(steps.begin(), steps.end());
  PastChain c = chain;
  int need = std::max(N + depth, H.back());
  if (int(c.length()) < need) c = extend_chain(f, c, std::vector<int>(need - c.length(), 0));

  if (H.identity()) {
    rep.probes.push_back(identity_probe(c.points[0].lift(), separations));
    finish_report(rep);
    return rep;
  }

  PastChain cg = induced_orbit_conjugacy(H, c);
  RegularityProbe p;
  p.x = c.points[0].lift();
  p.separations.resize(separations.size());
  p.images.resize(separations.size());
  parallel_for(separations.size(), [&](std::size_t k) {
    UnstableLeaf lf(f, c, steps[k], seed), lg(g, cg, steps[k], seed);
    Vec2 vf, vg;
    lf.eval(0.0, &vf);
    lg.eval(0.0, &vg);
    double s = separations[k] / norm(vf);
    PlanePoint y = lf.eval(s);
    std::vector<PlanePoint> w = shadow(g, leaf_window(f, c, y, H.fwd()));
    double t = locate(lg, w[c.length()]);
    p.separations[k] = std::abs(separations[k]);
    p.images[k] = norm(vg) * std::abs(t);
  });
  finish_probe(p);
  rep.probes.push_back(p);
  finish_report(rep);
  return rep;
}

double ratio_law_check(RegularityReport& rep, const TransferReport& transfer) {
  double worst = 0;
  std::vector<double> k;
  for (const auto& p : rep.probes) k.push_back(p.derivative * std::exp(transfer.U(p.x)));
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = i + 1; j < k.size(); ++j) worst = std::max(worst, std::abs(k[i] / k[j] - 1));
  rep.ratio_law_residual = worst;
  return worst;
}

std::string regularity_to_json(const RegularityReport& rep) {
  Json j;
  j["direction"] = to_string(rep.direction);
  j["verdict"] = to_string(rep.verdict);
  j["exponent"] = rep.exponent;
  j["raw_exponent"] = rep.raw_exponent;
  if (rep.ratio_law_residual >= 0) j["ratio_law_residual"] = rep.ratio_law_residual;
  j["note"] = rep.note;
  Json ps = Json::array();
  for (const auto& p : rep.probes) {
    TorusPoint x = project(p.x);
    ps.push_back({{"x", {x.x1, x.x2}},
                  {"separations", p.separations},
                  {"images", p.images},
                  {"ratios", p.ratios},
                  {"derivative", p.derivative},
                  {"convergence_gap", p.convergence_gap},
                  {"exponent", p.exponent},
                  {"fit_residual", p.fit_residual},
                  {"cauchy", p.cauchy},
                  {"bounded", p.bounded}});
  }
  j["probes"] = ps;
  return dump_json(j);
}

}  // namespace anosov
