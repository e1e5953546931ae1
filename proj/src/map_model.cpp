#include "anosov/map_model.hpp"

#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>

#include "anosov/errors.hpp"
#include "anosov/parallel.hpp"
#include "json.hpp"
#include "kernel.hpp"

namespace anosov {

using kernel::M;
using kernel::V;

namespace {

V<double> to_k(const Vec2& v) { return {v.x1, v.x2}; }
Vec2 from_k(const V<double>& v) { return {v.x1, v.x2}; }
Mat2 from_k(const M<double>& m) { return {m.a, m.b, m.c, m.d}; }

double terms_abs_sum(const std::vector<PerturbationTerm>& t) {
  double s = 0;
  for (const auto& x : t) s += norm(x.amp);
  return s;
}
// sup of |D(term sum)| and its Lipschitz constant.
double terms_d1(const std::vector<PerturbationTerm>& t) {
  double s = 0;
  for (const auto& x : t) s += 2 * M_PI * norm(x.k.as_vec()) * norm(x.amp);
  return s;
}
double terms_d2(const std::vector<PerturbationTerm>& t) {
  double s = 0;
  for (const auto& x : t) {
    double kk = 2 * M_PI * norm(x.k.as_vec());
    s += kk * kk * norm(x.amp);
  }
  return s;
}

}  // namespace

MapSpec MapSpec::linear_model(const IntMat2& a, std::string name) {
  MapSpec s;
  s.name = std::move(name);
  s.linear = validate_model(a);
  return s;
}

MapSpec MapSpec::scaled(double t) const {
  MapSpec s = *this;
  for (auto& x : s.terms) x.amp = x.amp * t;
  for (auto& x : s.conjugator) x.amp = x.amp * t;
  return s;
}

void MapSpec::perturbation(const PlanePoint& x, Vec2* p, Mat2* dp) const {
  V<double> pk;
  M<double> dk;
  kernel::displacement(*this, to_k(x), pk, dp ? &dk : nullptr);
  if (p) *p = from_k(pk);
  if (dp) *dp = from_k(dk);
}

PlanePoint MapSpec::lift(const PlanePoint& x) const {
  Vec2 p;
  perturbation(x, &p, nullptr);
  return linear.real() * x + p;
}

Mat2 MapSpec::jacobian(const PlanePoint& x) const {
  Mat2 dp;
  perturbation(x, nullptr, &dp);
  return linear.real() + dp;
}

void MapSpec::lift_and_jacobian(const PlanePoint& x, PlanePoint& fx, Mat2& df) const {
  V<double> f;
  M<double> d;
  kernel::lift_and_jacobian(*this, to_k(x), f, d);
  fx = from_k(f);
  df = from_k(d);
}

PlanePoint MapSpec::conj_apply(const PlanePoint& x) const {
  if (conjugator.empty()) return x;
  V<double> c;
  kernel::trig_sum<double>(conjugator, kernel::reduce(to_k(x)), c, nullptr);
  return x + from_k(c);
}

PlanePoint MapSpec::conj_inverse(const PlanePoint& y) const {
  if (conjugator.empty()) return y;
  return from_k(kernel::conj_inverse(conjugator, to_k(y)));
}

Mat2 MapSpec::conj_jacobian(const PlanePoint& x) const {
  if (conjugator.empty()) return Mat2::identity();
  V<double> c;
  M<double> dc;
  kernel::trig_sum(conjugator, kernel::reduce(to_k(x)), c, &dc);
  return Mat2::identity() + from_k(dc);
}

double MapSpec::perturbation_sup_bound() const {
  double p0 = terms_abs_sum(terms);
  if (conjugator.empty()) return p0;
  // G(x) - A x = P0(y) + c(F0 y) - A c(y) with y = Phi^-1 x.
  return p0 + (1.0 + linear.real().norm2()) * terms_abs_sum(conjugator);
}

double MapSpec::derivative_lipschitz_bound() const {
  double P1 = terms_d1(terms), P2 = terms_d2(terms);
  if (conjugator.empty()) return P2;
  double c1 = terms_d1(conjugator), c2 = terms_d2(conjugator);
  if (c1 >= 1.0) return std::numeric_limits<double>::infinity();
  // DG(x) = DPhi(F0 y) DF0(y) DPhi(y)^-1 with y = Phi^-1(x); product rule on
  // sup norms, then the Lipschitz constant of Phi^-1.
  double a = 1.0 + c1, ai = 1.0 / (1.0 - c1), b = linear.real().norm2() + P1;
  double lip_y = c2 * b * b * ai + a * P2 * ai + a * b * ai * ai * c2;
  return lip_y * ai;
}

bool same_map(const MapSpec& a, const MapSpec& b) {
  auto same_terms = [](const std::vector<PerturbationTerm>& x, const std::vector<PerturbationTerm>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if (!(x[i].k == y[i].k && x[i].amp == y[i].amp && x[i].phase == y[i].phase)) return false;
    return true;
  };
  return a.linear.a == b.linear.a && same_terms(a.terms, b.terms) && same_terms(a.conjugator, b.conjugator);
}

PlanePoint eval_lift(const MapSpec& spec, const PlanePoint& x) { return spec.lift(x); }
Mat2 eval_derivative(const MapSpec& spec, const PlanePoint& x) { return spec.jacobian(x); }

namespace {

bool newton_invert(const MapSpec& spec, const PlanePoint& y, PlanePoint& x, double tol,
                   std::vector<double>* trace) {
  for (int it = 0; it < 60; ++it) {
    PlanePoint fx;
    Mat2 df;
    spec.lift_and_jacobian(x, fx, df);
    Vec2 r = fx - y;
    double rn = norm(r);
    if (trace) trace->push_back(rn);
    if (rn < tol) return true;
    Vec2 step = df.inverse() * r;
    // Damped step: halve until the residual decreases.
    double lam = 1.0;
    for (int h = 0; h < 30; ++h) {
      PlanePoint xt = x - step * lam;
      if (norm(spec.lift(xt) - y) < rn || h == 29) {
        x = xt;
        break;
      }
      lam *= 0.5;
    }
  }
  PlanePoint fx = spec.lift(x);
  return norm(fx - y) < tol;
}

}  // namespace

PlanePoint invert_lift(const MapSpec& spec, const PlanePoint& y, double tol) {
  Mat2 ainv = spec.linear.real().inverse();
  double scale = std::max(1.0, norm(y));
  double eff = std::max(tol, 8e-16 * scale * spec.linear.real().norm2());
  PlanePoint x = ainv * y;
  if (spec.is_linear()) return x;
  std::vector<double> trace;
  if (newton_invert(spec, y, x, eff, &trace)) return x;
  // Homotopy in the perturbation amplitude from the linear solution.
  x = ainv * y;
  bool ok = true;
  for (int i = 1; i <= 8 && ok; ++i) {
    MapSpec st = spec.scaled(i / 8.0);
    ok = newton_invert(st, y, x, eff, nullptr);
  }
  if (ok) return x;
  std::ostringstream os;
  os << "invert_lift failed at y=(" << y.x1 << "," << y.x2 << "); residual trace:";
  for (double r : trace) os << " " << r;
  throw NewtonDivergence(os.str());
}

std::vector<TorusPoint> preimages(const MapSpec& spec, const TorusPoint& y) {
  std::vector<TorusPoint> out;
  for (const auto& m : coset_reps(spec.linear.a))
    out.push_back(project(invert_lift(spec, y.lift() + m.as_vec())));
  return out;
}

// ---------------------------------------------------------------------------
// Cone certification

int AnosovCertificate::default_depth() const {
  double r = contraction_ub / expansion_lb;
  return std::max(1, int(std::ceil(std::log(1e-12) / std::log(r))));
}

namespace {

// min over beta in [-k, k] of |D(p + beta q)| / |p + beta q|
double min_gain(const Mat2& D, const Vec2& p, const Vec2& q, double k) {
  Vec2 Dp = D * p, Dq = D * q;
  double A0 = dot(Dp, Dp), A1 = dot(Dp, Dq), A2 = dot(Dq, Dq);
  double B0 = dot(p, p), B1 = dot(p, q), B2 = dot(q, q);
  auto R = [&](double b) { return (A0 + 2 * A1 * b + A2 * b * b) / (B0 + 2 * B1 * b + B2 * b * b); };
  double best = std::min(R(-k), R(k));
  double c0 = A1 * B0 - A0 * B1, c1 = A2 * B0 - A0 * B2, c2 = A2 * B1 - A1 * B2;
  auto consider = [&](double b) {
    if (std::isfinite(b) && b > -k && b < k) best = std::min(best, R(b));
  };
  if (std::abs(c2) < 1e-300) {
    if (std::abs(c1) > 1e-300) consider(-c0 / c1);
  } else {
    double disc = c1 * c1 - 4 * c2 * c0;
    if (disc >= 0) {
      double sq = std::sqrt(disc);
      consider((-c1 + sq) / (2 * c2));
      consider((-c1 - sq) / (2 * c2));
    }
  }
  return std::sqrt(std::max(best, 0.0));
}

// Image of the cone {|w| <= k |v|} (coordinates (v, w) = (lead, other))
// under the matrix rows (lead: l0 + l1 t, other: o0 + o1 t), t = +-k, with an
// entrywise perturbation of size sl.
bool cone_maps_inside(double l0, double l1, double o0, double o1, double k, double sl) {
  double lp = l0 + l1 * k, lm = l0 - l1 * k;
  if ((lp > 0) != (lm > 0)) return false;
  for (double t : {k, -k}) {
    double den = std::abs(l0 + l1 * t) - sl;
    double num = std::abs(o0 + o1 * t) + sl;
    if (!(den > 0) || !(num < k * den)) return false;
  }
  return true;
}

constexpr int kSlopes = 25;
constexpr int kMaxRefine = 4;

struct CellStats {
  bool u_raw[kSlopes], u_sl[kSlopes], s_raw[kSlopes], s_sl[kSlopes];
  double u_gain[kSlopes], s_gain[kSlopes];

  void reset() {
    for (int j = 0; j < kSlopes; ++j) {
      u_raw[j] = u_sl[j] = s_raw[j] = s_sl[j] = true;
      u_gain[j] = s_gain[j] = std::numeric_limits<double>::infinity();
    }
  }
  void merge(const CellStats& o) {
    for (int j = 0; j < kSlopes; ++j) {
      u_raw[j] = u_raw[j] && o.u_raw[j];
      u_sl[j] = u_sl[j] && o.u_sl[j];
      s_raw[j] = s_raw[j] && o.s_raw[j];
      s_sl[j] = s_sl[j] && o.s_sl[j];
      u_gain[j] = std::min(u_gain[j], o.u_gain[j]);
      s_gain[j] = std::min(s_gain[j], o.s_gain[j]);
    }
  }
};

struct Witness {
  bool have = false;
  Vec2 at;
  std::string what;
};

class ConeChecker {
 public:
  ConeChecker(const MapSpec& spec, double L) : spec_(spec), L_(L) {
    eu_ = spec.linear.e_u;
    es_ = spec.linear.e_s;
    S_ = Mat2{eu_.x1, es_.x1, eu_.x2, es_.x2};
    Si_ = S_.inverse();
    cond_ = S_.norm2() * Si_.norm2();
    for (int j = 0; j < kSlopes; ++j) slopes_[j] = std::ldexp(1.0, -j);
  }
  double slope(int j) const { return slopes_[j]; }

  // Checks the square cell of side h centred at g. Where the cone test holds
  // at the centre but the Lipschitz slack of the cell eats the margin, the
  // cell is split in four (the slack halves) up to kMaxRefine times.
  void check(const Vec2& g, double h, int level, const std::vector<int>& js, bool refine,
             CellStats& out, Witness& wit) const {
    const double sigma = L_ * h / std::sqrt(2.0);
    const double sig_e = cond_ * sigma;
    Mat2 df = spec_.jacobian(g);
    Mat2 dfi = df.inverse();
    Mat2 E = Si_ * df * S_;
    Mat2 N = E.inverse();
    double nN = N.norm2(), nDi = dfi.norm2();
    double tau_e = nN * sig_e < 1 ? nN * nN * sig_e / (1 - nN * sig_e) : INFINITY;
    double tau = nDi * sigma < 1 ? nDi * nDi * sigma / (1 - nDi * sigma) : INFINITY;
    bool want_refine = false;
    for (int j : js) {
      double k = slopes_[j], w = std::sqrt(1 + k * k);
      bool ur = cone_maps_inside(E.a, E.b, E.c, E.d, k, 0.0);
      bool us = ur && cone_maps_inside(E.a, E.b, E.c, E.d, k, sig_e * w);
      bool sr = cone_maps_inside(N.d, N.c, N.b, N.a, k, 0.0);
      bool ss = sr && cone_maps_inside(N.d, N.c, N.b, N.a, k, tau_e * w);
      if ((!ur || !sr) && j == 0 && !wit.have) {
        wit.have = true;
        wit.at = g;
        wit.what = !ur ? "unstable cone not mapped into itself by Df"
                       : "stable cone not mapped into itself by Df^-1";
      }
      double ug = min_gain(df, eu_, es_, k), sg = min_gain(dfi, es_, eu_, k);
      out.u_raw[j] = ur;
      out.s_raw[j] = sr;
      out.u_sl[j] = us;
      out.s_sl[j] = ss;
      out.u_gain[j] = ug - sigma;
      out.s_gain[j] = sg - tau;
      if ((ur && !us) || (sr && !ss) || (ug > 1 && ug - sigma <= 1) || (sg > 1 && sg - tau <= 1))
        want_refine = true;
    }
    if (!refine || !want_refine || level >= kMaxRefine) return;
    CellStats sub;
    sub.reset();
    Witness ignore;
    ignore.have = true;
    for (int q = 0; q < 4; ++q) {
      Vec2 c{g.x1 + ((q & 1) ? 0.25 : -0.25) * h, g.x2 + ((q & 2) ? 0.25 : -0.25) * h};
      CellStats one;
      one.reset();
      check(c, 0.5 * h, level + 1, js, refine, one, ignore);
      sub.merge(one);
    }
    for (int j : js) {
      // Either bound is valid for the cell; keep the better one.
      if (!out.u_sl[j] && sub.u_sl[j]) out.u_sl[j] = true;
      if (!out.s_sl[j] && sub.s_sl[j]) out.s_sl[j] = true;
      out.u_raw[j] = out.u_raw[j] && sub.u_raw[j];
      out.s_raw[j] = out.s_raw[j] && sub.s_raw[j];
      out.u_sl[j] = out.u_sl[j] && out.u_raw[j];
      out.s_sl[j] = out.s_sl[j] && out.s_raw[j];
      out.u_gain[j] = std::max(out.u_gain[j], sub.u_gain[j]);
      out.s_gain[j] = std::max(out.s_gain[j], sub.s_gain[j]);
    }
  }

 private:
  const MapSpec& spec_;
  double L_;
  Vec2 eu_, es_;
  Mat2 S_, Si_;
  double cond_;
  double slopes_[kSlopes];
};

}  // namespace

AnosovCertificate verify_anosov(const MapSpec& spec, double grid_step) {
  const int n = std::max(1, int(std::ceil(1.0 / grid_step)));
  const double h = 1.0 / n;
  const double L = spec.derivative_lipschitz_bound();
  const double sigma = L * h / std::sqrt(2.0);
  ConeChecker checker(spec, L);

  auto scan = [&](const std::vector<int>& js, bool refine, CellStats& all, Witness& wit) {
    std::vector<CellStats> rows(n);
    std::vector<Witness> wits(n);
    parallel_for(std::size_t(n), [&](std::size_t i) {
      rows[i].reset();
      for (int jj = 0; jj < n; ++jj) {
        CellStats one;
        one.reset();
        checker.check(Vec2{(i + 0.5) * h, (jj + 0.5) * h}, h, 0, js, refine, one, wits[i]);
        rows[i].merge(one);
      }
    });
    all.reset();
    for (int i = 0; i < n; ++i) {
      all.merge(rows[i]);
      if (wits[i].have && !wit.have) wit = wits[i];
    }
  };

  auto pick = [&](const bool* ok, const double* gain) {
    int best = -1;
    for (int j = 0; j < kSlopes; ++j)
      if (ok[j] && gain[j] > 1.0 && (best < 0 || gain[j] > gain[best])) best = j;
    return best;
  };

  std::vector<int> every(kSlopes);
  for (int j = 0; j < kSlopes; ++j) every[j] = j;
  CellStats all;
  Witness wit;
  scan(every, false, all, wit);
  if (!wit.have && (pick(all.u_sl, all.u_gain) < 0 || pick(all.s_sl, all.s_gain) < 0)) {
    // Second pass with cell refinement, restricted to the apertures that pass
    // without slack and have the largest raw margins.
    double ug[kSlopes], sg[kSlopes];
    for (int j = 0; j < kSlopes; ++j) {
      ug[j] = all.u_gain[j] + sigma;
      sg[j] = all.s_gain[j];
    }
    int cu = -1, cs = -1;
    for (int j = 0; j < kSlopes; ++j) {
      if (all.u_raw[j] && (cu < 0 || ug[j] > ug[cu])) cu = j;
      if (all.s_raw[j] && (cs < 0 || sg[j] > sg[cs])) cs = j;
    }
    if (cu >= 0 && cs >= 0) {
      std::vector<int> cand{cu};
      if (cs != cu) cand.push_back(cs);
      CellStats fine;
      Witness w2;
      scan(cand, true, fine, w2);
      for (int j : cand) {
        all.u_sl[j] = fine.u_sl[j];
        all.s_sl[j] = fine.s_sl[j];
        all.u_gain[j] = fine.u_gain[j];
        all.s_gain[j] = fine.s_gain[j];
      }
    }
  }
  int ju = pick(all.u_sl, all.u_gain), js = pick(all.s_sl, all.s_gain);
  if (ju < 0 || js < 0) {
    bool raw_u = false, raw_s = false;
    for (int j = 0; j < kSlopes; ++j) {
      raw_u = raw_u || all.u_raw[j];
      raw_s = raw_s || all.s_raw[j];
    }
    std::ostringstream os;
    if (raw_u && raw_s && !wit.have) {
      os << "cone conditions hold at grid points but the Lipschitz slack " << sigma
         << " exceeds the margin at grid step " << h << "; refine the grid";
      throw GridTooCoarse(os.str());
    }
    if (wit.have) {
      os << wit.what << " at (" << wit.at.x1 << ", " << wit.at.x2 << ")";
    } else {
      os << "no cone aperture gives expansion > 1 on the unstable cone and contraction < 1 on the stable cone";
    }
    throw NotAnosov(os.str());
  }

  const Vec2 eu = spec.linear.e_u, es = spec.linear.e_s;
  AnosovCertificate c;
  c.cone_slope_u = checker.slope(ju);
  c.cone_slope_s = checker.slope(js);
  c.cone_aperture_u = std::atan(c.cone_slope_u);
  c.cone_aperture_s = std::atan(c.cone_slope_s);
  c.expansion_lb = all.u_gain[ju];
  c.contraction_ub = 1.0 / all.s_gain[js];
  c.grid_step = h;
  c.lipschitz_slack = sigma;
  // Transversality of the two cones fixes the product-structure scale.
  double gamma = M_PI / 2;
  for (double su : {1.0, -1.0})
    for (double ss : {1.0, -1.0}) {
      Vec2 u = normalized(eu + es * (su * c.cone_slope_u));
      Vec2 s = normalized(es + eu * (ss * c.cone_slope_s));
      gamma = std::min(gamma, std::acos(std::min(1.0, std::abs(dot(u, s)))));
    }
  c.product_epsilon = 0.1;
  c.product_delta = 0.5 * c.product_epsilon * std::sin(gamma);
  return c;
}

const AnosovCertificate& cached_certificate(const MapSpec& spec) {
  static std::mutex mu;
  static std::map<std::string, AnosovCertificate> cache;
  std::string key = map_spec_to_json(spec);
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
  }
  AnosovCertificate c = verify_anosov(spec);
  std::lock_guard<std::mutex> lock(mu);
  return cache.emplace(key, c).first->second;
}

int default_depth(const MapSpec& spec) { return cached_certificate(spec).default_depth(); }

// ---------------------------------------------------------------------------
// Map-spec files

using nlohmann::json;

namespace {

int line_of(const std::string& text, std::size_t byte) {
  int line = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i)
    if (text[i] == '\n') ++line;
  return line;
}

// Line of the first occurrence of "key" in the raw text, for error messages.
int key_line(const std::string& text, const std::string& key) {
  auto pos = text.find("\"" + key + "\"");
  return pos == std::string::npos ? 0 : line_of(text, pos);
}

[[noreturn]] void schema_fail(const std::string& origin, const std::string& text,
                              const std::string& key, const std::string& msg) {
  std::ostringstream os;
  os << origin;
  int ln = key_line(text, key);
  if (ln > 0) os << ":" << ln;
  os << ": field '" << key << "': " << msg;
  throw SchemaError(os.str());
}

double num_field(const json& v, const std::string& origin, const std::string& text,
                 const std::string& key) {
  if (!v.is_number()) schema_fail(origin, text, key, "expected a number");
  return v.get<double>();
}

std::int64_t int_field(const json& v, const std::string& origin, const std::string& text,
                       const std::string& key) {
  if (v.is_number_integer()) return v.get<std::int64_t>();
  if (v.is_number_float()) {
    double d = v.get<double>();
    if (d == std::floor(d)) return std::int64_t(d);
  }
  schema_fail(origin, text, key, "expected an integer");
}

std::vector<PerturbationTerm> parse_terms(const json& arr, const std::string& origin,
                                          const std::string& text, const std::string& key) {
  if (!arr.is_array()) schema_fail(origin, text, key, "expected an array of terms");
  std::vector<PerturbationTerm> out;
  for (const auto& t : arr) {
    if (!t.is_object()) schema_fail(origin, text, key, "each term must be an object");
    PerturbationTerm term;
    bool have_k = false, have_amp = false;
    for (auto it = t.begin(); it != t.end(); ++it) {
      const std::string& f = it.key();
      const json& v = it.value();
      if (f == "k") {
        if (!v.is_array() || v.size() != 2) schema_fail(origin, text, f, "expected [int, int]");
        term.k = {int_field(v[0], origin, text, f), int_field(v[1], origin, text, f)};
        have_k = true;
      } else if (f == "amp") {
        if (!v.is_array() || v.size() != 2) schema_fail(origin, text, f, "expected [num, num]");
        term.amp = {num_field(v[0], origin, text, f), num_field(v[1], origin, text, f)};
        have_amp = true;
      } else if (f == "phase") {
        term.phase = num_field(v, origin, text, f);
      } else {
        schema_fail(origin, text, f, "unknown field in " + key + " term");
      }
    }
    if (!have_k) schema_fail(origin, text, key, "term is missing 'k'");
    if (!have_amp) schema_fail(origin, text, key, "term is missing 'amp'");
    out.push_back(term);
  }
  return out;
}

json terms_json(const std::vector<PerturbationTerm>& terms) {
  json arr = json::array();
  for (const auto& t : terms)
    arr.push_back({{"k", {t.k.n1, t.k.n2}}, {"amp", {t.amp.x1, t.amp.x2}}, {"phase", t.phase}});
  return arr;
}

}  // namespace

MapSpec parse_map_spec(const std::string& text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream os;
    os << origin << ":" << line_of(text, e.byte) << ": malformed JSON: " << e.what();
    throw SchemaError(os.str());
  }
  if (!doc.is_object()) throw SchemaError(origin + ": map spec must be a JSON object");
  MapSpec spec;
  bool have_linear = false;
  for (auto it = doc.begin(); it != doc.end(); ++it) {
    const std::string& key = it.key();
    const json& v = it.value();
    if (key == "name") {
      if (!v.is_string()) schema_fail(origin, text, key, "expected a string");
      spec.name = v.get<std::string>();
    } else if (key == "linear") {
      if (!v.is_array() || v.size() != 2 || !v[0].is_array() || !v[1].is_array() ||
          v[0].size() != 2 || v[1].size() != 2)
        schema_fail(origin, text, key, "expected [[int,int],[int,int]]");
      IntMat2 a{int_field(v[0][0], origin, text, key), int_field(v[0][1], origin, text, key),
                int_field(v[1][0], origin, text, key), int_field(v[1][1], origin, text, key)};
      spec.linear = validate_model(a);
      have_linear = true;
    } else if (key == "perturbation") {
      spec.terms = parse_terms(v, origin, text, key);
    } else if (key == "conjugator") {
      spec.conjugator = parse_terms(v, origin, text, key);
    } else {
      schema_fail(origin, text, key, "unknown field in map spec");
    }
  }
  if (!have_linear) throw SchemaError(origin + ": field 'linear': required field missing");
  if (spec.name.empty()) spec.name = origin;
  return spec;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path + ": cannot open file");
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

MapSpec load_map_spec(const std::string& path) { return parse_map_spec(read_text_file(path), path); }

std::string map_spec_to_json(const MapSpec& spec) {
  const IntMat2& a = spec.linear.a;
  json doc{{"name", spec.name},
           {"linear", {{a.a, a.b}, {a.c, a.d}}},
           {"perturbation", terms_json(spec.terms)}};
  if (!spec.conjugator.empty()) doc["conjugator"] = terms_json(spec.conjugator);
  return doc.dump(2);
}

std::string content_hash(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : bytes) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace anosov
