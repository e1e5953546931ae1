#include "anosov/cocycle.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "anosov/errors.hpp"
#include "anosov/report.hpp"
#include "anosov/parallel.hpp"
#include "json.hpp"
#include "kernel.hpp"

namespace anosov {


int cocycle_depth(const MapSpec& spec) { return default_depth(spec) + 8; }

Cocycle log_stable_norm(int depth) {
  Cocycle c;
  c.kind = CocycleKind::LogStableNorm;
  c.name = "log_stable_norm";
  c.eval = [depth](const MapSpec& s, const TorusPoint& x, const PastChain*) {
    return std::log(stable_norm(s, x.lift(), depth > 0 ? depth : cocycle_depth(s)));
  };
  return c;
}

Cocycle log_jacobian() {
  Cocycle c;
  c.kind = CocycleKind::LogJacobian;
  c.name = "log_jacobian";
  c.eval = [](const MapSpec& s, const TorusPoint& x, const PastChain*) {
    return std::log(std::abs(s.jacobian(x.lift()).det()));
  };
  return c;
}

Cocycle custom_cocycle(std::string name, std::function<double(const MapSpec&, const TorusPoint&)> fn) {
  Cocycle c;
  c.name = std::move(name);
  c.eval = [fn](const MapSpec& s, const TorusPoint& x, const PastChain*) { return fn(s, x); };
  return c;
}

Cocycle custom_past_cocycle(std::string name,
                            std::function<double(const MapSpec&, const TorusPoint&, const PastChain&)> fn,
                            double modulus, double rate) {
  Cocycle c;
  c.name = std::move(name);
  c.needs_past = true;
  c.past_modulus = modulus;
  c.past_rate = rate;
  c.eval = [fn](const MapSpec& s, const TorusPoint& x, const PastChain* chain) {
    if (chain) return fn(s, x, *chain);
    return fn(s, x, canonical_chain(s, x, 48));
  };
  return c;
}

// ---------------------------------------------------------------------------
// Leaf integration with the arclength of the image carried along:
// z' = e^s(z), I' = r(z) = |Df(z) e^s(z)|.

namespace {

Vec2 oriented(Vec2 v, const Vec2& ref) { return dot(v, ref) < 0 ? -v : v; }

struct Walker {
  const MapSpec& spec;
  int depth;
  PlanePoint z;
  Vec2 orient;
  double I = 0.0;

  double rate_at(const PlanePoint& p, const Vec2& e) const { return norm(spec.jacobian(p) * e); }

  void step(double h) {
    Vec2 e1 = orient;
    double r1 = rate_at(z, e1);
    PlanePoint p2 = z + e1 * (0.5 * h);
    Vec2 e2 = oriented(stable_vector(spec, p2, depth), e1);
    double r2 = rate_at(p2, e2);
    PlanePoint p3 = z + e2 * (0.5 * h);
    Vec2 e3 = oriented(stable_vector(spec, p3, depth), e2);
    double r3 = rate_at(p3, e3);
    PlanePoint p4 = z + e3 * h;
    Vec2 e4 = oriented(stable_vector(spec, p4, depth), e3);
    double r4 = rate_at(p4, e4);
    z = z + (e1 + e2 * 2.0 + e3 * 2.0 + e4) * (h / 6.0);
    I += (r1 + 2 * r2 + 2 * r3 + r4) * (h / 6.0);
    orient = oriented(stable_vector(spec, z, depth), e4);
  }

  // Advance by arclength len >= 0 in steps of at most hmax.
  void advance(double len, double hmax) {
    if (len <= 0) return;
    int n = std::max(1, int(std::ceil(len / hmax - 1e-9)));
    for (int i = 0; i < n; ++i) step(len / n);
  }
};

int depth_of(const MapSpec& spec, const DensityOptions& opt) {
  return opt.depth > 0 ? opt.depth : cocycle_depth(spec);
}

}  // namespace

namespace {

using kernel::quad;

kernel::V<quad> to_quad(const PlanePoint& hi, const PlanePoint& lo) {
  return {quad(hi.x1) + quad(lo.x1), quad(hi.x2) + quad(lo.x2)};
}

void from_quad(const kernel::V<quad>& X, PlanePoint& hi, PlanePoint& lo) {
  hi = {double(X.x1), double(X.x2)};
  lo = {double(X.x1 - quad(hi.x1)), double(X.x2 - quad(hi.x2))};
}

}  // namespace

StableLeafChart::StableLeafChart(const MapSpec& spec, const PlanePoint& anchor, const DensityOptions& opt)
    : spec_(spec), hi_(anchor), lo_{0, 0}, opt_(opt), depth_(depth_of(spec, opt)) {
  orient_ = stable_vector(spec_, hi_, depth_);
}

StableLeafChart::StableLeafChart(const MapSpec& spec, const PlanePoint& hi, const PlanePoint& lo, const Vec2& orient,
                                 const DensityOptions& opt)
    : spec_(spec), hi_(hi), lo_(lo), orient_(orient), opt_(opt), depth_(depth_of(spec, opt)) {}

PlanePoint StableLeafChart::point(double s) const {
  Walker w{spec_, depth_, hi_, s < 0 ? -orient_ : orient_};
  w.advance(std::abs(s), opt_.step);
  return w.z;
}

double StableLeafChart::coordinate(const PlanePoint& y) const {
  PlanePoint yy = hi_ + torus_delta(y, hi_);
  double s = dot(orient_, yy - hi_);
  auto walk = [&](double t, Vec2& e) {
    Walker w{spec_, depth_, hi_, t < 0 ? -orient_ : orient_};
    w.advance(std::abs(t), opt_.step);
    e = w.orient;
    return w.z;
  };
  Vec2 e;
  PlanePoint z;
  for (int it = 0; it < 12; ++it) {
    z = walk(s, e);
    double tau = dot(e, yy - z) * (s < 0 ? -1 : 1);
    s += tau;
    if (std::abs(tau) < 1e-15) break;
  }
  z = walk(s, e);
  double gap = std::abs(cross(e, yy - z));
  if (gap > 1e-8) throw NotOnLeaf("point is " + std::to_string(gap) + " off the stable leaf");
  return s;
}

StableLeafChart StableLeafChart::image() const {
  kernel::V<quad> X = to_quad(hi_, lo_), FX;
  kernel::M<quad> DF;
  kernel::lift_and_jacobian(spec_, X, FX, DF);
  PlanePoint hi, lo;
  from_quad(FX, hi, lo);
  Vec2 o = oriented(stable_vector(spec_, hi, depth_), spec_.jacobian(hi_) * orient_);
  return StableLeafChart(spec_, hi, lo, o, opt_);
}

DensityProfile StableLeafChart::one_sided(const std::vector<double>& positions, double sign) const {
  DensityProfile out;
  out.positions = positions;
  const std::size_t n = positions.size();
  out.log_rho.assign(n, 0.0);
  out.image_positions.assign(n, 0.0);
  if (n == 0) return out;
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return std::abs(positions[a]) < std::abs(positions[b]); });
  std::vector<double> cur(n);
  for (std::size_t i = 0; i < n; ++i) cur[i] = std::abs(positions[order[i]]);

  // A roundoff error in the base point grows like lam_u^i across the leaf
  // while the segment shrinks like lam_s^i, and lam_s lam_u = |det A| > 1,
  // hence the extended-precision base orbit.
  kernel::V<quad> X = to_quad(hi_, lo_);
  PlanePoint xi = hi_;
  Vec2 oi = orient_ * sign;
  const double theta = spec_.is_linear() ? 0.5 : cached_certificate(spec_).contraction_ub;
  for (int level = 0; level < opt_.max_levels; ++level) {
    const double S = cur.back();
    const double h = std::min(opt_.step, std::max(S / 16, 1e-300));
    Walker w{spec_, depth_, xi, oi};
    const double lr0 = std::log(w.rate_at(xi, oi));
    double s = 0, maxinc = 0;
    for (std::size_t q = 0; q < n; ++q) {
      w.advance(cur[q] - s, h);
      s = cur[q];
      double inc = std::log(w.rate_at(w.z, w.orient)) - lr0;
      out.log_rho[order[q]] += inc;
      maxinc = std::max(maxinc, std::abs(inc));
      cur[q] = w.I;
    }
    if (level == 0)
      for (std::size_t q = 0; q < n; ++q) out.image_positions[order[q]] = sign * cur[q];
    out.levels = level + 1;
    out.last_increment = maxinc;
    if (spec_.is_linear() || maxinc < opt_.stop) break;
    Vec2 dir = spec_.jacobian(xi) * oi;
    kernel::V<quad> FX;
    kernel::M<quad> DF;
    kernel::lift_and_jacobian(spec_, X, FX, DF);
    X = kernel::reduce(FX);
    xi = {double(X.x1), double(X.x2)};
    oi = oriented(stable_vector(spec_, xi, depth_), dir);
  }
  out.tail_bound = out.last_increment * theta / (1 - theta);
  return out;
}

DensityProfile StableLeafChart::profile(const std::vector<double>& positions) const {
  std::vector<double> pos, neg;
  std::vector<std::size_t> ip, in;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (positions[i] > 0) pos.push_back(positions[i]), ip.push_back(i);
    if (positions[i] < 0) neg.push_back(positions[i]), in.push_back(i);
  }
  DensityProfile out;
  out.positions = positions;
  out.log_rho.assign(positions.size(), 0.0);
  out.image_positions.assign(positions.size(), 0.0);
  for (int side = 0; side < 2; ++side) {
    auto& p = side ? neg : pos;
    auto& idx = side ? in : ip;
    if (p.empty()) continue;
    DensityProfile d = one_sided(p, side ? -1.0 : 1.0);
    for (std::size_t k = 0; k < p.size(); ++k) {
      out.log_rho[idx[k]] = d.log_rho[k];
      out.image_positions[idx[k]] = d.image_positions[k];
    }
    out.levels = std::max(out.levels, d.levels);
    out.last_increment = std::max(out.last_increment, d.last_increment);
    out.tail_bound = std::max(out.tail_bound, d.tail_bound);
  }
  return out;
}

double StableLeafChart::rho(double s1, double s2) const {
  DensityProfile p = profile({s1, s2});
  return std::exp(p.log_rho[0] - p.log_rho[1]);
}

AffineDistance StableLeafChart::affine(double s1, double s2, double step) const {
  AffineDistance out;
  double L = std::abs(s2 - s1);
  out.arclength = L;
  if (L == 0) return out;
  int M = 4 * std::max(1, int(std::ceil(L / (4 * step))));
  std::vector<double> pos(M + 1);
  for (int k = 0; k <= M; ++k) pos[k] = s1 + (s2 - s1) * k / M;
  pos.push_back(s1);
  DensityProfile p = profile(pos);
  const double l1 = p.log_rho[M + 1];
  auto simpson = [&](int stride) {
    int m = M / stride;
    double hh = L / m, acc = 0;
    for (int k = 0; k <= m; ++k) {
      double w = (k == 0 || k == m) ? 1 : (k % 2 ? 4 : 2);
      acc += w * std::exp(p.log_rho[k * stride] - l1);
    }
    return acc * hh / 3;
  };
  double a = simpson(1), b = simpson(2);
  out.value = a;
  out.richardson = std::abs(a - b) / 15;
  return out;
}

DensityProfile density_profile(const MapSpec& spec, const PlanePoint& x, const std::vector<double>& positions,
                               const DensityOptions& opt) {
  return StableLeafChart(spec, x, opt).profile(positions);
}

double density_rho(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, const DensityOptions& opt) {
  StableLeafChart c(spec, x, opt);
  return c.rho(0.0, c.coordinate(y));
}

AffineDistance affine_distance_report(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, double step,
                                      const DensityOptions& opt) {
  StableLeafChart c(spec, x, opt);
  return c.affine(0.0, c.coordinate(y), step);
}

double affine_distance(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, double step,
                       const DensityOptions& opt) {
  return affine_distance_report(spec, x, y, step, opt).value;
}

// ---------------------------------------------------------------------------
// Periodic obstructions

PastChain periodic_chain(const MapSpec& spec, const PeriodicOrbit& orbit, int index, int length) {
  const int p = int(orbit.points.size());
  PastChain c;
  for (int i = 0; i <= length; ++i) c.points.push_back(orbit.points[(((index - i) % p) + p) % p]);
  c.base = c.points[0];
  for (int i = 0; i < length; ++i) c.branches.push_back(branch_of(spec, c.points[i + 1]));
  return c;
}

double birkhoff_sum(const MapSpec& spec, const PeriodicOrbit& orbit, const Cocycle& phi) {
  double s = 0;
  for (int i = 0; i < int(orbit.points.size()); ++i) {
    if (phi.needs_past) {
      PastChain c = periodic_chain(spec, orbit, i, 64);
      s += phi(spec, orbit.points[i], &c);
    } else {
      s += phi(spec, orbit.points[i]);
    }
  }
  return s;
}

ObstructionReport periodic_obstruction(const MapSpec& f, const MapSpec& g, const std::vector<OrbitPair>& pairs,
                                       const Cocycle& phi_f, const Cocycle& phi_g) {
  if (pairs.empty()) throw EmptyMatching("no matched orbit pairs");
  ObstructionReport rep;
  rep.rows.resize(pairs.size());
  parallel_for(pairs.size(), [&](std::size_t i) {
    rep.rows[i].pair = int(i);
    rep.rows[i].period = pairs[i].p.period;
    rep.rows[i].obstruction = birkhoff_sum(f, pairs[i].p, phi_f) - birkhoff_sum(g, pairs[i].q, phi_g);
  });
  for (const auto& r : rep.rows) rep.max_abs = std::max(rep.max_abs, std::abs(r.obstruction));
  return rep;
}

std::vector<OrbitPair> pairs_from_matches(const std::vector<PeriodicOrbit>& f_orbits,
                                          const std::vector<PeriodicMatch>& matches) {
  std::vector<OrbitPair> out;
  for (std::size_t i = 0; i < f_orbits.size() && i < matches.size(); ++i) out.push_back({f_orbits[i], matches[i].q});
  return out;
}

std::string obstruction_to_json(const ObstructionReport& rep) {
  Json j;
  j["max_abs"] = rep.max_abs;
  j["rows"] = Json::array();
  for (const auto& r : rep.rows) j["rows"].push_back({{"pair", r.pair}, {"period", r.period}, {"obstruction", r.obstruction}});
  return dump_json(j);
}

std::string obstruction_to_csv(const ObstructionReport& rep) {
  std::string s = "pair,period,obstruction\n";
  char buf[96];
  for (const auto& r : rep.rows) {
    std::snprintf(buf, sizeof buf, "%d,%d,%.17g\n", r.pair, r.period, r.obstruction);
    s += buf;
  }
  return s;
}

// ---------------------------------------------------------------------------
// Transfer functions

TransferFunction::TransferFunction(std::vector<PlanePoint> points, std::vector<double> values)
    : pts_(std::move(points)), vals_(std::move(values)) {
  for (auto& p : pts_) p = project(p).lift();
  cells_ = std::max(1, int(std::sqrt(double(pts_.size()) / 6)));
  grid_.assign(std::size_t(cells_) * cells_, {});
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    int a = std::min(cells_ - 1, int(pts_[i].x1 * cells_)), b = std::min(cells_ - 1, int(pts_[i].x2 * cells_));
    grid_[std::size_t(a) * cells_ + b].push_back(std::uint32_t(i));
  }
}

void TransferFunction::neighbours(const PlanePoint& x, std::size_t k,
                                  std::vector<std::pair<double, std::size_t>>& out) const {
  out.clear();
  if (pts_.empty()) return;
  k = std::min(k, pts_.size());
  TorusPoint t = project(x);
  int a = std::min(cells_ - 1, int(t.x1 * cells_)), b = std::min(cells_ - 1, int(t.x2 * cells_));
  const double cell = 1.0 / cells_;
  for (int r = 1;; ++r) {
    out.clear();
    int span = std::min(r, (cells_ - 1) / 2 + 1);
    bool whole = 2 * r + 1 >= cells_;
    int lo = whole ? 0 : -span, hi = whole ? cells_ - 1 : span;
    for (int di = lo; di <= hi; ++di)
      for (int dj = lo; dj <= hi; ++dj) {
        int i = whole ? di : ((a + di) % cells_ + cells_) % cells_;
        int j = whole ? dj : ((b + dj) % cells_ + cells_) % cells_;
        for (std::uint32_t idx : grid_[std::size_t(i) * cells_ + j])
          out.push_back({torus_distance(pts_[idx], t.lift()), idx});
      }
    if (out.size() >= k) {
      std::partial_sort(out.begin(), out.begin() + k, out.end());
      // Points outside the searched block are at least r cells away.
      if (whole || out[k - 1].first <= r * cell) {
        out.resize(k);
        return;
      }
    }
  }
}

double TransferFunction::nearest(const PlanePoint& x, double* dist) const {
  std::vector<std::pair<double, std::size_t>> nb;
  neighbours(x, 1, nb);
  if (nb.empty()) return 0.0;
  if (dist) *dist = nb[0].first;
  return vals_[nb[0].second];
}

double TransferFunction::operator()(const PlanePoint& x) const {
  constexpr std::size_t K = 24;
  std::vector<std::pair<double, std::size_t>> nb;
  neighbours(x, K, nb);
  if (nb.size() < 12) return nb.empty() ? 0.0 : vals_[nb[0].second];
  const double scale = std::max(nb.back().first, 1e-300);
  const PlanePoint c = project(x).lift();
  Eigen::MatrixXd M(nb.size(), 10);
  Eigen::VectorXd v(nb.size());
  for (std::size_t i = 0; i < nb.size(); ++i) {
    Vec2 d = torus_delta(pts_[nb[i].second], c) / scale;
    double u = d.x1, w = d.x2;
    M.row(i) << 1, u, w, u * u, u * w, w * w, u * u * u, u * u * w, u * w * w, w * w * w;
    v(i) = vals_[nb[i].second];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(M);
  if (qr.rank() < 10) return vals_[nb[0].second];
  return qr.solve(v)(0);
}

double TransferFunction::fill_radius(int probe) const {
  std::vector<double> rows(probe, 0.0);
  parallel_for(probe, [&](std::size_t i) {
    for (int j = 0; j < probe; ++j) {
      double d = 0;
      nearest({(i + 0.5) / probe, (j + 0.5) / probe}, &d);
      rows[i] = std::max(rows[i], d);
    }
  });
  return rows.empty() ? 0.0 : *std::max_element(rows.begin(), rows.end());
}

double TransferFunction::max_abs() const {
  double m = 0;
  for (double v : vals_) m = std::max(m, std::abs(v));
  return m;
}

std::string TransferFunction::to_csv() const {
  std::string s = "x1,x2,u\n";
  char buf[96];
  for (std::size_t i = 0; i < pts_.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", pts_[i].x1, pts_[i].x2, vals_[i]);
    s += buf;
  }
  return s;
}

namespace {

void check_fill(const std::vector<PlanePoint>& pts, int cells) {
  std::vector<char> hit(std::size_t(cells) * cells, 0);
  for (const auto& p : pts) {
    TorusPoint t = project(p);
    hit[std::size_t(std::min(cells - 1, int(t.x1 * cells))) * cells + std::min(cells - 1, int(t.x2 * cells))] = 1;
  }
  std::size_t empty = std::count(hit.begin(), hit.end(), 0);
  if (empty)
    throw OrbitNotDense(std::to_string(empty) + " of " + std::to_string(hit.size()) +
                        " cells were not visited by the orbit");
}

// u_0 = 0, u_{k+1} = u_k + psi_k.
TransferFunction integrate_orbit(std::vector<PlanePoint> pts, const std::vector<double>& psi) {
  std::vector<double> u(pts.size(), 0.0);
  long double acc = 0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    acc += psi[k];
    u[k + 1] = double(acc);
  }
  return TransferFunction(std::move(pts), std::move(u));
}

}  // namespace

TransferFunction solve_coboundary(const MapSpec& spec, const Cocycle& psi, const TorusPoint& seed, int orbit_len,
                                  double tol, const std::vector<PeriodicOrbit>* orbits, const CoboundaryOptions& opt) {
  if (orbits) {
    for (const auto& o : *orbits) {
      double b = birkhoff_sum(spec, o, psi);
      if (std::abs(b) > tol)
        throw ObstructionNonzero("period-" + std::to_string(o.period) + " orbit has Birkhoff sum " + std::to_string(b));
    }
  }
  std::vector<PlanePoint> pts(orbit_len + 1);
  TorusPoint x = seed;
  for (int k = 0; k <= orbit_len; ++k) {
    pts[k] = x.lift();
    x = spec.map(x);
  }
  check_fill(pts, opt.fill_cells);
  std::vector<double> vals(orbit_len, 0.0);
  parallel_for(orbit_len, [&](std::size_t k) { vals[k] = psi(spec, project(pts[k])); });
  TransferFunction tf = integrate_orbit(std::move(pts), vals);

  Rng rng = make_rng(opt.salt);
  std::vector<PlanePoint> probe(opt.held_out);
  for (auto& p : probe) p = {uniform01(rng), uniform01(rng)};
  std::vector<double> res(opt.held_out, 0.0);
  parallel_for(opt.held_out, [&](std::size_t i) {
    TorusPoint p = project(probe[i]);
    res[i] = std::abs(psi(spec, p) - tf(spec.map(p).lift()) + tf(probe[i]));
  });
  tf.residual = res.empty() ? 0.0 : *std::max_element(res.begin(), res.end());
  tf.held_out = opt.held_out;
  tf.tol = tol;
  return tf;
}

// ---------------------------------------------------------------------------
// Forward reduction

void estimate_past_modulus(const MapSpec& spec, const Cocycle& phi, int chain_depth, double* modulus, double* rate) {
  Rng rng = make_rng(0x5eed);
  const int d = int(std::llabs(spec.linear.det));
  std::uniform_int_distribution<int> pick(0, d - 1);
  const int depths[] = {2, 4, 6, 8, 10};
  double D[5] = {0, 0, 0, 0, 0};
  for (int s = 0; s < 24; ++s) {
    TorusPoint base{uniform01(rng), uniform01(rng)};
    std::vector<int> a(chain_depth), b;
    for (auto& v : a) v = pick(rng);
    for (int k = 0; k < 5; ++k) {
      b = a;
      // Differ from depth j on: flip the branch there and randomise the rest.
      int j = depths[k];
      b[j] = (a[j] + 1) % d;
      for (int i = j + 1; i < chain_depth; ++i) b[i] = pick(rng);
      PastChain ca = make_chain(spec, base, a), cb = make_chain(spec, base, b);
      D[k] = std::max(D[k], std::abs(phi(spec, base, &ca) - phi(spec, base, &cb)));
    }
  }
  double th = 0;
  for (int k = 0; k + 1 < 5; ++k)
    if (D[k] > 1e-15 && D[k + 1] > 1e-15) th = std::max(th, std::sqrt(D[k + 1] / D[k]));
  if (th == 0) {
    *modulus = 0;
    *rate = 0.5;
    return;
  }
  th = std::clamp(th, 1e-3, 0.999);
  double C = 0;
  for (int k = 0; k < 5; ++k) C = std::max(C, D[k] / std::pow(th, depths[k]));
  *modulus = C;
  *rate = th;
}

ForwardReduction reduce_to_forward(const MapSpec& spec, const Cocycle& phi, int J, int chain_depth) {
  ForwardReduction out;
  out.J = J;
  out.chain_depth = chain_depth;
  if (!phi.needs_past) {
    out.psi = phi;
    out.u_hat = [](const PastChain&) { return 0.0; };
    return out;
  }
  double C = phi.past_modulus, th = phi.past_rate;
  if (!(C > 0 && th > 0)) estimate_past_modulus(spec, phi, chain_depth, &C, &th);
  out.modulus = C;
  out.rate = th;
  out.tail_bound = 2 * C * std::pow(th, J + 1) + 1e-13;

  MapSpec sp = spec;
  Cocycle ph = phi;
  auto u_hat = [sp, ph, J, chain_depth](const PastChain& y) {
    PastChain a = y;
    PastChain b = canonical_chain(sp, y.base, std::max<int>(chain_depth, int(y.length())));
    double s = 0;
    for (int j = 0; j <= J; ++j) {
      s += ph(sp, a.base, &a) - ph(sp, b.base, &b);
      if (j < J) {
        a = shift_chain(sp, a);
        b = shift_chain(sp, b);
      }
    }
    return s;
  };
  out.u_hat = u_hat;
  Cocycle psi;
  psi.kind = CocycleKind::Custom;
  psi.name = phi.name + "_forward";
  psi.needs_past = false;
  psi.eval = [sp, ph, u_hat, chain_depth](const MapSpec&, const TorusPoint& x, const PastChain* chain) {
    PastChain y = chain ? *chain : canonical_chain(sp, x, chain_depth);
    return ph(sp, y.base, &y) + u_hat(shift_chain(sp, y)) - u_hat(y);
  };
  out.psi = psi;
  return out;
}

// ---------------------------------------------------------------------------

TransferReport transfer_P(const ConjugacyMap& H, int samples, double tol, const std::vector<PeriodicOrbit>* orbits,
                          int ratio_pairs) {
  const MapSpec& f = H.f();
  const MapSpec& g = H.g();
  const int df = cocycle_depth(f), dg = cocycle_depth(g);
  Rng rng = make_rng(0x7a5);
  TorusPoint seed{uniform01(rng), uniform01(rng)};

  auto psi_at = [&](const PlanePoint& x, const PlanePoint& hx) {
    return std::log(stable_norm(f, x, df)) - std::log(stable_norm(g, project(hx).lift(), dg));
  };

  if (orbits) {
    // H maps an f-orbit into the stable set of its g-partner, so sums are
    // taken along the shadow of the periodic future.
    for (const auto& o : *orbits) {
      ShadowWindow w = join_windows(f, cover_window(f, o.point.lift(), H.back(), 0), periodic_window(f, o, 40));
      std::vector<PlanePoint> hw = H.along_orbit(w);
      double s = 0;
      int base = w.origin + 20 * o.period;
      for (int i = 0; i < o.period; ++i) s += psi_at(w.t[base + i], hw[base + i]);
      if (std::abs(s) > tol)
        throw ObstructionNonzero("period-" + std::to_string(o.period) + " obstruction " + std::to_string(s));
    }
  }

  ShadowWindow past = cover_window(f, seed.lift(), H.back(), 0);
  ShadowWindow win = join_windows(f, past, forward_window(f, seed, samples + 1));
  std::vector<PlanePoint> hw = H.along_orbit(win);
  const int o = win.origin;
  std::vector<PlanePoint> pts(win.t.begin() + o, win.t.end());
  std::vector<double> psi(samples, 0.0);
  parallel_for(samples, [&](std::size_t k) { psi[k] = psi_at(win.t[o + k], hw[o + k]); });
  check_fill(pts, 32);

  TransferReport rep;
  rep.U = integrate_orbit(std::move(pts), psi);
  rep.P.resize(rep.U.size());
  for (std::size_t i = 0; i < rep.U.size(); ++i) rep.P[i] = std::exp(rep.U.values()[i]);

  const int held = 60;
  std::vector<double> res(held, 0.0);
  std::vector<PlanePoint> probe(held);
  for (auto& p : probe) p = {uniform01(rng), uniform01(rng)};
  parallel_for(held, [&](std::size_t i) {
    PlanePoint x = probe[i];
    res[i] = std::abs(psi_at(x, H(x)) - rep.U(f.lift(x)) + rep.U(x));
  });
  rep.U.residual = *std::max_element(res.begin(), res.end());
  rep.U.held_out = held;
  rep.U.tol = tol;
  if (rep.U.residual > tol)
    throw ObstructionNonzero("coboundary residual " + std::to_string(rep.U.residual) + " exceeds " +
                             std::to_string(tol));

  // Ratio law against finite differences of H along stable leaves.
  const double delta = 1e-3, sep = 0.2;
  std::vector<double> err(ratio_pairs, 0.0);
  std::vector<PlanePoint> xs(ratio_pairs);
  for (auto& p : xs) p = {uniform01(rng), uniform01(rng)};
  parallel_for(ratio_pairs, [&](std::size_t i) {
    PlanePoint x = xs[i];
    PlanePoint y = leaf_point(f, x, sep);
    auto DH = [&](const PlanePoint& z) {
      PlanePoint a = leaf_point(f, z, -delta), b = leaf_point(f, z, delta);
      return norm(H(b) - H(a)) / (2 * delta);
    };
    double lhs = DH(y) / DH(x);
    double rhs = std::exp(rep.U(x) - rep.U(y));
    err[i] = std::abs(lhs / rhs - 1);
  });
  rep.ratio_pairs = ratio_pairs;
  rep.ratio_error = err.empty() ? 0.0 : *std::max_element(err.begin(), err.end());
  return rep;
}

}  // namespace anosov

namespace anosov {

PlanePoint leaf_point(const MapSpec& spec, const PlanePoint& x, double s, const DensityOptions& opt) {
  return StableLeafChart(spec, x, opt).point(s);
}

double leaf_coordinate(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, const DensityOptions& opt) {
  return StableLeafChart(spec, x, opt).coordinate(y);
}

}  // namespace anosov
