#include "anosov/shadowing.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "anosov/errors.hpp"

namespace anosov {

namespace {

LatticeVector jump(const MapSpec& f, const PlanePoint& a, const PlanePoint& b) {
  return round_lattice(f.lift(a) - b);
}

}  // namespace

std::vector<PlanePoint> cover_past(const MapSpec& f, const PlanePoint& xhat, int depth) {
  CosetIndex idx(f.linear.a);
  const IntMat2& A = f.linear.a;
  const std::int64_t det = A.det();
  std::vector<PlanePoint> past;
  // x^_-k = t_-k + c_-k with t reduced. F^-1(t + c) = F^-1(t + r) + q for
  // c = r + A q, r the coset representative.
  LatticeVector c = floor_part(xhat);
  PlanePoint t = project(xhat).lift();
  for (int k = 0; k < depth; ++k) {
    LatticeVector r = idx.reduce(c);
    LatticeVector diff{c.n1 - r.n1, c.n2 - r.n2};
    LatticeVector q{(A.d * diff.n1 - A.b * diff.n2) / det, (-A.c * diff.n1 + A.a * diff.n2) / det};
    PlanePoint y = invert_lift(f, t + r.as_vec());
    LatticeVector fy = floor_part(y);
    t = y - fy.as_vec();
    c = {fy.n1 + q.n1, fy.n2 + q.n2};
    past.push_back(t);
  }
  return past;
}

ShadowWindow cover_window(const MapSpec& f, const PlanePoint& xhat, int back, int fwd) {
  std::vector<PlanePoint> past = cover_past(f, xhat, back);
  past.insert(past.begin(), project(xhat).lift());
  ShadowWindow w;
  for (int k = back; k >= 0; --k) w.t.push_back(past[k]);
  w.origin = back;
  PlanePoint z = w.t.back();
  for (int k = 0; k < fwd; ++k) {
    PlanePoint fz = f.lift(z);
    z = project(fz).lift();
    w.t.push_back(z);
  }
  for (int j = 0; j + 1 < w.size(); ++j) w.n.push_back(jump(f, w.t[j], w.t[j + 1]));
  return w;
}

ShadowWindow chain_window(const MapSpec& f, const PastChain& chain, int extra_back, int fwd) {
  PastChain c = chain;
  if (extra_back > 0) c = extend_chain(f, chain, std::vector<int>(extra_back, 0));
  ShadowWindow w;
  for (int k = int(c.points.size()) - 1; k >= 0; --k) w.t.push_back(c.points[k].lift());
  w.origin = int(c.points.size()) - 1;
  PlanePoint z = w.t.back();
  for (int k = 0; k < fwd; ++k) {
    z = project(f.lift(z)).lift();
    w.t.push_back(z);
  }
  for (int j = 0; j + 1 < w.size(); ++j) w.n.push_back(jump(f, w.t[j], w.t[j + 1]));
  return w;
}

ShadowWindow forward_window(const MapSpec& f, const TorusPoint& x, int len) {
  ShadowWindow w;
  PlanePoint z = x.lift();
  for (int k = 0; k < len; ++k) {
    w.t.push_back(z);
    if (k + 1 < len) {
      PlanePoint fz = f.lift(z);
      PlanePoint nz = project(fz).lift();
      w.n.push_back(round_lattice(fz - nz));
      z = nz;
    }
  }
  return w;
}

ShadowWindow periodic_window(const MapSpec& f, const PeriodicOrbit& orbit, int reps) {
  ShadowWindow w;
  const int p = int(orbit.points.size());
  for (int r = 0; r < reps; ++r)
    for (int i = 0; i < p; ++i) w.t.push_back(orbit.points[i].lift());
  w.t.push_back(orbit.points[0].lift());
  for (int j = 0; j + 1 < w.size(); ++j) w.n.push_back(jump(f, w.t[j], w.t[j + 1]));
  return w;
}

ShadowWindow join_windows(const MapSpec& f, const ShadowWindow& a, const ShadowWindow& b) {
  ShadowWindow w = a;
  PlanePoint last = a.t.back();
  int skip = (!b.t.empty() && torus_distance(last, b.t.front()) < 1e-12) ? 1 : 0;
  for (std::size_t j = skip; j < b.t.size(); ++j) {
    w.n.push_back(jump(f, w.t.back(), b.t[j]));
    w.t.push_back(b.t[j]);
  }
  return w;
}

std::vector<PlanePoint> shadow(const MapSpec& g, const ShadowWindow& win, const std::vector<PlanePoint>* guess) {
  const int L = win.size();
  std::vector<PlanePoint> w = guess ? *guess : win.t;
  if (L == 0) return w;
  const Vec2 ds = g.linear.ds, du = g.linear.du;
  const int N = 2 * L;

  auto residual = [&](const std::vector<PlanePoint>& z, Eigen::VectorXd& r, std::vector<Mat2>* jac) {
    r.resize(N);
    r(0) = dot(ds, z[0] - win.t[0]);
    double mx = std::abs(r(0));
    if (jac) jac->resize(L);
    for (int j = 0; j + 1 < L; ++j) {
      PlanePoint gz;
      Mat2 dg;
      g.lift_and_jacobian(z[j], gz, dg);
      if (jac) (*jac)[j] = dg;
      Vec2 e = gz - z[j + 1] - win.n[j].as_vec();
      r(1 + 2 * j) = e.x1;
      r(2 + 2 * j) = e.x2;
      mx = std::max(mx, std::max(std::abs(e.x1), std::abs(e.x2)));
    }
    r(N - 1) = dot(du, z[L - 1] - win.t[L - 1]);
    mx = std::max(mx, std::abs(r(N - 1)));
    return mx;
  };

  Eigen::SparseMatrix<double> J(N, N);
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  bool analysed = false;
  Eigen::VectorXd r;
  std::vector<Mat2> dg;
  double rn = residual(w, r, &dg);
  for (int it = 0; it < 40 && rn > 1e-13; ++it) {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(6 * L + 4);
    trip.emplace_back(0, 0, ds.x1);
    trip.emplace_back(0, 1, ds.x2);
    for (int j = 0; j + 1 < L; ++j) {
      int row = 1 + 2 * j, c = 2 * j;
      trip.emplace_back(row, c, dg[j].a);
      trip.emplace_back(row, c + 1, dg[j].b);
      trip.emplace_back(row + 1, c, dg[j].c);
      trip.emplace_back(row + 1, c + 1, dg[j].d);
      trip.emplace_back(row, c + 2, -1.0);
      trip.emplace_back(row + 1, c + 3, -1.0);
    }
    trip.emplace_back(N - 1, N - 2, du.x1);
    trip.emplace_back(N - 1, N - 1, du.x2);
    J.setFromTriplets(trip.begin(), trip.end());
    if (!analysed) {
      lu.analyzePattern(J);
      analysed = true;
    }
    lu.factorize(J);
    if (lu.info() != Eigen::Success) throw NewtonDivergence("shadowing Jacobian is singular");
    Eigen::VectorXd step = lu.solve(r);
    double lam = 1.0;
    std::vector<PlanePoint> trial(L);
    Eigen::VectorXd rt;
    double rtn = rn;
    for (int h = 0; h < 30; ++h) {
      for (int j = 0; j < L; ++j) trial[j] = w[j] - Vec2{step(2 * j), step(2 * j + 1)} * lam;
      rtn = residual(trial, rt, nullptr);
      if (rtn < rn || h == 29) break;
      lam *= 0.5;
    }
    w.swap(trial);
    rn = residual(w, r, &dg);
  }
  if (!(rn < 1e-11)) throw NewtonDivergence("shadowing Newton stalled at residual " + std::to_string(rn));
  return w;
}

ConjugacyMap::ConjugacyMap(MapSpec f, MapSpec g, int back, int fwd)
    : f_(std::move(f)), g_(std::move(g)), back_(back), fwd_(fwd) {
  if (!(f_.linear.a == g_.linear.a))
    throw HomotopyMismatch("conjugacy needs a common linear part");
  same_ = same_map(f_, g_);
}

PlanePoint ConjugacyMap::operator()(const PlanePoint& xhat) const {
  if (same_) return xhat;
  ShadowWindow win = cover_window(f_, xhat, back_, fwd_);
  std::vector<PlanePoint> w = shadow(g_, win);
  return w[win.origin] + floor_part(xhat).as_vec();
}

std::vector<PlanePoint> ConjugacyMap::along_orbit(const ShadowWindow& win) const {
  const int L = win.size();
  if (same_) return win.t;
  std::vector<PlanePoint> out(L);
  const int chunk = 2000;
  for (int a = 0; a < L; a += chunk) {
    int b = std::min(L, a + chunk);
    int lo = std::max(0, a - back_), hi = std::min(L, b + fwd_);
    ShadowWindow sub;
    sub.t.assign(win.t.begin() + lo, win.t.begin() + hi);
    sub.n.assign(win.n.begin() + lo, win.n.begin() + (hi - 1));
    std::vector<PlanePoint> w = shadow(g_, sub);
    for (int j = a; j < b; ++j) out[j] = w[j - lo];
  }
  return out;
}

PastChain induced_orbit_conjugacy(const ConjugacyMap& H, const PastChain& chain) {
  const MapSpec& f = H.f();
  const MapSpec& g = H.g();
  for (std::size_t i = 0; i + 1 < chain.points.size(); ++i) {
    double e = torus_distance(f.map(chain.points[i + 1]).lift(), chain.points[i].lift());
    if (e > 1e-9)
      throw ChainNotLiftRealizable("chain step " + std::to_string(i) + " is not a preimage (gap " +
                                   std::to_string(e) + ")");
  }
  if (H.identity()) return chain;
  ShadowWindow win = chain_window(f, chain, H.back(), H.fwd());
  std::vector<PlanePoint> w = shadow(g, win);
  PastChain out;
  const int N = int(chain.length());
  for (int k = 0; k <= N; ++k) out.points.push_back(project(w[win.origin - k]));
  out.base = out.points[0];
  for (int k = 0; k < N; ++k) out.branches.push_back(branch_of(g, out.points[k + 1]));
  return out;
}

}  // namespace anosov
