#include "anosov/hyperbolic.hpp"

#include <cstdio>
#include <sstream>

#include "anosov/errors.hpp"
#include "kernel.hpp"

namespace anosov {

using kernel::M;
using kernel::V;
using kernel::quad;

Direction Direction::from_vector(const Vec2& v) {
  double th = std::atan2(v.x2, v.x1);
  if (th < 0) th += M_PI;
  if (th >= M_PI) th -= M_PI;
  return {th};
}

double angular_distance(const Direction& a, const Direction& b) {
  double d = std::abs(a.theta - b.theta);
  d = std::fmod(d, M_PI);
  return std::min(d, M_PI - d);
}

double line_angle(const Vec2& a, const Vec2& b) {
  // atan2 form stays accurate for nearly parallel lines.
  double c = std::abs(dot(a, b)), s = std::abs(cross(a, b));
  return std::atan2(s, c);
}

// ---------------------------------------------------------------------------
// Past chains

namespace {

TorusPoint preimage_branch(const MapSpec& spec, const CosetIndex& idx, const TorusPoint& x, int b) {
  if (b < 0 || std::size_t(b) >= idx.size())
    throw std::invalid_argument("branch index " + std::to_string(b) + " out of range");
  return project(invert_lift(spec, x.lift() + idx.reps()[b].as_vec()));
}

}  // namespace

PastChain make_chain(const MapSpec& spec, const TorusPoint& base, const std::vector<int>& branches) {
  PastChain c;
  c.base = base;
  c.points.push_back(base);
  return extend_chain(spec, c, branches);
}

PastChain extend_chain(const MapSpec& spec, const PastChain& c, const std::vector<int>& more) {
  CosetIndex idx(spec.linear.a);
  PastChain out = c;
  for (int b : more) {
    out.points.push_back(preimage_branch(spec, idx, out.points.back(), b));
    out.branches.push_back(b);
  }
  return out;
}

PastChain canonical_chain(const MapSpec& spec, const TorusPoint& base, int length) {
  return make_chain(spec, base, std::vector<int>(std::max(0, length), 0));
}

PastChain random_chain(const MapSpec& spec, const TorusPoint& base, int length, Rng& rng) {
  int d = int(std::llabs(spec.linear.det));
  std::uniform_int_distribution<int> pick(0, d - 1);
  std::vector<int> br(std::max(0, length));
  for (auto& b : br) b = pick(rng);
  return make_chain(spec, base, br);
}

int branch_of(const MapSpec& spec, const TorusPoint& x) {
  CosetIndex idx(spec.linear.a);
  PlanePoint fx = spec.lift(x.lift());
  return int(idx.index_of(floor_part(fx)));
}

PastChain shift_chain(const MapSpec& spec, const PastChain& c) {
  PastChain out;
  out.base = spec.map(c.base);
  out.points.push_back(out.base);
  out.points.insert(out.points.end(), c.points.begin(), c.points.end());
  out.branches.push_back(branch_of(spec, c.base));
  out.branches.insert(out.branches.end(), c.branches.begin(), c.branches.end());
  return out;
}

// ---------------------------------------------------------------------------
// Line fields

namespace {

inline double k_atan2(double y, double x) { return std::atan2(y, x); }
inline quad k_atan2(quad y, quad x) { return atan2q(y, x); }

template <class T>
T top_eigen_angle(T p, T q, T r) {
  // Symmetric [[p, q], [q, r]]; angle of the eigenvector of the largest eigenvalue.
  return T(0.5) * k_atan2(T(2) * q, p - r);
}

template <class T>
void renormalise(M<T>& m) {
  T s = kernel::k_abs(m.a);
  s = std::max(s, kernel::k_abs(m.b));
  s = std::max(s, kernel::k_abs(m.c));
  s = std::max(s, kernel::k_abs(m.d));
  if (s > T(0)) m = {m.a / s, m.b / s, m.c / s, m.d / s};
}

// Stable angle from the product P = Df^n: normal of the top right singular vector.
template <class T>
T stable_angle_of(const M<T>& P) {
  T p = P.a * P.a + P.c * P.c, q = P.a * P.b + P.c * P.d, r = P.b * P.b + P.d * P.d;
  return top_eigen_angle(p, q, r) + T(0.5) * kernel::two_pi<T>() / T(2);
}

template <class T>
void forward_products(const MapSpec& spec, V<T> x, int d1, int d2, M<T>& P1, M<T>& P2) {
  M<T> P{T(1), T(0), T(0), T(1)};
  int n = std::max(d1, d2);
  for (int k = 0; k < n; ++k) {
    V<T> fx;
    M<T> df;
    kernel::lift_and_jacobian(spec, x, fx, df);
    P = df * P;
    renormalise(P);
    if (k + 1 == d1) P1 = P;
    if (k + 1 == d2) P2 = P;
    x = kernel::reduce(fx);
  }
}

}  // namespace

Vec2 stable_vector(const MapSpec& spec, const PlanePoint& x, int depth) {
  if (depth < 1) depth = 1;
  M<double> P, Q;
  forward_products<double>(spec, {x.x1, x.x2}, depth, depth, P, Q);
  double th = stable_angle_of(P);
  return {std::cos(th), std::sin(th)};
}

Direction stable_direction(const MapSpec& spec, const TorusPoint& x, int depth) {
  return Direction::from_vector(stable_vector(spec, x.lift(), depth));
}

double stable_direction_gap_extended(const MapSpec& spec, const TorusPoint& x, int d1, int d2) {
  M<quad> P1{1, 0, 0, 1}, P2{1, 0, 0, 1};
  forward_products<quad>(spec, {quad(x.x1), quad(x.x2)}, std::max(1, d1), std::max(1, d2), P1, P2);
  quad a = stable_angle_of(P1), b = stable_angle_of(P2);
  quad pi = kernel::two_pi<quad>() / 2;
  quad d = fmodq(fabsq(a - b), pi);
  if (pi - d < d) d = pi - d;
  return double(d);
}

Direction unstable_direction(const MapSpec& spec, const PastChain& chain) {
  return unstable_direction(spec, chain, int(chain.length()));
}

Direction unstable_direction(const MapSpec& spec, const PastChain& chain, int depth) {
  int n = std::min<int>(depth, int(chain.length()));
  if (n < 1) return Direction::from_vector(spec.linear.e_u);
  M<double> P{1, 0, 0, 1};
  for (int i = n; i >= 1; --i) {
    Mat2 df = spec.jacobian(chain.points[i].lift());
    P = M<double>{df.a, df.b, df.c, df.d} * P;
    renormalise(P);
  }
  // Top left singular vector: eigenvector of P P^T.
  double p = P.a * P.a + P.b * P.b, q = P.a * P.c + P.b * P.d, r = P.c * P.c + P.d * P.d;
  double th = top_eigen_angle(p, q, r);
  return Direction::from_vector({std::cos(th), std::sin(th)});
}

double direction_tail_bound(const AnosovCertificate& cert, int depth) {
  double ratio = cert.contraction_ub / cert.expansion_lb;
  // Two cone boundaries at the certified aperture, contracted N times.
  return 2.0 * (cert.cone_slope_u + cert.cone_slope_s) * std::pow(ratio, depth);
}

double stable_norm(const MapSpec& spec, const PlanePoint& x, int depth) {
  Vec2 e = stable_vector(spec, x, depth);
  return norm(spec.jacobian(x) * e);
}

double unstable_norm(const MapSpec& spec, const PastChain& chain, int depth) {
  Vec2 e = unstable_direction(spec, chain, depth).unit();
  return norm(spec.jacobian(chain.base.lift()) * e);
}

// ---------------------------------------------------------------------------
// Leaves

std::size_t LeafSegment::base_index() const {
  for (std::size_t i = 0; i < t.size(); ++i)
    if (t[i] == 0.0) return i;
  return 0;
}

namespace {

Vec2 oriented(Vec2 v, const Vec2& ref) { return dot(v, ref) < 0 ? -v : v; }

}  // namespace

PlanePoint stable_flow_step(const MapSpec& spec, const PlanePoint& z, double h, Vec2& orient, int depth) {
  Vec2 k1 = oriented(stable_vector(spec, z, depth), orient);
  Vec2 k2 = oriented(stable_vector(spec, z + k1 * (0.5 * h), depth), k1);
  Vec2 k3 = oriented(stable_vector(spec, z + k2 * (0.5 * h), depth), k2);
  Vec2 k4 = oriented(stable_vector(spec, z + k3 * h, depth), k3);
  PlanePoint out = z + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
  orient = oriented(stable_vector(spec, out, depth), k4);
  return out;
}

LeafSegment stable_leaf_segment(const MapSpec& spec, const TorusPoint& x, double halflength,
                                double step, int depth) {
  if (depth <= 0) depth = default_depth(spec);
  int n = std::max(1, int(std::ceil(halflength / step - 1e-12)));
  double h = halflength / n;
  Vec2 e0 = stable_vector(spec, x.lift(), depth);
  std::vector<PlanePoint> fwd, bwd;
  for (int side = 0; side < 2; ++side) {
    Vec2 orient = side == 0 ? e0 : -e0;
    PlanePoint z = x.lift();
    auto& out = side == 0 ? fwd : bwd;
    for (int i = 0; i < n; ++i) {
      z = stable_flow_step(spec, z, h, orient, depth);
      out.push_back(z);
    }
  }
  LeafSegment seg;
  seg.kind = LeafKind::Stable;
  seg.step = h;
  for (int i = n - 1; i >= 0; --i) {
    seg.points.push_back(bwd[i]);
    seg.t.push_back(-(i + 1) * h);
  }
  seg.points.push_back(x.lift());
  seg.t.push_back(0.0);
  for (int i = 0; i < n; ++i) {
    seg.points.push_back(fwd[i]);
    seg.t.push_back((i + 1) * h);
  }
  return seg;
}

UnstableLeaf::UnstableLeaf(const MapSpec& spec, const PastChain& chain, int steps, double seed_halflength)
    : spec_(spec), chain_(chain), steps_(steps), seed_len_(seed_halflength) {
  if (steps < 0 || std::size_t(steps) > chain.length())
    throw ChainTooShort("unstable leaf needs " + std::to_string(steps) + " past steps, chain has " +
                        std::to_string(chain.length()));
  // Seed direction at x_-N from the part of the chain deeper than N.
  if (chain.length() > std::size_t(steps)) {
    PastChain deep;
    deep.base = chain.points[steps];
    deep.points.assign(chain.points.begin() + steps, chain.points.end());
    deep.branches.assign(chain.branches.begin() + steps, chain.branches.end());
    seed_dir_ = unstable_direction(spec, deep).unit();
  } else {
    seed_dir_ = spec.linear.e_u;
  }
  lifts_.resize(steps + 1);
  for (int k = 0; k <= steps; ++k) lifts_[k] = chain.points[steps - k].lift();
  base_ = chain.points[0].lift();
}

PlanePoint UnstableLeaf::eval(double s, Vec2* ds) const {
  const Mat2 A = spec_.linear.real();
  Vec2 d = seed_dir_ * s;
  Vec2 v = seed_dir_;
  for (int k = 0; k < steps_; ++k) {
    const PlanePoint& b = lifts_[k];
    Vec2 pb, pz;
    Mat2 dpz;
    spec_.perturbation(b, &pb, nullptr);
    spec_.perturbation(b + d, &pz, ds ? &dpz : nullptr);
    if (ds) v = (A + dpz) * v;
    // F(b + d) - F(b), formed without the large common part.
    d = A * d + (pz - pb);
  }
  if (ds) *ds = v;
  return base_ + d;
}

int unstable_steps_for(const AnosovCertificate& cert, double radius, double seed_halflength) {
  return std::max(1, int(std::ceil(std::log(2.0 * radius / seed_halflength) / std::log(cert.expansion_lb))));
}

UnstableSegment unstable_segment(const MapSpec& spec, const PastChain& chain, double radius, double step) {
  const AnosovCertificate& cert = cached_certificate(spec);
  const double seed = 1e-7;
  int N = unstable_steps_for(cert, radius, seed);
  if (chain.length() < std::size_t(N))
    throw ChainTooShort("radius " + std::to_string(radius) + " needs a past of length " +
                        std::to_string(N) + ", got " + std::to_string(chain.length()));
  auto leaf = std::make_shared<UnstableLeaf>(spec, chain, N, seed);

  // March outward in the seed parameter with image spacing about `step`.
  std::vector<double> ss[2];
  std::vector<PlanePoint> pts[2];
  std::vector<double> arc[2];
  for (int side = 0; side < 2; ++side) {
    double sign = side == 0 ? 1.0 : -1.0;
    double s = 0.0, len = 0.0;
    PlanePoint prev = leaf->base();
    Vec2 dv;
    leaf->eval(0.0, &dv);
    int guard = 0;
    while (len < radius) {
      if (++guard > 1000000) throw ChainTooShort("unstable segment did not reach the radius");
      double ds = step / std::max(norm(dv), 1e-300);
      double sn = s + sign * ds;
      if (std::abs(sn) > 8 * seed) throw ChainTooShort("seed too short for the requested radius");
      PlanePoint z = leaf->eval(sn, &dv);
      double seglen = norm(z - prev);
      if (len + seglen >= radius) {
        // Trim: bisect in s for arclength exactly radius on the polyline.
        double lo = s, hi = sn;
        for (int it = 0; it < 60; ++it) {
          double mid = 0.5 * (lo + hi);
          if (len + norm(leaf->eval(mid) - prev) < radius) lo = mid; else hi = mid;
        }
        sn = 0.5 * (lo + hi);
        z = leaf->eval(sn);
        seglen = radius - len;
      }
      len += seglen;
      s = sn;
      prev = z;
      ss[side].push_back(s);
      pts[side].push_back(z);
      arc[side].push_back(sign * len);
    }
  }
  UnstableSegment out;
  out.param = leaf;
  out.leaf.kind = LeafKind::Unstable;
  out.leaf.step = step;
  out.leaf.past = chain;
  for (int i = int(pts[1].size()) - 1; i >= 0; --i) {
    out.leaf.points.push_back(pts[1][i]);
    out.leaf.t.push_back(arc[1][i]);
    out.seed_s.push_back(ss[1][i]);
  }
  out.leaf.points.push_back(leaf->base());
  out.leaf.t.push_back(0.0);
  out.seed_s.push_back(0.0);
  for (std::size_t i = 0; i < pts[0].size(); ++i) {
    out.leaf.points.push_back(pts[0][i]);
    out.leaf.t.push_back(arc[0][i]);
    out.seed_s.push_back(ss[0][i]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exponents

Exponents periodic_exponents(const MapSpec& spec, const PeriodicOrbit& orbit) {
  std::vector<TorusPoint> pts = orbit.points;
  if (pts.empty()) {
    TorusPoint x = orbit.point;
    for (int i = 0; i < orbit.period; ++i) {
      pts.push_back(x);
      x = spec.map(x);
    }
  }
  const int n = int(pts.size());
  Mat2 P = Mat2::identity();
  double log_scale = 0.0;
  for (const auto& x : pts) {
    P = spec.jacobian(x.lift()) * P;
    double s = P.max_abs();
    P = P * (1.0 / s);
    log_scale += std::log(s);
  }
  double t = P.trace(), d = P.det();
  double disc = t * t - 4 * d;
  if (disc < 0) throw DegenerateSpectrum("complex eigenvalues of the period derivative");
  double big = 0.5 * (t + (t >= 0 ? 1 : -1) * std::sqrt(disc));
  if (big == 0.0) throw DegenerateSpectrum("zero spectral radius");
  double small = d / big;
  double lb = std::log(std::abs(big)) + log_scale;
  double ls = std::log(std::abs(small)) + log_scale;
  if (!(ls < 0) || !(lb > 0))
    throw DegenerateSpectrum("period derivative has an eigenvalue of modulus >= 1 on the stable side");
  return {ls / n, lb / n};
}

std::string leaf_to_csv(const LeafSegment& seg) {
  std::ostringstream os;
  os << "t,x1,x2\n";
  char buf[128];
  for (std::size_t i = 0; i < seg.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", seg.t[i], seg.points[i].x1, seg.points[i].x2);
    os << buf;
  }
  return os.str();
}

}  // namespace anosov
