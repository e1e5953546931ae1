#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/hyperbolic.hpp"

namespace anosov {

enum class CocycleKind { LogStableNorm, LogJacobian, Custom };

// A real function on the torus, or on the inverse limit when needs_past is
// set (then eval receives a past chain, and past_modulus/past_rate bound the
// dependence on it: chains agreeing to depth j differ by <= C rate^j).
struct Cocycle {
  CocycleKind kind = CocycleKind::Custom;
  std::string name;
  bool needs_past = false;
  std::function<double(const MapSpec&, const TorusPoint&, const PastChain*)> eval;
  double past_modulus = 0.0, past_rate = 0.0;

  double operator()(const MapSpec& s, const TorusPoint& x, const PastChain* c = nullptr) const {
    return eval(s, x, c);
  }
};

// log ||Df|E^s(x)||; depth 0 means the cocycle default (certificate depth + 8).
Cocycle log_stable_norm(int depth = 0);
Cocycle log_jacobian();
Cocycle custom_cocycle(std::string name, std::function<double(const MapSpec&, const TorusPoint&)> fn);
Cocycle custom_past_cocycle(std::string name,
                            std::function<double(const MapSpec&, const TorusPoint&, const PastChain&)> fn,
                            double modulus = 0.0, double rate = 0.0);

int cocycle_depth(const MapSpec& spec);

// ---------------------------------------------------------------------------
// Stable density and affine distance. With r = ||Df|E^s||,
//   rho(x, y) = prod_{i>=0} r(f^i x) / r(f^i y),
// so that rho(f x, f y) = r(y)/r(x) rho(x, y) and d^s(x, y) = int_x^y rho(z, x) dz.

struct DensityOptions {
  double step = 1e-3;       // max RK4 step along the leaf
  int max_levels = 200;
  double stop = 1e-14;      // stop once a level changes every log rho by less
  int depth = 0;            // stable direction depth, 0 = cocycle_depth
};

// Signed arclength of y along the stable leaf of x (positive along the
// stable vector at x). Throws NotOnLeaf when y is off the leaf by > 1e-8.
double leaf_coordinate(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y,
                       const DensityOptions& opt = {});
// Point at signed arclength s along the stable leaf of x.
PlanePoint leaf_point(const MapSpec& spec, const PlanePoint& x, double s, const DensityOptions& opt = {});

struct DensityProfile {
  std::vector<double> positions;        // signed arclength from the anchor
  std::vector<double> log_rho;          // log rho(z(s), anchor)
  std::vector<double> image_positions;  // position of f(z(s)) in the image chart
  int levels = 0;
  double last_increment = 0.0;
  double tail_bound = 0.0;              // last increment * theta / (1 - theta)
};

struct AffineDistance {
  double value = 0.0;
  double richardson = 0.0;  // |S_h - S_2h| / 15
  double arclength = 0.0;
};

// A stable leaf given by an anchor and an orientation; points on it are
// signed arclength positions. rho is only Hoelder across leaves (a shift of
// 1e-14 off the leaf moves log rho by ~1e-6 when |det A| > 1), so every
// quantity relating points of one leaf is computed along the anchor's leaf.
// The anchor orbit is carried in 113-bit arithmetic, stored here as hi + lo.
class StableLeafChart {
 public:
  StableLeafChart(const MapSpec& spec, const PlanePoint& anchor, const DensityOptions& opt = {});

  const MapSpec& spec() const { return spec_; }
  PlanePoint anchor() const { return hi_; }
  Vec2 orientation() const { return orient_; }
  const DensityOptions& options() const { return opt_; }

  PlanePoint point(double s) const;
  // Position of y (within 1e-8 of the leaf), else NotOnLeaf.
  double coordinate(const PlanePoint& y) const;
  // The chart at f(anchor), orientation carried by Df.
  StableLeafChart image() const;

  DensityProfile profile(const std::vector<double>& positions) const;
  // rho(z(s1), z(s2)).
  double rho(double s1, double s2) const;
  // d^s(z(s1), z(s2)) = int rho(z, z(s1)) dz over the arc between them.
  AffineDistance affine(double s1, double s2, double step = 1e-3) const;

 private:
  StableLeafChart(const MapSpec& spec, const PlanePoint& hi, const PlanePoint& lo, const Vec2& orient,
                  const DensityOptions& opt);
  DensityProfile one_sided(const std::vector<double>& positions, double sign) const;

  MapSpec spec_;
  PlanePoint hi_, lo_;
  Vec2 orient_;
  DensityOptions opt_;
  int depth_;
};

// log rho(z(s), x) along the leaf of x.
DensityProfile density_profile(const MapSpec& spec, const PlanePoint& x, const std::vector<double>& positions,
                               const DensityOptions& opt = {});

// rho(x, y) for y on the stable leaf of x.
double density_rho(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, const DensityOptions& opt = {});

// int_x^y rho(z, x) dz by composite Simpson at the given node spacing.
AffineDistance affine_distance_report(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y,
                                      double step = 1e-3, const DensityOptions& opt = {});
double affine_distance(const MapSpec& spec, const PlanePoint& x, const PlanePoint& y, double step = 1e-3,
                       const DensityOptions& opt = {});

// ---------------------------------------------------------------------------
// Livschitz data.

struct OrbitPair {
  PeriodicOrbit p, q;
};

struct ObstructionRow {
  int pair = 0;
  int period = 0;
  double obstruction = 0.0;  // sum_i phi_f(f^i p) - sum_i phi_g(g^i q)
};

struct ObstructionReport {
  std::vector<ObstructionRow> rows;
  double max_abs = 0.0;
};

// Backward chain along a periodic orbit: base points[index], length steps.
PastChain periodic_chain(const MapSpec& spec, const PeriodicOrbit& orbit, int index, int length);

double birkhoff_sum(const MapSpec& spec, const PeriodicOrbit& orbit, const Cocycle& phi);
ObstructionReport periodic_obstruction(const MapSpec& f, const MapSpec& g, const std::vector<OrbitPair>& pairs,
                                       const Cocycle& phi_f, const Cocycle& phi_g);
std::vector<OrbitPair> pairs_from_matches(const std::vector<PeriodicOrbit>& f_orbits,
                                          const std::vector<PeriodicMatch>& matches);
std::string obstruction_to_json(const ObstructionReport& rep);
std::string obstruction_to_csv(const ObstructionReport& rep);

// Samples of u along an orbit, evaluated elsewhere by a local cubic least
// squares fit on the nearest samples.
class TransferFunction {
 public:
  TransferFunction() = default;
  TransferFunction(std::vector<PlanePoint> points, std::vector<double> values);

  double operator()(const PlanePoint& x) const;
  double nearest(const PlanePoint& x, double* dist = nullptr) const;
  const std::vector<PlanePoint>& points() const { return pts_; }
  const std::vector<double>& values() const { return vals_; }
  std::size_t size() const { return pts_.size(); }
  // Largest distance from a probe grid point to its nearest sample.
  double fill_radius(int probe = 64) const;
  double max_abs() const;

  // Filled in by the solvers.
  double residual = 0.0;  // max over held-out points
  int held_out = 0;
  double tol = 0.0;

  std::string to_csv() const;

 private:
  void neighbours(const PlanePoint& x, std::size_t k, std::vector<std::pair<double, std::size_t>>& out) const;

  std::vector<PlanePoint> pts_;
  std::vector<double> vals_;
  int cells_ = 1;
  std::vector<std::vector<std::uint32_t>> grid_;
};

struct CoboundaryOptions {
  int held_out = 100;
  int fill_cells = 32;  // every cell of a fill_cells^2 grid must hold a sample
  std::uint64_t salt = 7;
};

// Solves psi = u o f - u along the forward orbit of seed (u(seed) = 0).
// When `orbits` is given, Birkhoff sums of psi over them must be below tol.
TransferFunction solve_coboundary(const MapSpec& spec, const Cocycle& psi, const TorusPoint& seed, int orbit_len,
                                  double tol, const std::vector<PeriodicOrbit>* orbits = nullptr,
                                  const CoboundaryOptions& opt = {});

// Reduction of a past-dependent cocycle to one on the torus:
//   u_hat(y) = sum_{j=0..J} [phi(sigma^j y) - phi(sigma^j r y)],   psi = phi + u_hat o sigma - u_hat,
// with r the canonical (branch-0) past.
struct ForwardReduction {
  Cocycle psi;
  std::function<double(const PastChain&)> u_hat;
  double tail_bound = 0.0;
  double modulus = 0.0, rate = 0.0;
  int J = 0;
  int chain_depth = 0;
};

// Sampled chain modulus of phi: max |phi(a) - phi(b)| over chains agreeing to depth j.
void estimate_past_modulus(const MapSpec& spec, const Cocycle& phi, int chain_depth, double* modulus, double* rate);

ForwardReduction reduce_to_forward(const MapSpec& spec, const Cocycle& phi, int J, int chain_depth = 48);

struct TransferReport {
  TransferFunction U;
  std::vector<double> P;    // e^U at the samples
  double ratio_error = 0;   // worst relative error of the ratio law
  int ratio_pairs = 0;
};

// U with log r_f = log r_g o H + U o f - U, P = e^U, plus a check of the leafwise
// derivative ratio law ||DH|E^s(y)|| / ||DH|E^s(x)|| = P(x)/P(y).
TransferReport transfer_P(const ConjugacyMap& H, int samples, double tol = 1e-4,
                          const std::vector<PeriodicOrbit>* orbits = nullptr, int ratio_pairs = 12);

}  // namespace anosov
