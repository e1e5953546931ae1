#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "anosov/map_model.hpp"
#include "anosov/orbit.hpp"
#include "anosov/random.hpp"

namespace anosov {

// A line through the origin, theta in [0, pi).
struct Direction {
  double theta = 0.0;

  static Direction from_vector(const Vec2& v);
  Vec2 unit() const { return {std::cos(theta), std::sin(theta)}; }
};

// Angle between two lines, in [0, pi/2].
double angular_distance(const Direction& a, const Direction& b);
double line_angle(const Vec2& a, const Vec2& b);

// A finite past x_0, x_-1, ..., x_-N. points[i] = x_-i and
// f(points[i+1]) = points[i]. Branch b at step i means
// x_-(i+1) = pi F^-1(x^_-i + reps[b]), with x^ the lift in [0,1)^2 and reps
// the coset representatives of Z^2 / A Z^2; branch 0 is the lift-induced
// past used as the canonical one.
struct PastChain {
  TorusPoint base;
  std::vector<int> branches;
  std::vector<TorusPoint> points;

  std::size_t length() const { return branches.size(); }
};

PastChain make_chain(const MapSpec& spec, const TorusPoint& base, const std::vector<int>& branches);
PastChain canonical_chain(const MapSpec& spec, const TorusPoint& base, int length);
PastChain random_chain(const MapSpec& spec, const TorusPoint& base, int length, Rng& rng);
// Append branches to the deep end.
PastChain extend_chain(const MapSpec& spec, const PastChain& c, const std::vector<int>& more);
// The shift: a past of f(base) whose first step is base itself.
PastChain shift_chain(const MapSpec& spec, const PastChain& c);
// Branch label of x as a preimage of f(x).
int branch_of(const MapSpec& spec, const TorusPoint& x);

// Stable line field. Most contracted right singular direction of
// Df^depth(x), computed with renormalised products.
Direction stable_direction(const MapSpec& spec, const TorusPoint& x, int depth);
Vec2 stable_vector(const MapSpec& spec, const PlanePoint& x, int depth);
// The same computation in 113-bit arithmetic, returning the angle between
// the fields of depths d1 and d2 at x. Needed once the gap drops below double
// roundoff.
double stable_direction_gap_extended(const MapSpec& spec, const TorusPoint& x, int d1, int d2);

// Dominant image direction of Df(x_-1) ... Df(x_-N) along the whole chain.
Direction unstable_direction(const MapSpec& spec, const PastChain& chain);
Direction unstable_direction(const MapSpec& spec, const PastChain& chain, int depth);
// Truncation bound C (cub/elb)^N used by spread and tail checks.
double direction_tail_bound(const AnosovCertificate& cert, int depth);

// ||Df(x)|E^s(x)|| for the unit stable vector at the given depth.
double stable_norm(const MapSpec& spec, const PlanePoint& x, int depth);
double unstable_norm(const MapSpec& spec, const PastChain& chain, int depth);

enum class LeafKind { Stable, Unstable };

// Polyline on the cover, arclength parametrised, t = 0 at the base point.
struct LeafSegment {
  LeafKind kind = LeafKind::Stable;
  std::vector<double> t;
  std::vector<PlanePoint> points;
  std::optional<PastChain> past;
  double step = 0.0;

  std::size_t size() const { return points.size(); }
  // Index of the vertex with t = 0.
  std::size_t base_index() const;
};

// Integrates the unit stable field from x in both directions with classic
// RK4, continuing the orientation along the curve.
LeafSegment stable_leaf_segment(const MapSpec& spec, const TorusPoint& x, double halflength,
                                double step, int depth = 0);

// One RK4 step along the stable line field; `orient` is the current
// orientation and is updated.
PlanePoint stable_flow_step(const MapSpec& spec, const PlanePoint& z, double h, Vec2& orient, int depth);

// Exact parametrisation of a local unstable leaf: a short straight seed at
// x_-N tangent to E^u (from deeper past when available), pushed forward N
// steps on the cover and translated so that s = 0 is the base point.
class UnstableLeaf {
 public:
  UnstableLeaf(const MapSpec& spec, const PastChain& chain, int steps, double seed_halflength);
  // Point at seed parameter s (|s| <= seed half-length) and its s-derivative.
  PlanePoint eval(double s, Vec2* ds = nullptr) const;
  const PlanePoint& base() const { return base_; }
  double seed_halflength() const { return seed_len_; }
  int steps() const { return steps_; }
  const PastChain& chain() const { return chain_; }

 private:
  MapSpec spec_;
  PastChain chain_;
  int steps_;
  double seed_len_;
  Vec2 seed_dir_;
  std::vector<PlanePoint> lifts_;  // lifts_[k] = lift of x_-(N-k) near the pushed seed
  PlanePoint base_;
};

// Unstable segment of radius `radius` (arclength each way) through the chain
// base. Its vertices carry the seed parameter in `seed_s`.
struct UnstableSegment {
  LeafSegment leaf;
  std::vector<double> seed_s;
  std::shared_ptr<UnstableLeaf> param;
};

UnstableSegment unstable_segment(const MapSpec& spec, const PastChain& chain, double radius,
                                 double step = 1e-3);

// Needed chain length for radius r: expansion_lb^N * seed >= 2 r.
int unstable_steps_for(const AnosovCertificate& cert, double radius, double seed_halflength);

struct Exponents {
  double lambda_s = 0.0, lambda_u = 0.0;
};

Exponents periodic_exponents(const MapSpec& spec, const PeriodicOrbit& orbit);

std::string leaf_to_csv(const LeafSegment& seg);

}  // namespace anosov
