#pragma once

#include <vector>

#include "anosov/hyperbolic.hpp"
#include "anosov/orbit.hpp"

namespace anosov {

// A finite stretch of an f-orbit on the cover, stored as points t_j reduced
// to near [0,1)^2 and integer jumps with F(t_j) = t_{j+1} + n_j. Index
// `origin` is the point the window is built around.
struct ShadowWindow {
  std::vector<PlanePoint> t;
  std::vector<LatticeVector> n;
  int origin = 0;

  int size() const { return int(t.size()); }
};

// Reduced points of the cover past F^-1(x^), ..., F^-depth(x^).
std::vector<PlanePoint> cover_past(const MapSpec& f, const PlanePoint& xhat, int depth);

// Cover past F^-k(x^) for k <= back (unique, the lift is a diffeomorphism)
// followed by the forward orbit for fwd steps.
ShadowWindow cover_window(const MapSpec& f, const PlanePoint& xhat, int back, int fwd);
// The chain's past (deepest point first), extended with canonical branches by
// `extra_back`, then fwd forward steps from the base.
ShadowWindow chain_window(const MapSpec& f, const PastChain& chain, int extra_back, int fwd);
// Forward orbit x, f x, ..., f^(len-1) x.
ShadowWindow forward_window(const MapSpec& f, const TorusPoint& x, int len);
// Periodic itinerary of `orbit` repeated `reps` times (origin at 0).
ShadowWindow periodic_window(const MapSpec& f, const PeriodicOrbit& orbit, int reps);
// Concatenation a then b, with the jump between them recomputed from f.
ShadowWindow join_windows(const MapSpec& f, const ShadowWindow& a, const ShadowWindow& b);

// The g-orbit with the same integer itinerary: G(w_j) = w_{j+1} + n_j, with
// the stable coordinate pinned at the first point and the unstable one at
// the last. Boundary effects decay like lambda_s^j and lambda_u^-(L-j).
std::vector<PlanePoint> shadow(const MapSpec& g, const ShadowWindow& win,
                               const std::vector<PlanePoint>* guess = nullptr);

// H_fg: the bounded conjugacy of lifts G o H = H o F, evaluated by
// shadowing. back/fwd set the window around each evaluation point.
class ConjugacyMap {
 public:
  ConjugacyMap(MapSpec f, MapSpec g, int back = 80, int fwd = 30);
  PlanePoint operator()(const PlanePoint& xhat) const;
  // H along the forward f-orbit of x (reduced points, as in forward_window);
  // evaluated in overlapping chunks.
  std::vector<PlanePoint> along_orbit(const ShadowWindow& win) const;
  const MapSpec& f() const { return f_; }
  const MapSpec& g() const { return g_; }
  int back() const { return back_; }
  int fwd() const { return fwd_; }
  bool identity() const { return same_; }

 private:
  MapSpec f_, g_;
  int back_, fwd_;
  bool same_;
};

// The g-chain realised by pi(Orb_G(H(x^))) for the lift x^ realising the input
// chain: same branches, points from the shadowing window.
PastChain induced_orbit_conjugacy(const ConjugacyMap& H, const PastChain& chain);

}  // namespace anosov
