#pragma once

#include <memory>
#include <string>
#include <vector>

#include "anosov/map_model.hpp"
#include "anosov/orbit.hpp"
#include "anosov/random.hpp"
#include "anosov/shadowing.hpp"

namespace anosov {

// P(x) = F(x) - A x. Periodic.
Vec2 displacement(const MapSpec& spec, const PlanePoint& x);
// max |P| over an n x n grid (a sampled lower estimate of sup |P|).
double displacement_grid_max(const MapSpec& spec, int n = 256);

// h = H - Id for the conjugacy A o H = H o F, split along the eigenbasis of A:
//   h^u(x) = sum_{k=0..K} lam_u^-(k+1) P^u(F^k x)        (periodic)
//   h^s(x) = -sum_{k=1..K} lam_s^(k-1) P^s(F^-k x)        (cover past, not periodic)
class ConjugacyField {
 public:
  ConjugacyField(MapSpec spec, int depth, int grid = 256);

  const MapSpec& spec() const { return spec_; }
  int depth() const { return depth_; }
  int grid_size() const { return grid_; }
  const std::vector<double>& hu_grid() const { return hu_grid_; }
  double hu_grid_at(int i, int j) const { return hu_grid_[std::size_t(i) * grid_ + j]; }

  // Series values; hu depends only on x mod 1.
  double hu(const PlanePoint& x) const;
  double hs(const PlanePoint& xhat) const;
  // Bilinear interpolation of the table (export and quick looks only).
  double hu_interp(const PlanePoint& x) const;
  Vec2 h(const PlanePoint& xhat) const;
  PlanePoint H(const PlanePoint& xhat) const { return xhat + h(xhat); }

  // |A h(x) - h(F x) - P(x)| at one point.
  double residual_at(const PlanePoint& xhat) const;
  // Max residual over the validation grid used at construction.
  double residual() const { return residual_; }
  int validation_grid() const { return 64; }
  // Truncation bound p (lam_u^-K / (lam_u - 1) + lam_s^K / (1 - lam_s)), p the grid max of |P|.
  double tail_bound() const { return tail_; }
  // Rigorous C with |h| <= C.
  double bound() const { return bound_; }
  double p_grid_max() const { return p_max_; }

 private:
  MapSpec spec_;
  int depth_, grid_;
  std::vector<double> hu_grid_;
  double residual_ = 0, tail_ = 0, bound_ = 0, p_max_ = 0;
};

ConjugacyField conjugacy_to_linear(const MapSpec& spec, int depth = 40, int grid = 256);

enum class Specialness { Special, NonSpecial, Inconclusive };
std::string to_string(Specialness s);

struct SpecialnessReport {
  double defect = 0;
  double noise_floor = 0;
  Specialness verdict = Specialness::Inconclusive;
  int samples = 0;
  // Largest component of h(x+n) - h(x) along e_u, should vanish.
  double unstable_jump = 0;
};

// max over n in {(1,0),(0,1)} and sampled x of |h(x+n) - h(x)|.
SpecialnessReport specialness_defect(const ConjugacyField& field, int samples, Rng& rng);

// |H(x + 2^m n) - H(x) - 2^m n| for m = 1..m_max.
std::vector<double> asymptotic_commutation(const ConjugacyField& field, const PlanePoint& x,
                                           const LatticeVector& n, int m_max = 6);

// CSV: "depth,bound,residual" header, one value line, then grid rows of h^u.
std::string field_to_csv(const ConjugacyField& field);

// H_fg with G o H_fg = H_fg o F. Evaluated by orbit shadowing (see ConjugacyMap).
ConjugacyMap conjugacy_between(const MapSpec& f, const MapSpec& g);

struct PeriodicMatch {
  PeriodicOrbit q;      // the matched g-orbit as stored in the database
  TorusPoint image;     // the g-periodic point matched to p.point
  int index = 0;        // position of `image` in q.points
  double gap = 0;       // distance between the shadow and `image`
};

// Matches p to the g-periodic point on the g-stable leaf through pi(H_fg(p^)).
// g_orbits must contain every g-orbit whose period divides p.period.
PeriodicMatch match_periodic(const ConjugacyMap& H, const PeriodicOrbit& p,
                             const std::vector<PeriodicOrbit>& g_orbits);
// Matches every orbit in f_orbits and checks the result is a bijection per
// period onto g_orbits' points; throws PeriodMismatch otherwise.
std::vector<PeriodicMatch> match_all(const ConjugacyMap& H, const std::vector<PeriodicOrbit>& f_orbits,
                                     const std::vector<PeriodicOrbit>& g_orbits);

}  // namespace anosov
