#pragma once

#include <string>
#include <vector>

#include "anosov/conjugacy.hpp"
#include "anosov/hyperbolic.hpp"
#include "anosov/random.hpp"

namespace anosov {

// Angular diameter (in [0, pi/2] for lines, taken around the circle of
// lines) of the unstable directions of `ensemble` random chains at x.
double u_direction_spread(const MapSpec& spec, const TorusPoint& x, int ensemble, int depth, Rng& rng);
// Truncation bound plus a roundoff floor; spreads below this are noise.
double spread_noise(const MapSpec& spec, int depth);

enum class Dichotomy { Special, UAccessible, Inconclusive };
std::string to_string(Dichotomy d);

struct DichotomyOptions {
  int scan = 8;          // scan x scan base points
  int ensemble = 12;
  int depth = 30;
  int defect_samples = 64;
};

struct DichotomyReport {
  SpecialnessReport specialness;
  double max_spread = 0, min_spread = 0;
  TorusPoint worst_point;
  double spread_noise = 0;
  Dichotomy verdict = Dichotomy::Inconclusive;
  std::string diagnostics;
};

// Special: defect Special and spread < 10 noise. UAccessible: defect
// NonSpecial and spread > 100 noise. Anything else is Inconclusive.
DichotomyReport dichotomy_verdict(const ConjugacyField& field, Rng& rng, const DichotomyOptions& opt = {});
DichotomyReport dichotomy_verdict(const MapSpec& spec, Rng& rng, const DichotomyOptions& opt = {});
std::string dichotomy_to_json(const DichotomyReport& rep);

// A base point with two pasts whose unstable directions are far apart.
struct FanPoint {
  TorusPoint x;
  PastChain alpha, beta;
  double angle = 0;  // between E^u(x, alpha) and E^u(x, beta)
};

FanPoint find_fan_point(const MapSpec& spec, Rng& rng, int ensemble = 24, int chain_length = 60);

struct UJunction {
  int seg_a = 0, seg_b = 0;
  double s_a = 0, s_b = 0;  // seed parameters on the two leaves
  PlanePoint point;         // on segment seg_a, cover coordinates
  double gap = 0;
};

struct UPath {
  std::vector<UnstableSegment> segments;
  std::vector<UJunction> junctions;  // junctions[i] joins segments i and i+1
  double source_gap = 0, target_gap = 0;
  double radius = 0;                 // half-length of every segment
  double junction_tol = 1e-6;
  int attempts = 0;

  bool empty() const { return segments.empty(); }
  double max_gap() const;
};

struct UPathOptions {
  double junction_tol = 1e-6;
  double max_radius = 16.0;  // the radius doubles up to this
  double step = 5e-3;        // polyline spacing
  int chain_length = 60;
};

// Reusable search state: the dichotomy check and the fan point are per
// map, queries are independent.
class UPathFinder {
 public:
  // Throws SpecialMap when the dichotomy verdict is Special.
  UPathFinder(const MapSpec& spec, Rng& rng, int ensemble = 8, const UPathOptions& opt = {});

  const MapSpec& spec() const { return spec_; }
  const FanPoint& fan() const { return fan_; }
  const DichotomyReport& dichotomy() const { return dich_; }
  const UPathOptions& options() const { return opt_; }

  // Throws SearchExhausted (with the best gap seen) when the budget runs out.
  UPath find(const TorusPoint& from, const TorusPoint& to, double radius, Rng& rng) const;

 private:
  MapSpec spec_;
  int ensemble_;
  UPathOptions opt_;
  DichotomyReport dich_;
  FanPoint fan_;
};

UPath find_u_path(const MapSpec& spec, const TorusPoint& from, const TorusPoint& to, double radius, int ensemble,
                  Rng& rng, const UPathOptions& opt = {});

// Largest eigen-coordinate slope |stable part / unstable part| of the
// polyline edges, for checks against the unstable cone.
double max_cone_slope(const MapSpec& spec, const LeafSegment& seg);

// CSV: segment,t,x1,x2 (polylines tagged by segment index).
std::string upath_to_csv(const UPath& path);
std::string upath_to_json(const UPath& path);

}  // namespace anosov
