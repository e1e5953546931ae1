#pragma once

#include <string>
#include <vector>

#include "anosov/torus.hpp"

namespace anosov {

// amp * sin(2 pi k.x + phase)
struct PerturbationTerm {
  LatticeVector k;
  Vec2 amp;
  double phase = 0.0;
};

// A torus endomorphism with lift F(x) = A x + P(x), P periodic.
//
// Without a conjugator P is the trigonometric sum of `terms`. With a
// conjugator c (a trigonometric sum, Phi = Id + c a near-identity lift of a
// torus diffeomorphism) the map is G = Phi o F0 o Phi^-1, where F0 = A + terms.
// G is not a finite trigonometric sum, which is why it is carried as data.
struct MapSpec {
  std::string name;
  LinearModel linear;
  std::vector<PerturbationTerm> terms;
  std::vector<PerturbationTerm> conjugator;

  static MapSpec linear_model(const IntMat2& a, std::string name = "linear");

  bool is_linear() const { return terms.empty() && conjugator.empty(); }
  bool has_conjugator() const { return !conjugator.empty(); }
  // Same map with every amplitude multiplied by t (t = 0 is the linear model).
  MapSpec scaled(double t) const;

  // P(x) and DP(x); both periodic, evaluated at x mod 1.
  void perturbation(const PlanePoint& x, Vec2* p, Mat2* dp) const;
  PlanePoint lift(const PlanePoint& x) const;
  Mat2 jacobian(const PlanePoint& x) const;
  void lift_and_jacobian(const PlanePoint& x, PlanePoint& fx, Mat2& df) const;
  TorusPoint map(const TorusPoint& x) const { return project(lift(x.lift())); }

  // Phi and its inverse, identity when there is no conjugator.
  PlanePoint conj_apply(const PlanePoint& x) const;
  PlanePoint conj_inverse(const PlanePoint& y) const;
  Mat2 conj_jacobian(const PlanePoint& x) const;

  // sup |P| (rigorous upper bound) and a Lipschitz constant of DP.
  double perturbation_sup_bound() const;
  double derivative_lipschitz_bound() const;
};

// Same linear part and identical term lists (names ignored).
bool same_map(const MapSpec& a, const MapSpec& b);

PlanePoint eval_lift(const MapSpec& spec, const PlanePoint& x);
Mat2 eval_derivative(const MapSpec& spec, const PlanePoint& x);
// Solves F(x) = y on the cover. The effective tolerance is widened to the
// roundoff level of |y| when y is far from the fundamental domain.
PlanePoint invert_lift(const MapSpec& spec, const PlanePoint& y, double tol = 1e-13);
std::vector<TorusPoint> preimages(const MapSpec& spec, const TorusPoint& y);

struct AnosovCertificate {
  double cone_aperture_s = 0, cone_aperture_u = 0;  // radians, in eigen-coordinates
  double cone_slope_s = 0, cone_slope_u = 0;        // tan of the apertures
  double expansion_lb = 0;
  double contraction_ub = 0;
  double grid_step = 0;
  double lipschitz_slack = 0;
  // Empirical local product structure: points closer than delta have
  // stable/unstable leaves of half-length epsilon that intersect.
  double product_delta = 0, product_epsilon = 0;

  int default_depth() const;
};

AnosovCertificate verify_anosov(const MapSpec& spec, double grid_step = 1.0 / 512);
// verify_anosov at the default grid, memoised per map (keyed by its JSON form).
const AnosovCertificate& cached_certificate(const MapSpec& spec);
// Direction-field depth from the cached certificate.
int default_depth(const MapSpec& spec);

// Map-spec files (UTF-8 JSON):
//   {"name": str, "linear": [[int,int],[int,int]],
//    "perturbation": [{"k": [int,int], "amp": [num,num], "phase": num}, ...],
//    "conjugator": [ same term layout ]}            (conjugator optional)
// Unknown fields raise SchemaError naming the offending key.
MapSpec parse_map_spec(const std::string& text, const std::string& origin = "<input>");
MapSpec load_map_spec(const std::string& path);
std::string map_spec_to_json(const MapSpec& spec);
// FNV-1a 64-bit digest, hex encoded.
std::string content_hash(const std::string& bytes);
std::string read_text_file(const std::string& path);

}  // namespace anosov
