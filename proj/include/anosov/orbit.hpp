#pragma once

#include <vector>

#include "anosov/torus.hpp"

namespace anosov {

// A periodic orbit. `point` is the lexicographically least orbit point and
// `points` lists the orbit starting there. On the cover, F^period(p^) =
// p^ + lattice_class for the lift p^ of `point` in [0,1)^2.
struct PeriodicOrbit {
  TorusPoint point;
  int period = 1;
  LatticeVector lattice_class;
  double lambda_s = 0.0, lambda_u = 0.0;
  double log_jac = 0.0;
  std::vector<TorusPoint> points;
};

}  // namespace anosov
