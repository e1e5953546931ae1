#pragma once

#include <map>
#include <mutex>
#include <string>
#include <vector>

#include "anosov/hyperbolic.hpp"
#include "anosov/orbit.hpp"

namespace anosov {

// |det(A^n - I)|, the number of points of period dividing n.
std::int64_t periodic_count(const IntMat2& a, int n);
// Number of orbits of minimal period n (Moebius inversion of the counts).
std::int64_t primitive_orbit_count(const IntMat2& a, int n);

// One solution of F^n(x) = x + m per class m of Z^2 / (A^n - I) Z^2.
struct PeriodicPoint {
  TorusPoint point;
  LatticeVector lattice_class;  // canonical representative (mod A^n - I)
  int min_period = 1;
};

struct PeriodicEnumeration {
  int n = 1;
  std::vector<PeriodicPoint> points;  // |det(A^n - I)| entries
  std::vector<PeriodicOrbit> orbits;  // points grouped into orbits, sorted by (period, point)
};

PeriodicEnumeration enumerate_periodic(const MapSpec& spec, int n, std::int64_t budget = 200000);

// Solves F^n(x) = x + m for one class by multiple shooting.
PeriodicPoint solve_periodic_class(const MapSpec& spec, int n, const LatticeVector& m);

// log |det Df^n(p)| summed along the orbit.
double orbit_jacobian(const MapSpec& spec, const PeriodicOrbit& orbit);
// Orbit through x of the given period, rotated to its lexicographically
// least point, with class, exponents and log Jacobian filled in.
PeriodicOrbit make_orbit(const MapSpec& spec, const TorusPoint& x, int period);

// Append-only JSON-lines store of orbits, one file per map named by the
// content hash of the map's JSON form. Periods are completed on demand.
class OrbitDb {
 public:
  OrbitDb(std::string dir, const MapSpec& spec);
  const std::string& path() const { return path_; }
  // Orbits of minimal period p for every p <= max_period, computing and
  // appending missing periods.
  std::vector<PeriodicOrbit> orbits_up_to(int max_period);
  std::vector<PeriodicOrbit> orbits_of_period(int p);

 private:
  void load();
  void rebuild_points(PeriodicOrbit& o) const;
  void append(const std::vector<PeriodicOrbit>& orbits);

  std::string dir_, path_;
  MapSpec spec_;
  std::map<int, std::vector<PeriodicOrbit>> by_period_;
  std::mutex mu_;
};

std::string orbit_to_json_line(const PeriodicOrbit& o);
PeriodicOrbit orbit_from_json_line(const std::string& line);

}  // namespace anosov
