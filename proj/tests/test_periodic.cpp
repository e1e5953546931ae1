#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>

#include "anosov/errors.hpp"
#include "anosov/periodic.hpp"

using namespace anosov;
namespace fs = std::filesystem;

namespace {

MapSpec linear() { return MapSpec::linear_model({3, 1, 1, 1}, "linear"); }

MapSpec single() {
  MapSpec s = MapSpec::linear_model({3, 1, 1, 1}, "single");
  s.terms = {{{1, 0}, {0.05, 0}, 0.0}};
  return s;
}

// |det(A^n - I)| from integer matrix powers.
std::int64_t brute_count(IntMat2 a, int n) {
  std::int64_t p = 1, q = 0, r = 0, s = 1;
  for (int k = 0; k < n; ++k) {
    std::int64_t np = p * a.a + q * a.c, nq = p * a.b + q * a.d;
    std::int64_t nr = r * a.a + s * a.c, ns = r * a.b + s * a.d;
    p = np, q = nq, r = nr, s = ns;
  }
  return std::llabs((p - 1) * (s - 1) - q * r);
}

}  // namespace

TEST_CASE("periodic counts") {
  IntMat2 A{3, 1, 1, 1};
  const std::int64_t expect[] = {1, 7, 31, 119, 431, 1519};
  for (int n = 1; n <= 6; ++n) {
    CHECK(periodic_count(A, n) == expect[n - 1]);
    CHECK(periodic_count(A, n) == brute_count(A, n));
  }
  const std::int64_t prim[] = {1, 3, 10, 28, 86, 247};
  for (int n = 1; n <= 6; ++n) CHECK(primitive_orbit_count(A, n) == prim[n - 1]);
  // sum over divisors d of n of d * orbits(d) = count(n)
  for (int n = 1; n <= 10; ++n) {
    std::int64_t sum = 0;
    for (int d = 1; d <= n; ++d)
      if (n % d == 0) sum += d * primitive_orbit_count(A, d);
    CHECK(sum == periodic_count(A, n));
  }
  for (int n = 1; n <= 6; ++n) CHECK(periodic_count({4, 1, 1, 1}, n) == brute_count({4, 1, 1, 1}, n));
}

TEST_CASE("linear periodic points are exact rationals") {
  MapSpec L = linear();
  auto e = enumerate_periodic(L, 2);
  REQUIRE(e.points.size() == 7);
  for (const auto& p : e.points) {
    // 7 p is integral: (A^2 - I) p = m
    CHECK(std::abs(7 * p.point.x1 - std::round(7 * p.point.x1)) < 1e-12);
    CHECK(std::abs(7 * p.point.x2 - std::round(7 * p.point.x2)) < 1e-12);
  }
  std::size_t n1 = 0;
  for (const auto& o : e.orbits) n1 += o.period == 1;
  CHECK(n1 == 1);
  CHECK(e.orbits.size() == 4);
}

TEST_CASE("enumeration counts and distinctness") {
  for (const MapSpec& s : {linear(), single()}) {
    for (int n = 1; n <= 5; ++n) {
      auto e = enumerate_periodic(s, n);
      CHECK(std::int64_t(e.points.size()) == periodic_count(s.linear.a, n));
      double min_sep = 1e300;
      for (std::size_t i = 0; i < e.points.size(); ++i) {
        const auto& p = e.points[i];
        // F^n(p) = p mod Z^2
        TorusPoint y = p.point;
        for (int k = 0; k < n; ++k) y = s.map(y);
        CHECK(torus_distance(y.lift(), p.point.lift()) < 1e-11);
        CHECK(n % p.min_period == 0);
        for (std::size_t j = i + 1; j < e.points.size(); ++j)
          min_sep = std::min(min_sep, torus_distance(p.point.lift(), e.points[j].point.lift()));
      }
      CHECK(min_sep > 1e-6);
      std::size_t total = 0;
      for (const auto& o : e.orbits) total += o.period;
      CHECK(total == e.points.size());
    }
  }
}

TEST_CASE("orbit records") {
  MapSpec s = single();
  auto e = enumerate_periodic(s, 4);
  for (const auto& o : e.orbits) {
    REQUIRE(int(o.points.size()) == o.period);
    CHECK(o.points[0] == o.point);
    for (std::size_t i = 1; i < o.points.size(); ++i) CHECK(std::pair(o.point.x1, o.point.x2) < std::pair(o.points[i].x1, o.points[i].x2));
    CHECK(std::abs(o.period * (o.lambda_s + o.lambda_u) - o.log_jac) < 1e-9);
    CHECK(std::abs(o.log_jac - orbit_jacobian(s, o)) < 1e-12);
    PeriodicOrbit r = make_orbit(s, o.points.back(), o.period);
    CHECK(torus_distance(r.point.lift(), o.point.lift()) < 1e-12);
    PeriodicOrbit back = orbit_from_json_line(orbit_to_json_line(o));
    CHECK(back.point == o.point);
    CHECK(back.period == o.period);
    CHECK(back.lambda_s == o.lambda_s);
    CHECK(back.log_jac == o.log_jac);
    CHECK(back.lattice_class == o.lattice_class);
    CHECK(back.points.empty());  // the record stores the least point only
  }
  CHECK_THROWS(orbit_from_json_line("{\"period\": 1}"));
}

TEST_CASE("shooting solver for one class") {
  MapSpec s = single();
  auto r = coset_reps(s.linear.a.pow(3) - IntMat2::identity());
  for (std::size_t i = 0; i < r.size(); i += 5) {
    PeriodicPoint p = solve_periodic_class(s, 3, r[i]);
    PlanePoint y = p.point.lift();
    for (int k = 0; k < 3; ++k) y = s.lift(y);
    Vec2 d = y - p.point.lift();
    LatticeVector m = round_lattice(d);
    CHECK(norm(d - m.as_vec()) < 1e-11);
  }
}

TEST_CASE("orbit database") {
  fs::path dir = fs::temp_directory_path() / "anosov_orbitdb_test";
  fs::remove_all(dir);
  MapSpec s = single();
  std::size_t n_first;
  std::string path;
  {
    OrbitDb db(dir.string(), s);
    path = db.path();
    auto o = db.orbits_up_to(3);
    n_first = o.size();
    CHECK(n_first == 1 + 3 + 10);
    for (const auto& x : o) CHECK(x.period <= 3);
    CHECK(db.orbits_of_period(2).size() == 3);
    for (const auto& x : o) CHECK(int(x.points.size()) == x.period);
  }
  CHECK(fs::exists(path));
  std::size_t lines = 0;
  {
    std::ifstream in(path);
    std::string l;
    while (std::getline(in, l)) lines += !l.empty();
  }
  CHECK(lines == n_first);
  {
    // reopening reads the stored periods without recomputing them, then completes period 4
    OrbitDb db(dir.string(), s);
    CHECK(db.orbits_up_to(3).size() == n_first);
    CHECK(db.orbits_up_to(4).size() == n_first + 28);
  }
  {
    std::ifstream in(path);
    std::string l;
    lines = 0;
    while (std::getline(in, l)) lines += !l.empty();
  }
  CHECK(lines == n_first + 28);
  // a different map gets a different file
  OrbitDb other(dir.string(), linear());
  CHECK(other.path() != path);
  fs::remove_all(dir);
}
