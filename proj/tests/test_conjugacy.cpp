#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "anosov/conjugacy.hpp"
#include "anosov/errors.hpp"
#include "anosov/periodic.hpp"

using namespace anosov;

namespace {

const double kTwoPi = 6.283185307179586;

MapSpec spec(const std::string& name) { return load_map_spec(std::string(ANOSOV_SPEC_DIR) + "/" + name + ".json"); }

// Phi = Id + (0.1 / 2 pi) sin(2 pi x2) e1
PlanePoint phi(const PlanePoint& x) { return {x.x1 + 0.1 / kTwoPi * std::sin(kTwoPi * x.x2), x.x2}; }

}  // namespace

TEST_CASE("displacement") {
  MapSpec L = spec("linear_a3");
  CHECK(displacement_grid_max(L, 32) == 0.0);
  MapSpec s = spec("single_a3");
  Vec2 p = displacement(s, {0.25, 0.9});
  CHECK(std::abs(p.x1 - 0.05) < 1e-15);
  CHECK(std::abs(p.x2) < 1e-15);
  CHECK(std::abs(displacement_grid_max(s, 64) - 0.05) < 1e-15);
}

TEST_CASE("linear field vanishes") {
  ConjugacyField f = conjugacy_to_linear(spec("linear_a3"), 40, 64);
  double m = 0;
  for (double v : f.hu_grid()) m = std::max(m, std::abs(v));
  CHECK(m < 1e-12);
  CHECK(f.residual() < 1e-12);
  CHECK(norm(f.h({0.3, 0.8})) < 1e-12);
}

TEST_CASE("conjugacy equation on perturbed maps") {
  for (const char* name : {"single_a3", "generic_1", "generic_3"}) {
    CAPTURE(name);
    MapSpec s = spec(name);
    ConjugacyField f = conjugacy_to_linear(s, 40, 64);
    const double lu = s.linear.lam_u, ls = s.linear.lam_s;
    double tail = f.p_grid_max() * (std::pow(lu, -40) / (lu - 1) + std::pow(ls, 40) / (1 - ls));
    CHECK(std::abs(f.tail_bound() - tail) < 1e-15 + 1e-12 * tail);
    CHECK(f.residual() < 1e-10);
    // |h| <= |P| / (1 - lam_s) + |P| / (lam_u - 1) up to the tail
    double bound = f.p_grid_max() * (1 / (1 - ls) + 1 / (lu - 1));
    Rng rng = make_rng(21);
    for (int i = 0; i < 200; ++i) {
      PlanePoint x{3 * uniform01(rng) - 1, 3 * uniform01(rng) - 1};
      CHECK(norm(f.h(x)) <= f.bound());
      CHECK(f.residual_at(x) < 1e-10);
      CHECK(std::abs(f.hu(x) - f.hu(x + Vec2{1, 0})) < 1e-12);
    }
    CHECK(f.bound() >= bound * 0.5);
    // interpolation of the table is close on the table nodes
    CHECK(std::abs(f.hu_interp({0, 0}) - f.hu_grid_at(0, 0)) < 1e-14);
  }
}

TEST_CASE("specialness") {
  Rng rng = make_rng(22);
  SpecialnessReport lin = specialness_defect(conjugacy_to_linear(spec("linear_a3"), 40, 64), 32, rng);
  CHECK(lin.verdict == Specialness::Special);
  CHECK(lin.defect < 1e-12);
  SpecialnessReport conj = specialness_defect(conjugacy_to_linear(spec("conjugated_a3"), 40, 64), 32, rng);
  CHECK(conj.verdict == Specialness::Special);
  SpecialnessReport gen = specialness_defect(conjugacy_to_linear(spec("generic_1"), 40, 64), 32, rng);
  CHECK(gen.verdict == Specialness::NonSpecial);
  CHECK(gen.defect > 1e-3);
  CHECK(gen.defect > 100 * gen.noise_floor);
  CHECK(to_string(Specialness::Special) == "Special");
}

TEST_CASE("asymptotic commutation grows only boundedly") {
  ConjugacyField f = conjugacy_to_linear(spec("generic_1"), 40, 64);
  auto c = asymptotic_commutation(f, {0.2, 0.3}, {1, 0}, 6);
  REQUIRE(c.size() == 6);
  for (double v : c) CHECK(v <= 2 * f.bound() + 1e-12);
  auto z = asymptotic_commutation(conjugacy_to_linear(spec("linear_a3"), 40, 64), {0.2, 0.3}, {0, 1}, 4);
  for (double v : z) CHECK(v < 1e-12);
}

TEST_CASE("field export") {
  ConjugacyField f = conjugacy_to_linear(spec("single_a3"), 20, 8);
  std::string csv = field_to_csv(f);
  CHECK(csv.rfind("depth,bound,residual\n20,", 0) == 0);
  int lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == 2 + 8);
}

TEST_CASE("shadowing reproduces the itinerary") {
  MapSpec f = spec("linear_a3"), g = spec("generic_1");
  ShadowWindow w = forward_window(f, {0.31, 0.77}, 40);
  CHECK(w.size() == 40);
  auto z = shadow(g, w);
  REQUIRE(z.size() == w.t.size());
  for (int j = 0; j + 1 < w.size(); ++j) {
    Vec2 r = g.lift(z[j]) - z[j + 1] - w.n[j].as_vec();
    CHECK(norm(r) < 1e-10);
    CHECK(norm(z[j] - w.t[j]) < 1.0);
  }
  // f = g: the shadow is the window itself
  auto same = shadow(f, w);
  for (int j = 0; j < w.size(); ++j) CHECK(norm(same[j] - w.t[j]) < 1e-10);
  CHECK_THROWS_AS(ConjugacyMap(f, MapSpec::linear_model({4, 1, 1, 1})), HomotopyMismatch);
}

TEST_CASE("constructed conjugacy is recovered pointwise") {
  ConjugacyMap H = conjugacy_between(spec("linear_a3"), spec("conjugated_a3"));
  double worst = 0;
  for (int i = 0; i < 16; ++i)
    for (int j = 0; j < 16; ++j) {
      PlanePoint x{(i + 0.5) / 16, (j + 0.5) / 16};
      worst = std::max(worst, norm(H(x) - phi(x)));
    }
  CHECK(worst < 1e-8);
  // conjugacy equation G o H = H o F on the cover
  const MapSpec& f = H.f();
  const MapSpec& g = H.g();
  Rng rng = make_rng(23);
  for (int i = 0; i < 20; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    CHECK(norm(g.lift(H(x)) - H(f.lift(x))) < 1e-8);
  }
  ConjugacyMap I = conjugacy_between(f, f);
  CHECK(I.identity());
  CHECK(norm(I({0.4, 0.2}) - PlanePoint{0.4, 0.2}) == 0.0);
}

TEST_CASE("conjugacy to the linear model agrees with the series") {
  MapSpec s = spec("generic_1");
  ConjugacyField field = conjugacy_to_linear(s, 40, 64);
  ConjugacyMap H(s, spec("linear_a3"));
  Rng rng = make_rng(24);
  for (int i = 0; i < 20; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    CHECK(norm(H(x) - field.H(x)) < 1e-8);
  }
}

TEST_CASE("periodic matching") {
  MapSpec f = spec("linear_a3"), g = spec("conjugated_a3");
  ConjugacyMap H = conjugacy_between(f, g);
  std::vector<PeriodicOrbit> fo, go;
  for (int n = 1; n <= 3; ++n) {
    for (auto& o : enumerate_periodic(f, n).orbits)
      if (o.period == n) fo.push_back(o);
    for (auto& o : enumerate_periodic(g, n).orbits)
      if (o.period == n) go.push_back(o);
  }
  auto m = match_all(H, fo, go);
  REQUIRE(m.size() == fo.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m[i].q.period == fo[i].period);
    CHECK(m[i].gap < 1e-8);
    CHECK(torus_distance(m[i].image.lift(), phi(fo[i].point.lift())) < 1e-8);
    CHECK(std::abs(m[i].q.lambda_s - fo[i].lambda_s) < 1e-8);
  }
  // a missing g-orbit cannot be matched
  std::vector<PeriodicOrbit> fewer(go.begin(), go.end() - 1);
  CHECK_THROWS(match_all(H, fo, fewer));
}

TEST_CASE("matching across non-conjugate maps is still a bijection") {
  MapSpec f = spec("single_a3"), g = spec("detuned_a3");
  ConjugacyMap H = conjugacy_between(f, g);
  std::vector<PeriodicOrbit> fo, go;
  for (int n = 1; n <= 3; ++n) {
    for (auto& o : enumerate_periodic(f, n).orbits)
      if (o.period == n) fo.push_back(o);
    for (auto& o : enumerate_periodic(g, n).orbits)
      if (o.period == n) go.push_back(o);
  }
  auto m = match_all(H, fo, go);
  CHECK(m.size() == fo.size());
  // fixed point 0 of both maps
  CHECK(torus_distance(m[0].image.lift(), {0, 0}) < 1e-10);
}
