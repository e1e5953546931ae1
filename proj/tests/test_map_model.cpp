#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>

#include "anosov/errors.hpp"
#include "anosov/map_model.hpp"
#include "anosov/random.hpp"

using namespace anosov;

namespace {

const double kTwoPi = 6.283185307179586;

MapSpec single(double eps) {
  MapSpec s = MapSpec::linear_model({3, 1, 1, 1}, "single");
  s.terms = {{{1, 0}, {eps, 0}, 0.0}};
  return s;
}

MapSpec two_term() {
  MapSpec s = MapSpec::linear_model({3, 1, 1, 1}, "two");
  s.terms = {{{1, 0}, {0.05, 0}, 0.0}, {{0, 1}, {0, 0.05}, 0.5}};
  return s;
}

}  // namespace

TEST_CASE("lift evaluation") {
  MapSpec lin = MapSpec::linear_model({3, 1, 1, 1});
  PlanePoint y = eval_lift(lin, {0.5, 0.5});
  CHECK(y.x1 == 2.0);
  CHECK(y.x2 == 1.0);
  MapSpec s = single(0.05);
  CHECK(norm(eval_lift(s, {0, 0})) == 0.0);
  Vec2 d = eval_lift(s, {1.3, 0.7}) - eval_lift(s, {0.3, 0.7});
  CHECK(std::abs(d.x1 - 3) < 1e-14);
  CHECK(std::abs(d.x2 - 1) < 1e-14);
}

TEST_CASE("lift equivariance and derivative periodicity") {
  MapSpec s = two_term();
  Rng rng = make_rng(2);
  std::uniform_int_distribution<int> n(-9, 9);
  for (int i = 0; i < 500; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    LatticeVector m{n(rng), n(rng)};
    Vec2 d = eval_lift(s, x + m.as_vec()) - eval_lift(s, x);
    Vec2 am = s.linear.real() * m.as_vec();
    CHECK(norm(d - am) < 1e-12);
    Mat2 a = eval_derivative(s, x), b = eval_derivative(s, x + m.as_vec());
    CHECK((a - b).max_abs() < 1e-11);
  }
}

TEST_CASE("analytic derivative") {
  MapSpec lin = MapSpec::linear_model({3, 1, 1, 1});
  Mat2 d = eval_derivative(lin, {0.123, 0.456});
  CHECK(d.a == 3);
  CHECK(d.b == 1);
  CHECK(d.c == 1);
  CHECK(d.d == 1);
  const double eps = 0.05;
  MapSpec s = single(eps);
  Rng rng = make_rng(3);
  for (int i = 0; i < 200; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    Mat2 D = eval_derivative(s, x);
    CHECK(std::abs(D.a - (3 + kTwoPi * eps * std::cos(kTwoPi * x.x1))) < 1e-13);
    CHECK(D.b == 1);
    CHECK(D.c == 1);
    CHECK(D.d == 1);
  }
  MapSpec t = two_term();
  const double h = 1e-6;
  for (int i = 0; i < 200; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    Mat2 D = eval_derivative(t, x);
    Vec2 c1 = (eval_lift(t, x + Vec2{h, 0}) - eval_lift(t, x - Vec2{h, 0})) / (2 * h);
    Vec2 c2 = (eval_lift(t, x + Vec2{0, h}) - eval_lift(t, x - Vec2{0, h})) / (2 * h);
    CHECK(std::abs(c1.x1 - D.a) < 1e-7);
    CHECK(std::abs(c1.x2 - D.c) < 1e-7);
    CHECK(std::abs(c2.x1 - D.b) < 1e-7);
    CHECK(std::abs(c2.x2 - D.d) < 1e-7);
  }
}

TEST_CASE("conjugated spec derivative matches finite differences") {
  MapSpec c = two_term();
  c.conjugator = {{{0, 1}, {0.1 / kTwoPi, 0}, 0.0}};
  Rng rng = make_rng(4);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    Mat2 D = eval_derivative(c, x);
    Vec2 c1 = (eval_lift(c, x + Vec2{h, 0}) - eval_lift(c, x - Vec2{h, 0})) / (2 * h);
    Vec2 c2 = (eval_lift(c, x + Vec2{0, h}) - eval_lift(c, x - Vec2{0, h})) / (2 * h);
    CHECK(std::abs(c1.x1 - D.a) < 1e-7);
    CHECK(std::abs(c2.x2 - D.d) < 1e-7);
    // G = Phi o F0 o Phi^-1
    MapSpec f0 = two_term();
    PlanePoint g = c.conj_apply(eval_lift(f0, c.conj_inverse(x)));
    CHECK(norm(g - eval_lift(c, x)) < 1e-13);
  }
}

TEST_CASE("invert_lift") {
  MapSpec lin = MapSpec::linear_model({3, 1, 1, 1});
  PlanePoint x = invert_lift(lin, {2, 1});
  CHECK(std::abs(x.x1 - 0.5) < 1e-15);
  CHECK(std::abs(x.x2 - 0.5) < 1e-15);
  MapSpec s = two_term();
  Rng rng = make_rng(5);
  for (int i = 0; i < 500; ++i) {
    PlanePoint x0{3 * uniform01(rng) - 1, 3 * uniform01(rng) - 1};
    PlanePoint back = invert_lift(s, eval_lift(s, x0), 1e-13);
    CHECK(norm(back - x0) < 1e-12);
    CHECK(norm(eval_lift(s, back) - eval_lift(s, x0)) < 1e-13);
  }
}

TEST_CASE("preimages") {
  MapSpec lin = MapSpec::linear_model({3, 1, 1, 1});
  auto p = preimages(lin, {0, 0});
  REQUIRE(p.size() == 2);
  bool has0 = false, hashalf = false;
  for (const auto& q : p) {
    has0 = has0 || torus_distance(q.lift(), {0, 0}) < 1e-14;
    hashalf = hashalf || torus_distance(q.lift(), {0.5, 0.5}) < 1e-14;
  }
  CHECK(has0);
  CHECK(hashalf);
  MapSpec s = two_term();
  Rng rng = make_rng(6);
  for (int i = 0; i < 200; ++i) {
    TorusPoint y{uniform01(rng), uniform01(rng)};
    auto pre = preimages(s, y);
    REQUIRE(pre.size() == 2);
    for (const auto& q : pre) CHECK(torus_distance(s.map(q).lift(), y.lift()) < 1e-12);
    CHECK(torus_distance(pre[0].lift(), pre[1].lift()) > 1e-3);
    // preimages of a different point are disjoint from these
    TorusPoint z = project(y.lift() + Vec2{0.01, 0.0});
    for (const auto& q : preimages(s, z))
      for (const auto& r : pre) CHECK(torus_distance(q.lift(), r.lift()) > 1e-6);
  }
}

TEST_CASE("Anosov certificates") {
  MapSpec lin = MapSpec::linear_model({3, 1, 1, 1});
  AnosovCertificate c = verify_anosov(lin);
  CHECK(c.expansion_lb == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-6));
  CHECK(c.contraction_ub == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-6));
  AnosovCertificate e = verify_anosov(single(0.05), 1.0 / 512);
  CHECK(e.expansion_lb > 1);
  CHECK(e.contraction_ub < 1);
  CHECK(e.grid_step <= 1.0 / 512);
  MapSpec huge = MapSpec::linear_model({3, 1, 1, 1});
  huge.terms = {{{1, 0}, {10, 0}, 0.0}};
  CHECK_THROWS_AS(verify_anosov(huge), NotAnosov);
}

TEST_CASE("certificate soundness on samples") {
  MapSpec s = two_term();
  AnosovCertificate c = cached_certificate(s);
  Rng rng = make_rng(7);
  const Vec2 eu = s.linear.e_u, es = s.linear.e_s;
  double worst_u = 1e300, worst_s = 0;
  for (int i = 0; i < 10000; ++i) {
    PlanePoint x{uniform01(rng), uniform01(rng)};
    double t = (2 * uniform01(rng) - 1) * c.cone_slope_u;
    Vec2 v = eu + es * t;
    Mat2 D = s.jacobian(x);
    worst_u = std::min(worst_u, norm(D * v) / norm(v));
    double r = (2 * uniform01(rng) - 1) * c.cone_slope_s;
    Vec2 w = es + eu * r;
    worst_s = std::max(worst_s, norm(w) / norm(D.inverse() * w));
  }
  CHECK(worst_u >= c.expansion_lb);
  CHECK(worst_s <= c.contraction_ub);
}

TEST_CASE("map-spec files") {
  const std::string text = R"({"name": "t", "linear": [[3, 1], [1, 1]],
    "perturbation": [{"k": [1, 0], "amp": [0.05, 0], "phase": 0}]})";
  MapSpec s = parse_map_spec(text);
  CHECK(s.name == "t");
  REQUIRE(s.terms.size() == 1);
  CHECK(s.terms[0].amp.x1 == 0.05);
  MapSpec r = parse_map_spec(map_spec_to_json(s));
  CHECK(same_map(r, s));
  CHECK(content_hash(map_spec_to_json(s)) == content_hash(map_spec_to_json(r)));

  try {
    parse_map_spec("{\"name\": \"t\",\n \"linear\": [[3,1],[1,1]],\n \"bogus\": 1}", "f.json");
    FAIL("expected SchemaError");
  } catch (const SchemaError& e) {
    std::string m = e.what();
    CHECK(m.find("bogus") != std::string::npos);
    CHECK(m.find("f.json:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_map_spec("{\"name\": \"t\"}"), SchemaError);
  CHECK_THROWS_AS(parse_map_spec("{\"linear\": [[3,1],[1,1]], \"perturbation\": [{\"k\": [1,0]}]}"), SchemaError);
  CHECK_THROWS_AS(parse_map_spec("{\"linear\": [[2,1],[1,1]]}"), Invertible);
  CHECK_THROWS_AS(parse_map_spec("{not json"), SchemaError);
  CHECK(parse_map_spec("{\"linear\": [[3,1],[1,1]]}").is_linear());
}

TEST_CASE("shipped specs load and certify") {
  for (const auto& e : std::filesystem::directory_iterator(ANOSOV_SPEC_DIR)) {
    if (e.path().extension() != ".json") continue;
    CAPTURE(e.path().string());
    MapSpec s = load_map_spec(e.path().string());
    AnosovCertificate c = cached_certificate(s);
    CHECK(c.expansion_lb > 1);
    CHECK(c.contraction_ub < 1);
  }
}
