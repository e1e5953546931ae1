#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "anosov/accessibility.hpp"
#include "anosov/errors.hpp"

using namespace anosov;

namespace {

MapSpec spec(const std::string& name) { return load_map_spec(std::string(ANOSOV_SPEC_DIR) + "/" + name + ".json"); }

// Checks a path against the map directly, without trusting the search
// bookkeeping.
void check_path(const MapSpec& s, const UPath& p, const TorusPoint& from, const TorusPoint& to) {
  const AnosovCertificate& cert = cached_certificate(s);
  REQUIRE(!p.segments.empty());
  CHECK(p.segments.size() <= 4);
  REQUIRE(p.junctions.size() + 1 == p.segments.size());
  CHECK(torus_distance(p.segments.front().leaf.points[p.segments.front().leaf.base_index()], from.lift()) < 1e-9);
  CHECK(torus_distance(p.segments.back().leaf.points[p.segments.back().leaf.base_index()], to.lift()) < 1e-9);
  for (std::size_t i = 0; i < p.junctions.size(); ++i) {
    const UJunction& j = p.junctions[i];
    CHECK(j.seg_a == int(i));
    CHECK(j.seg_b == int(i) + 1);
    const UnstableSegment& a = p.segments[i];
    const UnstableSegment& b = p.segments[i + 1];
    PlanePoint pa = a.param->eval(j.s_a), pb = b.param->eval(j.s_b);
    CHECK(torus_distance(pa, pb) < 1e-6);
    // junction parameters inside the segments
    CHECK(j.s_a >= std::min(a.seed_s.front(), a.seed_s.back()));
    CHECK(j.s_a <= std::max(a.seed_s.front(), a.seed_s.back()));
    CHECK(j.s_b >= std::min(b.seed_s.front(), b.seed_s.back()));
    CHECK(j.s_b <= std::max(b.seed_s.front(), b.seed_s.back()));
  }
  CHECK(p.max_gap() < 1e-6);
  for (const auto& seg : p.segments) {
    CHECK(max_cone_slope(s, seg.leaf) <= cert.cone_slope_u);
    // the leaf is tangent to the unstable direction of its past at the base
    Vec2 d;
    seg.param->eval(0.0, &d);
    REQUIRE(seg.leaf.past.has_value());
    Direction e = unstable_direction(s, *seg.leaf.past);
    CHECK(angular_distance(Direction::from_vector(d), e) < 1e-6);
    // arclength of every segment is 2 radius
    CHECK(seg.leaf.t.back() - seg.leaf.t.front() == doctest::Approx(2 * p.radius).epsilon(1e-9));
  }
}

}  // namespace

TEST_CASE("spread vanishes for special maps") {
  Rng rng = make_rng(41);
  MapSpec L = spec("linear_a3");
  CHECK(u_direction_spread(L, {0.3, 0.7}, 12, 30, rng) < 1e-12);
  CHECK(spread_noise(L, 30) < 1e-12);
  MapSpec c = spec("conjugated_a3");
  CHECK(u_direction_spread(c, {0.3, 0.7}, 12, 30, rng) < 10 * spread_noise(c, 30));
  MapSpec e = spec("eu_skew_a3");
  CHECK(u_direction_spread(e, {0.3, 0.7}, 12, 30, rng) < 10 * spread_noise(e, 30));
}

TEST_CASE("spread is positive for a generic map") {
  Rng rng = make_rng(42);
  MapSpec g = spec("generic_1");
  double s = u_direction_spread(g, {0.375, 0.375}, 12, 30, rng);
  CHECK(s > 100 * spread_noise(g, 30));
  CHECK(s <= M_PI / 2 + 1e-12);
  // the spread of one chain is zero
  CHECK(u_direction_spread(g, {0.375, 0.375}, 1, 30, rng) == 0.0);
}

TEST_CASE("dichotomy verdicts") {
  DichotomyOptions opt;
  opt.scan = 4;
  opt.defect_samples = 32;
  struct Case {
    const char* name;
    Dichotomy want;
  } cases[] = {{"linear_a3", Dichotomy::Special},
               {"conjugated_a3", Dichotomy::Special},
               {"generic_1", Dichotomy::UAccessible},
               {"single_a3", Dichotomy::UAccessible}};
  for (const auto& c : cases) {
    CAPTURE(c.name);
    Rng rng = make_rng(43);
    DichotomyReport r = dichotomy_verdict(spec(c.name), rng, opt);
    CHECK(r.verdict == c.want);
    CHECK(r.min_spread <= r.max_spread);
    std::string j = dichotomy_to_json(r);
    CHECK(j.find("\"verdict\": \"" + to_string(c.want) + "\"") != std::string::npos);
  }
}

TEST_CASE("fan point") {
  Rng rng = make_rng(44);
  MapSpec g = spec("generic_1");
  FanPoint f = find_fan_point(g, rng);
  CHECK(f.angle > 0.05);
  CHECK(f.alpha.base == f.x);
  CHECK(f.beta.base == f.x);
  double a = angular_distance(unstable_direction(g, f.alpha), unstable_direction(g, f.beta));
  CHECK(std::abs(a - f.angle) < 1e-12);
}

TEST_CASE("u-paths on a generic map") {
  Rng rng = make_rng(45);
  MapSpec g = spec("generic_1");
  UPathFinder finder(g, rng);
  CHECK(finder.dichotomy().verdict == Dichotomy::UAccessible);
  for (int q = 0; q < 4; ++q) {
    TorusPoint from{uniform01(rng), uniform01(rng)}, to{uniform01(rng), uniform01(rng)};
    UPath p = finder.find(from, to, 0.5, rng);
    check_path(g, p, from, to);
  }
  UPath same = finder.find({0.2, 0.2}, {0.2, 0.2}, 0.5, rng);
  CHECK(same.empty());
  CHECK(same.max_gap() == 0.0);
}

TEST_CASE("u-path export") {
  Rng rng = make_rng(46);
  MapSpec g = spec("generic_1");
  UPath p = find_u_path(g, {0.1, 0.2}, {0.7, 0.4}, 0.5, 8, rng);
  std::string csv = upath_to_csv(p);
  CHECK(csv.rfind("segment,t,x1,x2\n", 0) == 0);
  std::size_t rows = 0;
  for (const auto& s : p.segments) rows += s.leaf.size();
  std::size_t lines = 0;
  for (char ch : csv) lines += ch == '\n';
  CHECK(lines == rows + 1);
  std::string j = upath_to_json(p);
  CHECK(j.find("\"junctions\"") != std::string::npos);
}

TEST_CASE("no u-paths on special maps") {
  Rng rng = make_rng(47);
  CHECK_THROWS_AS(UPathFinder(spec("linear_a3"), rng), SpecialMap);
  CHECK_THROWS_AS(find_u_path(spec("conjugated_a3"), {0.1, 0.1}, {0.5, 0.5}, 0.5, 8, rng), SpecialMap);
}

TEST_CASE("search budget") {
  Rng rng = make_rng(48);
  MapSpec g = spec("generic_1");
  UPathOptions opt;
  opt.max_radius = 0.01;  // far too short to reach anything
  UPathFinder finder(g, rng, 8, opt);
  CHECK_THROWS_AS(finder.find({0.1, 0.1}, {0.6, 0.5}, 0.01, rng), SearchExhausted);
}
