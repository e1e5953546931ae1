#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>

#include "anosov/errors.hpp"
#include "anosov/random.hpp"
#include "anosov/torus.hpp"

using namespace anosov;

TEST_CASE("project reduces modulo the lattice") {
  TorusPoint a = project({1.25, -0.5});
  CHECK(a.x1 == 0.25);
  CHECK(a.x2 == 0.5);
  CHECK(project({0, 0}) == TorusPoint{0, 0});
  CHECK(project({3.0, -2.0}) == TorusPoint{0, 0});
  // tiny negatives must not round up to exactly 1
  TorusPoint t = project({-1e-18, -1e-300});
  CHECK(t.x1 < 1.0);
  CHECK(t.x2 < 1.0);
}

TEST_CASE("project is deck invariant and inverts lift") {
  Rng rng = make_rng(1);
  std::uniform_int_distribution<int> n(-50, 50);
  for (int i = 0; i < 1000; ++i) {
    PlanePoint p{4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2};
    LatticeVector m{n(rng), n(rng)};
    TorusPoint a = project(p), b = project(p + m.as_vec());
    CHECK(torus_distance(a.lift(), b.lift()) < 1e-13);
    CHECK(a.x1 >= 0);
    CHECK(a.x1 < 1);
    CHECK(a.x2 >= 0);
    CHECK(a.x2 < 1);
    CHECK(project(a.lift()) == a);
    Vec2 back = p - floor_part(p).as_vec();
    CHECK(std::abs(back.x1 - a.x1) < 1e-15);
  }
}

TEST_CASE("torus_delta is the shortest representative") {
  Vec2 d = torus_delta({0.95, 0.1}, {0.05, 0.9});
  CHECK(d.x1 == doctest::Approx(-0.1));
  CHECK(d.x2 == doctest::Approx(0.2));
  CHECK(round_lattice({2.4, -3.6}) == LatticeVector{2, -4});
}

TEST_CASE("eigen_split of A3") {
  LinearModel L = eigen_split({3, 1, 1, 1});
  const double r2 = std::sqrt(2.0);
  CHECK(std::abs(L.lam_s - (2 - r2)) < 1e-14);
  CHECK(std::abs(L.lam_u - (2 + r2)) < 1e-14);
  // e_u proportional to (1, sqrt2 - 1), e_s to (1, -1 - sqrt2), first coordinate positive
  CHECK(std::abs(cross(L.e_u, {1, r2 - 1})) < 1e-14);
  CHECK(std::abs(cross(L.e_s, {1, -1 - r2})) < 1e-14);
  CHECK(L.e_u.x1 > 0);
  CHECK(L.e_s.x1 > 0);
  CHECK(std::abs(norm(L.e_u) - 1) < 1e-15);
  Mat2 A = L.real();
  CHECK(norm(A * L.e_s - L.e_s * L.lam_s) < 1e-12);
  CHECK(norm(A * L.e_u - L.e_u * L.lam_u) < 1e-12);
  CHECK(std::abs(L.lam_s * L.lam_u - 2) < 1e-12);
  CHECK(L.det == 2);
  // dual basis
  CHECK(std::abs(dot(L.du, L.e_u) - 1) < 1e-15);
  CHECK(std::abs(dot(L.du, L.e_s)) < 1e-15);
  CHECK(std::abs(dot(L.ds, L.e_s) - 1) < 1e-15);
}

TEST_CASE("eigen_split rejects non-hyperbolic and complex spectra") {
  CHECK_THROWS_AS(eigen_split({2, 0, 0, 2}), NotHyperbolic);
  CHECK_THROWS_AS(eigen_split({1, 1, 0, 1}), NotHyperbolic);
  CHECK_THROWS_AS(eigen_split({0, -1, 1, 0}), ComplexSpectrum);
}

TEST_CASE("validate_model") {
  CHECK_NOTHROW(validate_model({3, 1, 1, 1}));
  CHECK_THROWS_AS(validate_model({2, 1, 1, 1}), Invertible);
  CHECK_THROWS_AS(validate_model({2, 0, 0, 3}), Reducible);
  CHECK_THROWS_AS(validate_model({1, 1, 0, 1}), Invertible);
  CHECK_NOTHROW(validate_model({4, 1, 1, 1}));
}

TEST_CASE("coset representatives") {
  auto r = coset_reps({3, 1, 1, 1});
  REQUIRE(r.size() == 2);
  CHECK(r[0] == LatticeVector{0, 0});
  IntMat2 A{3, 1, 1, 1};
  IntMat2 M = A.pow(2) - IntMat2::identity();
  CHECK(M == IntMat2{9, 4, 4, 1});
  auto r7 = coset_reps(M);
  CHECK(r7.size() == 7);
  auto r2 = coset_reps({2, 0, 0, 1});
  REQUIRE(r2.size() == 2);
  CHECK(r2[0] == LatticeVector{0, 0});
  CHECK(r2[1] == LatticeVector{1, 0});
  CHECK_THROWS_AS(coset_reps({1, 2, 2, 4}), SingularMatrix);
}

TEST_CASE("coset representatives are pairwise incongruent and complete") {
  IntMat2 A{3, 1, 1, 1};
  for (int n = 1; n <= 5; ++n) {
    IntMat2 M = A.pow(n) - IntMat2::identity();
    auto reps = coset_reps(M);
    CHECK(std::int64_t(reps.size()) == std::llabs(M.det()));
    CosetIndex idx(M);
    std::set<std::size_t> seen;
    for (const auto& v : reps) seen.insert(idx.index_of(v));
    CHECK(seen.size() == reps.size());
    // lexicographic order
    for (std::size_t i = 1; i < reps.size(); ++i) CHECK(reps[i - 1] < reps[i]);
    // every translate by M-lattice stays in its class
    Rng rng = make_rng(n);
    std::uniform_int_distribution<int> d(-20, 20);
    for (int t = 0; t < 50; ++t) {
      LatticeVector v{d(rng), d(rng)}, w{d(rng), d(rng)};
      LatticeVector mv = M * w;
      CHECK(idx.congruent(v, {v.n1 + mv.n1, v.n2 + mv.n2}));
    }
  }
}
