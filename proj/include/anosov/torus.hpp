#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <vector>

namespace anosov {

struct Vec2 {
  double x1 = 0.0;
  double x2 = 0.0;

  Vec2() = default;
  Vec2(double a, double b) : x1(a), x2(b) {}

  Vec2 operator+(const Vec2& o) const { return {x1 + o.x1, x2 + o.x2}; }
  Vec2 operator-(const Vec2& o) const { return {x1 - o.x1, x2 - o.x2}; }
  Vec2 operator-() const { return {-x1, -x2}; }
  Vec2 operator*(double s) const { return {x1 * s, x2 * s}; }
  Vec2 operator/(double s) const { return {x1 / s, x2 / s}; }
  Vec2& operator+=(const Vec2& o) { x1 += o.x1; x2 += o.x2; return *this; }
  Vec2& operator-=(const Vec2& o) { x1 -= o.x1; x2 -= o.x2; return *this; }
  bool operator==(const Vec2& o) const = default;
};

inline Vec2 operator*(double s, const Vec2& v) { return v * s; }
inline double dot(const Vec2& a, const Vec2& b) { return a.x1 * b.x1 + a.x2 * b.x2; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x1 * b.x2 - a.x2 * b.x1; }
inline double norm(const Vec2& a) { return std::hypot(a.x1, a.x2); }
inline Vec2 perp(const Vec2& a) { return {-a.x2, a.x1}; }
inline Vec2 normalized(const Vec2& a) { return a / norm(a); }

// Row-major 2x2 real matrix [[a, b], [c, d]].
struct Mat2 {
  double a = 0, b = 0, c = 0, d = 0;

  static Mat2 identity() { return {1, 0, 0, 1}; }
  Vec2 operator*(const Vec2& v) const { return {a * v.x1 + b * v.x2, c * v.x1 + d * v.x2}; }
  Mat2 operator*(const Mat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  Mat2 operator+(const Mat2& m) const { return {a + m.a, b + m.b, c + m.c, d + m.d}; }
  Mat2 operator-(const Mat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  Mat2 operator*(double s) const { return {a * s, b * s, c * s, d * s}; }
  double det() const { return a * d - b * c; }
  double trace() const { return a + d; }
  Mat2 transpose() const { return {a, c, b, d}; }
  Mat2 inverse() const {
    double D = det();
    return {d / D, -b / D, -c / D, a / D};
  }
  double max_abs() const {
    return std::max(std::max(std::abs(a), std::abs(b)), std::max(std::abs(c), std::abs(d)));
  }
  // Spectral norm.
  double norm2() const;
};

struct LatticeVector {
  std::int64_t n1 = 0;
  std::int64_t n2 = 0;
  bool operator==(const LatticeVector&) const = default;
  auto operator<=>(const LatticeVector&) const = default;
  Vec2 as_vec() const { return {double(n1), double(n2)}; }
};

struct IntMat2 {
  std::int64_t a = 0, b = 0, c = 0, d = 0;

  static IntMat2 identity() { return {1, 0, 0, 1}; }
  IntMat2 operator*(const IntMat2& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  IntMat2 operator-(const IntMat2& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  LatticeVector operator*(const LatticeVector& v) const {
    return {a * v.n1 + b * v.n2, c * v.n1 + d * v.n2};
  }
  bool operator==(const IntMat2&) const = default;
  std::int64_t det() const { return a * d - b * c; }
  std::int64_t trace() const { return a + d; }
  Mat2 real() const { return {double(a), double(b), double(c), double(d)}; }
  IntMat2 pow(int n) const;
};

using PlanePoint = Vec2;

// Point of R^2/Z^2 with coordinates in [0,1). Only project() builds one from
// arbitrary plane coordinates.
struct TorusPoint {
  double x1 = 0.0;
  double x2 = 0.0;
  PlanePoint lift() const { return {x1, x2}; }
  bool operator==(const TorusPoint&) const = default;
};

TorusPoint project(const PlanePoint& p);
// Reduce a real number to [0,1), guarding the round-up to exactly 1.
double frac01(double v);
// Integer part used by project: p - project(p).
LatticeVector floor_part(const PlanePoint& p);
// Shortest representative of a - b modulo Z^2.
Vec2 torus_delta(const PlanePoint& a, const PlanePoint& b);
double torus_distance(const PlanePoint& a, const PlanePoint& b);
LatticeVector round_lattice(const Vec2& v);

struct LinearModel {
  IntMat2 a;
  double lam_s = 0, lam_u = 0;
  Vec2 e_s, e_u;
  std::int64_t det = 0;
  // Dual basis: v = (du.v) e_u + (ds.v) e_s.
  Vec2 du, ds;

  Mat2 real() const { return a.real(); }
  double stable_coord(const Vec2& v) const { return dot(ds, v); }
  double unstable_coord(const Vec2& v) const { return dot(du, v); }
};

LinearModel eigen_split(const IntMat2& m);
LinearModel validate_model(const IntMat2& m);

// Canonical coset representatives of Z^2 / m Z^2. The lattice m Z^2 has a
// basis {(d1, 0), (t, d2)} with d1 d2 = |det m| and 0 <= t < d1; the
// representatives are (i, j) with 0 <= i < d1, 0 <= j < d2, listed in
// lexicographic order.
class CosetIndex {
 public:
  explicit CosetIndex(const IntMat2& m);
  std::size_t size() const { return std::size_t(d1_ * d2_); }
  const std::vector<LatticeVector>& reps() const { return reps_; }
  // Index of the class of n.
  std::size_t index_of(const LatticeVector& n) const;
  // Canonical representative of the class of n.
  LatticeVector reduce(const LatticeVector& n) const { return reps_[index_of(n)]; }
  bool congruent(const LatticeVector& p, const LatticeVector& q) const {
    return index_of(p) == index_of(q);
  }

 private:
  IntMat2 m_;
  std::int64_t d1_ = 1, d2_ = 1, t_ = 0;
  std::vector<LatticeVector> reps_;
};

std::vector<LatticeVector> coset_reps(const IntMat2& m);

}  // namespace anosov
