#pragma once

// Scalar-generic evaluation of a MapSpec. Instantiated for double (the normal
// path) and __float128 (direction convergence checks below double roundoff).

#include <quadmath.h>

#include <cmath>

#include "anosov/map_model.hpp"

namespace anosov::kernel {

using quad = __float128;

inline double k_sin(double x) { return std::sin(x); }
inline double k_cos(double x) { return std::cos(x); }
inline double k_floor(double x) { return std::floor(x); }
inline double k_abs(double x) { return std::abs(x); }
inline double k_sqrt(double x) { return std::sqrt(x); }
inline quad k_sin(quad x) { return sinq(x); }
inline quad k_cos(quad x) { return cosq(x); }
inline quad k_floor(quad x) { return floorq(x); }
inline quad k_abs(quad x) { return fabsq(x); }
inline quad k_sqrt(quad x) { return sqrtq(x); }

template <class T> inline T two_pi();
template <> inline double two_pi<double>() { return 6.283185307179586476925286766559; }
template <> inline quad two_pi<quad>() { return 2 * acosq(quad(-1)); }

template <class T> inline T round_eps();
template <> inline double round_eps<double>() { return 1e-15; }
template <> inline quad round_eps<quad>() { return quad(1e-31); }

template <class T>
struct V {
  T x1, x2;
  V operator+(const V& o) const { return {x1 + o.x1, x2 + o.x2}; }
  V operator-(const V& o) const { return {x1 - o.x1, x2 - o.x2}; }
  V operator*(T s) const { return {x1 * s, x2 * s}; }
};

template <class T>
struct M {
  T a, b, c, d;
  V<T> operator*(const V<T>& v) const { return {a * v.x1 + b * v.x2, c * v.x1 + d * v.x2}; }
  M operator*(const M& m) const {
    return {a * m.a + b * m.c, a * m.b + b * m.d, c * m.a + d * m.c, c * m.b + d * m.d};
  }
  M operator-(const M& m) const { return {a - m.a, b - m.b, c - m.c, d - m.d}; }
  T det() const { return a * d - b * c; }
  M inverse() const {
    T D = det();
    return {d / D, -b / D, -c / D, a / D};
  }
};

template <class T>
M<T> linear_part(const MapSpec& s) {
  const IntMat2& a = s.linear.a;
  return {T(a.a), T(a.b), T(a.c), T(a.d)};
}

// Sum of amp sin(2 pi k.u + phase) and its Jacobian. u should be reduced.
template <class T>
void trig_sum(const std::vector<PerturbationTerm>& terms, const V<T>& u, V<T>& p, M<T>* dp) {
  p = {T(0), T(0)};
  if (dp) *dp = {T(0), T(0), T(0), T(0)};
  const T tp = two_pi<T>();
  for (const auto& t : terms) {
    T k1 = T(double(t.k.n1)), k2 = T(double(t.k.n2));
    T th = tp * (k1 * u.x1 + k2 * u.x2) + T(t.phase);
    T s = k_sin(th);
    T a1 = T(t.amp.x1), a2 = T(t.amp.x2);
    p.x1 += a1 * s;
    p.x2 += a2 * s;
    if (dp) {
      T c = k_cos(th) * tp;
      dp->a += a1 * k1 * c;
      dp->b += a1 * k2 * c;
      dp->c += a2 * k1 * c;
      dp->d += a2 * k2 * c;
    }
  }
}

template <class T>
V<T> reduce(const V<T>& x) {
  return {x.x1 - k_floor(x.x1), x.x2 - k_floor(x.x2)};
}

// Phi^-1(y) for Phi = Id + c, by Newton seeded at y.
template <class T>
V<T> conj_inverse(const std::vector<PerturbationTerm>& c, const V<T>& y) {
  V<T> base{k_floor(y.x1), k_floor(y.x2)};
  V<T> u = y - base;
  V<T> z = u;
  for (int it = 0; it < 60; ++it) {
    V<T> cz;
    M<T> dc;
    trig_sum(c, z, cz, &dc);
    V<T> r = z + cz - u;
    M<T> J{T(1) + dc.a, dc.b, dc.c, T(1) + dc.d};
    V<T> step = J.inverse() * r;
    z = z - step;
    if (k_abs(step.x1) + k_abs(step.x2) < 4 * round_eps<T>()) break;
  }
  return z + base;
}

// P(x) = F(x) - A x and DP(x), evaluated at the reduced point.
template <class T>
void displacement(const MapSpec& s, const V<T>& x, V<T>& p, M<T>* dp) {
  V<T> u = reduce(x);
  if (s.conjugator.empty()) {
    trig_sum(s.terms, u, p, dp);
    return;
  }
  const M<T> A = linear_part<T>(s);
  V<T> y = conj_inverse(s.conjugator, u);
  V<T> p0;
  M<T> dp0;
  trig_sum(s.terms, y, p0, dp ? &dp0 : nullptr);
  V<T> z = A * y + p0;
  V<T> cz;
  M<T> dcz;
  trig_sum(s.conjugator, z, cz, dp ? &dcz : nullptr);
  V<T> g = z + cz;
  p = g - A * u;
  if (dp) {
    V<T> cy;
    M<T> dcy;
    trig_sum(s.conjugator, y, cy, &dcy);
    M<T> dphi_z{T(1) + dcz.a, dcz.b, dcz.c, T(1) + dcz.d};
    M<T> dphi_y{T(1) + dcy.a, dcy.b, dcy.c, T(1) + dcy.d};
    M<T> df0{A.a + dp0.a, A.b + dp0.b, A.c + dp0.c, A.d + dp0.d};
    *dp = dphi_z * df0 * dphi_y.inverse() - A;
  }
}

template <class T>
void lift_and_jacobian(const MapSpec& s, const V<T>& x, V<T>& fx, M<T>& df) {
  const M<T> A = linear_part<T>(s);
  V<T> p;
  M<T> dp;
  displacement(s, x, p, &dp);
  fx = A * x + p;
  df = {A.a + dp.a, A.b + dp.b, A.c + dp.c, A.d + dp.d};
}

}  // namespace anosov::kernel
