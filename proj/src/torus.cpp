#include "anosov/torus.hpp"

#include <numeric>
#include <sstream>

#include "anosov/errors.hpp"

namespace anosov {

double Mat2::norm2() const {
  // Largest singular value from the closed form for 2x2 matrices.
  double s = a * a + b * b + c * c + d * d;
  double D = det();
  double disc = std::max(0.0, s * s - 4.0 * D * D);
  return std::sqrt(0.5 * (s + std::sqrt(disc)));
}

IntMat2 IntMat2::pow(int n) const {
  IntMat2 r = identity();
  IntMat2 base = *this;
  while (n > 0) {
    if (n & 1) r = r * base;
    base = base * base;
    n >>= 1;
  }
  return r;
}

double frac01(double v) {
  double f = v - std::floor(v);
  if (f >= 1.0) f = 0.0;
  return f;
}

TorusPoint project(const PlanePoint& p) { return {frac01(p.x1), frac01(p.x2)}; }

LatticeVector floor_part(const PlanePoint& p) {
  TorusPoint t = project(p);
  return {std::int64_t(std::llround(p.x1 - t.x1)), std::int64_t(std::llround(p.x2 - t.x2))};
}

Vec2 torus_delta(const PlanePoint& a, const PlanePoint& b) {
  Vec2 d = a - b;
  return {d.x1 - std::round(d.x1), d.x2 - std::round(d.x2)};
}

double torus_distance(const PlanePoint& a, const PlanePoint& b) { return norm(torus_delta(a, b)); }

LatticeVector round_lattice(const Vec2& v) {
  return {std::int64_t(std::llround(v.x1)), std::int64_t(std::llround(v.x2))};
}

namespace {

std::string matrix_text(const IntMat2& m) {
  std::ostringstream os;
  os << "[[" << m.a << "," << m.b << "],[" << m.c << "," << m.d << "]]";
  return os.str();
}

Vec2 eigenvector(const Mat2& m, double lam) {
  Vec2 v1{m.b, lam - m.a};
  Vec2 v2{lam - m.d, m.c};
  Vec2 v = norm(v1) >= norm(v2) ? v1 : v2;
  if (norm(v) == 0.0) v = Vec2{1.0, 0.0};  // scalar matrix; any vector works
  v = normalized(v);
  bool flip = std::abs(v.x1) > 1e-15 ? v.x1 < 0 : v.x2 < 0;
  return flip ? -v : v;
}

}  // namespace

LinearModel eigen_split(const IntMat2& m) {
  const std::int64_t tr = m.trace();
  const std::int64_t det = m.det();
  const std::int64_t disc = tr * tr - 4 * det;
  if (disc < 0) throw ComplexSpectrum("non-real eigenvalues for " + matrix_text(m));
  // Eigenvalue +-1 is an exact integer condition on the characteristic polynomial.
  if (1 - tr + det == 0 || 1 + tr + det == 0)
    throw NotHyperbolic("eigenvalue of modulus 1 for " + matrix_text(m));

  double sq = std::sqrt(double(disc));
  double big = 0.5 * (double(tr) + (tr >= 0 ? sq : -sq));
  double small = big != 0.0 ? double(det) / big : 0.0;
  if (std::abs(small) > std::abs(big)) std::swap(small, big);
  if (!(std::abs(small) < 1.0))
    throw NotHyperbolic("no eigenvalue inside the unit circle (trivial stable bundle) for " +
                        matrix_text(m));
  if (!(std::abs(big) > 1.0))
    throw NotHyperbolic("no eigenvalue outside the unit circle for " + matrix_text(m));

  LinearModel lm;
  lm.a = m;
  lm.det = det;
  lm.lam_s = small;
  lm.lam_u = big;
  Mat2 r = m.real();
  lm.e_u = eigenvector(r, big);
  lm.e_s = eigenvector(r, small);
  double sd = lm.e_u.x1 * lm.e_s.x2 - lm.e_s.x1 * lm.e_u.x2;
  lm.du = Vec2{lm.e_s.x2, -lm.e_s.x1} / sd;
  lm.ds = Vec2{-lm.e_u.x2, lm.e_u.x1} / sd;
  return lm;
}

LinearModel validate_model(const IntMat2& m) {
  const std::int64_t det = m.det();
  const std::int64_t tr = m.trace();
  if (det == 1 || det == -1)
    throw Invertible("unimodular linear part " + matrix_text(m) + " (Anosov diffeomorphism)");
  // Monic integer polynomial: every rational root is an integer dividing det.
  auto is_root = [&](std::int64_t r) { return r * r - tr * r + det == 0; };
  if (det == 0) throw Reducible("rational eigenvalue 0 for " + matrix_text(m));
  std::int64_t ad = det < 0 ? -det : det;
  for (std::int64_t q = 1; q * q <= ad; ++q) {
    if (ad % q != 0) continue;
    for (std::int64_t r : {q, -q, ad / q, -(ad / q)})
      if (is_root(r)) throw Reducible("rational eigenvalue " + std::to_string(r) + " for " + matrix_text(m));
  }
  return eigen_split(m);
}

namespace {

std::int64_t floor_mod(std::int64_t v, std::int64_t m) {
  std::int64_t r = v % m;
  return r < 0 ? r + m : r;
}

// Returns g = gcd(|x|, |y|) > 0 and s, t with s x + t y = g.
std::int64_t ext_gcd(std::int64_t x, std::int64_t y, std::int64_t& s, std::int64_t& t) {
  std::int64_t old_r = x, r = y, old_s = 1, s1 = 0, old_t = 0, t1 = 1;
  while (r != 0) {
    std::int64_t q = old_r / r;
    std::int64_t tmp = old_r - q * r; old_r = r; r = tmp;
    tmp = old_s - q * s1; old_s = s1; s1 = tmp;
    tmp = old_t - q * t1; old_t = t1; t1 = tmp;
  }
  if (old_r < 0) { old_r = -old_r; old_s = -old_s; old_t = -old_t; }
  s = old_s;
  t = old_t;
  return old_r;
}

}  // namespace

CosetIndex::CosetIndex(const IntMat2& m) : m_(m) {
  const std::int64_t det = m.det();
  if (det == 0) throw SingularMatrix("coset enumeration needs det != 0, got " + matrix_text(m));
  // Columns v1 = (a, c), v2 = (b, d) generate the lattice.
  std::int64_t s = 0, t = 0;
  std::int64_t g = ext_gcd(m.c, m.d, s, t);
  d2_ = g;
  d1_ = (det < 0 ? -det : det) / g;
  t_ = floor_mod(s * m.a + t * m.b, d1_);
  reps_.reserve(size());
  for (std::int64_t i = 0; i < d1_; ++i)
    for (std::int64_t j = 0; j < d2_; ++j) reps_.push_back({i, j});
}

std::size_t CosetIndex::index_of(const LatticeVector& n) const {
  std::int64_t j = floor_mod(n.n2, d2_);
  std::int64_t k = (n.n2 - j) / d2_;
  std::int64_t i = floor_mod(n.n1 - k * t_, d1_);
  return std::size_t(i * d2_ + j);
}

std::vector<LatticeVector> coset_reps(const IntMat2& m) { return CosetIndex(m).reps(); }

}  // namespace anosov
