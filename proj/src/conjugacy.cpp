#include "anosov/conjugacy.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "anosov/errors.hpp"
#include "anosov/parallel.hpp"
#include "anosov/periodic.hpp"

namespace anosov {

Vec2 displacement(const MapSpec& spec, const PlanePoint& x) {
  PlanePoint r = project(x).lift();
  return spec.lift(r) - spec.linear.real() * r;
}

double displacement_grid_max(const MapSpec& spec, int n) {
  if (spec.is_linear()) return 0.0;
  std::vector<double> rows(n, 0.0);
  parallel_for(n, [&](std::size_t i) {
    double m = 0;
    for (int j = 0; j < n; ++j) m = std::max(m, norm(displacement(spec, {double(i) / n, double(j) / n})));
    rows[i] = m;
  });
  return *std::max_element(rows.begin(), rows.end());
}

ConjugacyField::ConjugacyField(MapSpec spec, int depth, int grid)
    : spec_(std::move(spec)), depth_(depth), grid_(grid) {
  const LinearModel& L = spec_.linear;
  hu_grid_.assign(std::size_t(grid_) * grid_, 0.0);
  if (spec_.is_linear()) return;
  parallel_for(grid_, [&](std::size_t i) {
    for (int j = 0; j < grid_; ++j) hu_grid_[i * grid_ + j] = hu({double(i) / grid_, double(j) / grid_});
  });
  p_max_ = displacement_grid_max(spec_);
  tail_ = p_max_ * (std::pow(L.lam_u, -depth_) / (L.lam_u - 1) + std::pow(L.lam_s, depth_) / (1 - L.lam_s));
  double p = spec_.perturbation_sup_bound();
  bound_ = norm(L.du) * p / (L.lam_u - 1) * norm(L.e_u) + norm(L.ds) * p / (1 - L.lam_s) * norm(L.e_s);

  const int V = validation_grid();
  std::vector<double> rows(V, 0.0);
  parallel_for(V, [&](std::size_t i) {
    double m = 0;
    for (int j = 0; j < V; ++j) m = std::max(m, residual_at({(i + 0.5) / V, (j + 0.5) / V}));
    rows[i] = m;
  });
  residual_ = *std::max_element(rows.begin(), rows.end());
}

double ConjugacyField::hu(const PlanePoint& x) const {
  if (spec_.is_linear()) return 0.0;
  const LinearModel& L = spec_.linear;
  PlanePoint z = project(x).lift();
  double s = 0, w = 1 / L.lam_u;
  for (int k = 0; k <= depth_; ++k) {
    PlanePoint fz = spec_.lift(z);
    s += w * dot(L.du, fz - L.real() * z);
    z = project(fz).lift();
    w /= L.lam_u;
  }
  return s;
}

double ConjugacyField::hs(const PlanePoint& xhat) const {
  if (spec_.is_linear()) return 0.0;
  const LinearModel& L = spec_.linear;
  std::vector<PlanePoint> past = cover_past(spec_, xhat, depth_);
  double s = 0, w = 1;
  for (int k = 1; k <= depth_; ++k) {
    s -= w * dot(L.ds, displacement(spec_, past[k - 1]));
    w *= L.lam_s;
  }
  return s;
}

double ConjugacyField::hu_interp(const PlanePoint& x) const {
  TorusPoint t = project(x);
  double u = t.x1 * grid_, v = t.x2 * grid_;
  int i = int(std::floor(u)), j = int(std::floor(v));
  double a = u - i, b = v - j;
  auto at = [&](int p, int q) { return hu_grid_at(((p % grid_) + grid_) % grid_, ((q % grid_) + grid_) % grid_); };
  return (1 - a) * (1 - b) * at(i, j) + a * (1 - b) * at(i + 1, j) + (1 - a) * b * at(i, j + 1) +
         a * b * at(i + 1, j + 1);
}

Vec2 ConjugacyField::h(const PlanePoint& xhat) const {
  if (spec_.is_linear()) return {0, 0};
  return spec_.linear.e_u * hu(xhat) + spec_.linear.e_s * hs(xhat);
}

double ConjugacyField::residual_at(const PlanePoint& xhat) const {
  PlanePoint fx = spec_.lift(xhat);
  Vec2 r = spec_.linear.real() * h(xhat) - h(fx) - displacement(spec_, xhat);
  return norm(r);
}

ConjugacyField conjugacy_to_linear(const MapSpec& spec, int depth, int grid) {
  return ConjugacyField(spec, depth, grid);
}

std::string to_string(Specialness s) {
  switch (s) {
    case Specialness::Special: return "Special";
    case Specialness::NonSpecial: return "NonSpecial";
    default: return "Inconclusive";
  }
}

SpecialnessReport specialness_defect(const ConjugacyField& field, int samples, Rng& rng) {
  SpecialnessReport rep;
  rep.samples = samples;
  rep.noise_floor = 2 * field.tail_bound() + 1e-13;
  std::vector<PlanePoint> xs(samples);
  for (auto& x : xs) x = {uniform01(rng), uniform01(rng)};
  const LatticeVector gens[2] = {{1, 0}, {0, 1}};
  std::vector<double> defect(samples, 0.0), ujump(samples, 0.0);
  parallel_for(samples, [&](std::size_t i) {
    Vec2 h0 = field.h(xs[i]);
    for (const auto& n : gens) {
      Vec2 d = field.h(xs[i] + n.as_vec()) - h0;
      defect[i] = std::max(defect[i], norm(d));
      ujump[i] = std::max(ujump[i], std::abs(field.spec().linear.unstable_coord(d)));
    }
  });
  for (int i = 0; i < samples; ++i) {
    rep.defect = std::max(rep.defect, defect[i]);
    rep.unstable_jump = std::max(rep.unstable_jump, ujump[i]);
  }
  if (rep.defect < 3 * rep.noise_floor)
    rep.verdict = Specialness::Special;
  else if (rep.defect > 10 * rep.noise_floor)
    rep.verdict = Specialness::NonSpecial;
  else
    rep.verdict = Specialness::Inconclusive;
  return rep;
}

std::vector<double> asymptotic_commutation(const ConjugacyField& field, const PlanePoint& x,
                                           const LatticeVector& n, int m_max) {
  std::vector<double> out;
  Vec2 h0 = field.h(x);
  double scale = 1;
  for (int m = 1; m <= m_max; ++m) {
    scale *= double(std::llabs(field.spec().linear.det));
    Vec2 nm = n.as_vec() * scale;
    out.push_back(norm(field.h(x + nm) - h0));
  }
  return out;
}

std::string field_to_csv(const ConjugacyField& field) {
  std::string s = "depth,bound,residual\n";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", field.depth(), field.bound(), field.residual());
  s += buf;
  const int M = field.grid_size();
  for (int i = 0; i < M; ++i) {
    for (int j = 0; j < M; ++j) {
      std::snprintf(buf, sizeof buf, j ? ",%.17g" : "%.17g", field.hu_grid_at(i, j));
      s += buf;
    }
    s += '\n';
  }
  return s;
}

ConjugacyMap conjugacy_between(const MapSpec& f, const MapSpec& g) {
  cached_certificate(f);
  cached_certificate(g);
  return ConjugacyMap(f, g);
}

namespace {

struct PointRef {
  PlanePoint x;
  int orbit, index;
};

class PointIndex {
 public:
  explicit PointIndex(const std::vector<PeriodicOrbit>& orbits) {
    for (int o = 0; o < int(orbits.size()); ++o)
      for (int i = 0; i < int(orbits[o].points.size()); ++i) pts_.push_back({orbits[o].points[i].lift(), o, i});
  }
  const PointRef* nearest(const PlanePoint& y, double* gap) const {
    const PointRef* best = nullptr;
    double bd = 1e300;
    for (const auto& p : pts_) {
      double d = torus_distance(p.x, y);
      if (d < bd) bd = d, best = &p;
    }
    *gap = bd;
    return best;
  }

 private:
  std::vector<PointRef> pts_;
};

PeriodicMatch match_one(const ConjugacyMap& H, const PeriodicOrbit& p, const std::vector<PeriodicOrbit>& g_orbits,
                        const PointIndex& index) {
  const int n = p.period;
  const MapSpec& f = H.f();
  const MapSpec& g = H.g();
  if (p.points.empty()) throw NoConvergence("orbit has no points");
  PlanePoint y;
  if (H.identity()) {
    y = p.point.lift();
  } else {
    // Cover past of p^, then its periodic future: the g-shadow far along the
    // future converges to the g-periodic orbit on the stable leaf of H(p^).
    const int ahead = 240;
    int reps = (ahead + H.fwd() + n - 1) / n;
    ShadowWindow past = cover_window(f, p.point.lift(), H.back(), 0);
    ShadowWindow win = join_windows(f, past, periodic_window(f, p, reps));
    std::vector<PlanePoint> w = shadow(g, win);
    int k = ahead / n + (ahead % n ? 1 : 0);
    y = w[win.origin + k * n];
  }
  double gap;
  const PointRef* r = index.nearest(y, &gap);
  if (!r || gap > 1e-6)
    throw NoConvergence("no g-periodic point within 1e-6 of the shadow (gap " + std::to_string(gap) + ")");
  const PeriodicOrbit& q = g_orbits[r->orbit];
  if (q.period != n)
    throw PeriodMismatch("period " + std::to_string(n) + " matched to period " + std::to_string(q.period));
  PlanePoint z = q.points[r->index].lift();
  PlanePoint gz = z;
  for (int i = 0; i < n; ++i) gz = g.lift(gz);
  LatticeVector mq = round_lattice(gz - z);
  CosetIndex cls(f.linear.a.pow(n) - IntMat2::identity());
  if (!cls.congruent(mq, p.lattice_class))
    throw NoConvergence("matched point lies in a different lattice class");
  PeriodicMatch m;
  m.q = q;
  m.image = q.points[r->index];
  m.index = r->index;
  m.gap = gap;
  return m;
}

}  // namespace

PeriodicMatch match_periodic(const ConjugacyMap& H, const PeriodicOrbit& p, const std::vector<PeriodicOrbit>& g_orbits) {
  std::vector<PeriodicOrbit> cand;
  for (const auto& q : g_orbits)
    if (p.period % q.period == 0) cand.push_back(q);
  return match_one(H, p, cand, PointIndex(cand));
}

std::vector<PeriodicMatch> match_all(const ConjugacyMap& H, const std::vector<PeriodicOrbit>& f_orbits,
                                     const std::vector<PeriodicOrbit>& g_orbits) {
  PointIndex index(g_orbits);
  std::vector<PeriodicMatch> out(f_orbits.size());
  parallel_for(f_orbits.size(), [&](std::size_t i) { out[i] = match_one(H, f_orbits[i], g_orbits, index); });
  std::map<int, std::set<std::pair<double, double>>> seen;
  std::map<int, int> f_count, g_count;
  for (const auto& q : g_orbits) g_count[q.period]++;
  for (std::size_t i = 0; i < out.size(); ++i) {
    int n = f_orbits[i].period;
    f_count[n]++;
    if (!seen[n].insert({out[i].q.point.x1, out[i].q.point.x2}).second)
      throw PeriodMismatch("two period-" + std::to_string(n) + " orbits matched to the same g-orbit");
  }
  for (const auto& [n, c] : f_count)
    if (g_count[n] != c)
      throw PeriodMismatch("period " + std::to_string(n) + ": " + std::to_string(c) + " f-orbits but " +
                           std::to_string(g_count[n]) + " g-orbits");
  return out;
}

}  // namespace anosov
