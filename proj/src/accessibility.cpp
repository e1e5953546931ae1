#include "anosov/accessibility.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <unordered_map>

#include "json.hpp"

#include "anosov/errors.hpp"
#include "anosov/report.hpp"
#include "anosov/parallel.hpp"

namespace anosov {

namespace {

constexpr double kPi = 3.14159265358979323846;

// Diameter of a set of line angles in [0, pi): pi minus the largest circular gap.
double line_set_diameter(std::vector<double> th) {
  if (th.size() < 2) return 0.0;
  for (auto& t : th) t = std::fmod(std::fmod(t, kPi) + kPi, kPi);
  std::sort(th.begin(), th.end());
  double gap = th.front() + kPi - th.back();
  for (std::size_t i = 1; i < th.size(); ++i) gap = std::max(gap, th[i] - th[i - 1]);
  return std::max(0.0, kPi - gap);
}

}  // namespace

double spread_noise(const MapSpec& spec, int depth) {
  if (spec.is_linear()) return 1e-13;
  return direction_tail_bound(cached_certificate(spec), depth) + 1e-13;
}

double u_direction_spread(const MapSpec& spec, const TorusPoint& x, int ensemble, int depth, Rng& rng) {
  if (ensemble < 2) return 0.0;
  std::vector<PastChain> chains;
  chains.reserve(ensemble);
  for (int i = 0; i < ensemble; ++i) chains.push_back(random_chain(spec, x, depth, rng));
  std::vector<double> th(ensemble);
  parallel_for(ensemble, [&](std::size_t i) { th[i] = unstable_direction(spec, chains[i]).theta; });
  return line_set_diameter(th);
}

std::string to_string(Dichotomy d) {
  switch (d) {
    case Dichotomy::Special: return "Special";
    case Dichotomy::UAccessible: return "UAccessible";
    default: return "Inconclusive";
  }
}

DichotomyReport dichotomy_verdict(const ConjugacyField& field, Rng& rng, const DichotomyOptions& opt) {
  const MapSpec& spec = field.spec();
  DichotomyReport rep;
  rep.specialness = specialness_defect(field, opt.defect_samples, rng);
  rep.spread_noise = spread_noise(spec, opt.depth);

  const int S = opt.scan;
  std::vector<TorusPoint> xs;
  std::vector<std::vector<PastChain>> chains;
  for (int i = 0; i < S; ++i)
    for (int j = 0; j < S; ++j) {
      TorusPoint x{(i + 0.5) / S, (j + 0.5) / S};
      xs.push_back(x);
      std::vector<PastChain> cs;
      for (int e = 0; e < opt.ensemble; ++e) cs.push_back(random_chain(spec, x, opt.depth, rng));
      chains.push_back(std::move(cs));
    }
  std::vector<double> spread(xs.size());
  parallel_for(xs.size(), [&](std::size_t k) {
    std::vector<double> th;
    for (const auto& c : chains[k]) th.push_back(unstable_direction(spec, c).theta);
    spread[k] = line_set_diameter(th);
  });
  std::size_t worst = std::max_element(spread.begin(), spread.end()) - spread.begin();
  rep.max_spread = spread[worst];
  rep.min_spread = *std::min_element(spread.begin(), spread.end());
  rep.worst_point = xs[worst];

  bool spread_small = rep.max_spread < 10 * rep.spread_noise;
  bool spread_large = rep.max_spread > 100 * rep.spread_noise;
  Specialness s = rep.specialness.verdict;
  if (s == Specialness::Special && spread_small) {
    rep.verdict = Dichotomy::Special;
  } else if (s == Specialness::NonSpecial && spread_large) {
    rep.verdict = Dichotomy::UAccessible;
  } else {
    rep.verdict = Dichotomy::Inconclusive;
    char buf[256];
    std::snprintf(buf, sizeof buf, "defect %.3g (%s, floor %.3g) disagrees with spread %.3g (noise %.3g)",
                  rep.specialness.defect, to_string(s).c_str(), rep.specialness.noise_floor, rep.max_spread,
                  rep.spread_noise);
    rep.diagnostics = buf;
  }
  return rep;
}

DichotomyReport dichotomy_verdict(const MapSpec& spec, Rng& rng, const DichotomyOptions& opt) {
  return dichotomy_verdict(conjugacy_to_linear(spec, 40, 64), rng, opt);
}

std::string dichotomy_to_json(const DichotomyReport& rep) {
  Json j;
  j["verdict"] = to_string(rep.verdict);
  j["defect"] = rep.specialness.defect;
  j["defect_noise_floor"] = rep.specialness.noise_floor;
  j["defect_verdict"] = to_string(rep.specialness.verdict);
  j["max_spread"] = rep.max_spread;
  j["min_spread"] = rep.min_spread;
  j["spread_noise"] = rep.spread_noise;
  j["worst_point"] = {rep.worst_point.x1, rep.worst_point.x2};
  j["diagnostics"] = rep.diagnostics;
  return dump_json(j);
}

// ---------------------------------------------------------------------------
// Fan point

FanPoint find_fan_point(const MapSpec& spec, Rng& rng, int ensemble, int chain_length) {
  const int d = int(std::llabs(spec.linear.det));
  const int S = 12, depth = 30;
  std::vector<double> gap(S * S);
  parallel_for(S * S, [&](std::size_t k) {
    TorusPoint x{(k / S + 0.5) / S, (k % S + 0.5) / S};
    Direction a = unstable_direction(spec, make_chain(spec, x, std::vector<int>(depth, 0)));
    Direction b = unstable_direction(spec, make_chain(spec, x, std::vector<int>(depth, d - 1)));
    gap[k] = angular_distance(a, b);
  });
  std::size_t best = std::max_element(gap.begin(), gap.end()) - gap.begin();
  FanPoint fan;
  fan.x = {(best / S + 0.5) / S, (best % S + 0.5) / S};

  // Refine over random pasts plus the two extremes.
  std::vector<PastChain> cs;
  cs.push_back(make_chain(spec, fan.x, std::vector<int>(chain_length, 0)));
  cs.push_back(make_chain(spec, fan.x, std::vector<int>(chain_length, d - 1)));
  for (int e = 0; e < ensemble; ++e) cs.push_back(random_chain(spec, fan.x, chain_length, rng));
  std::vector<Direction> dirs(cs.size());
  parallel_for(cs.size(), [&](std::size_t i) { dirs[i] = unstable_direction(spec, cs[i]); });
  std::size_t ia = 0, ib = 1;
  double top = -1;
  for (std::size_t i = 0; i < cs.size(); ++i)
    for (std::size_t j = i + 1; j < cs.size(); ++j) {
      double g = angular_distance(dirs[i], dirs[j]);
      if (g > top) top = g, ia = i, ib = j;
    }
  fan.alpha = cs[ia];
  fan.beta = cs[ib];
  fan.angle = top;
  return fan;
}

// ---------------------------------------------------------------------------
// Path search

double UPath::max_gap() const {
  double g = std::max(source_gap, target_gap);
  for (const auto& j : junctions) g = std::max(g, j.gap);
  return g;
}

double max_cone_slope(const MapSpec& spec, const LeafSegment& seg) {
  double m = 0;
  for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
    Vec2 e = seg.points[i + 1] - seg.points[i];
    double u = std::abs(spec.linear.unstable_coord(e) * norm(spec.linear.e_u));
    double s = std::abs(spec.linear.stable_coord(e) * norm(spec.linear.e_s));
    if (u > 0) m = std::max(m, s / u);
  }
  return m;
}

namespace {

struct Crossing {
  double s_a, s_b;
  LatticeVector shift;  // A(s_a) ~ B(s_b) + shift
};

// Edge hash of a polyline reduced to the torus.
class EdgeHash {
 public:
  EdgeHash(const LeafSegment& seg, int cells) : G_(cells) {
    for (std::size_t i = 0; i + 1 < seg.size(); ++i) {
      PlanePoint a = project(seg.points[i]).lift();
      PlanePoint b = a + (seg.points[i + 1] - seg.points[i]);
      for_cells(a, b, [&](long key) { map_[key].push_back(std::uint32_t(i)); });
    }
  }

  template <class Fn>
  void for_cells(const PlanePoint& a, const PlanePoint& b, Fn&& fn) const {
    int i0 = int(std::floor(std::min(a.x1, b.x1) * G_)), i1 = int(std::floor(std::max(a.x1, b.x1) * G_));
    int j0 = int(std::floor(std::min(a.x2, b.x2) * G_)), j1 = int(std::floor(std::max(a.x2, b.x2) * G_));
    for (int i = i0; i <= i1; ++i)
      for (int j = j0; j <= j1; ++j) fn(long(((i % G_) + G_) % G_) * G_ + ((j % G_) + G_) % G_);
  }

  const std::vector<std::uint32_t>* at(long key) const {
    auto it = map_.find(key);
    return it == map_.end() ? nullptr : &it->second;
  }

 private:
  int G_;
  std::unordered_map<long, std::vector<std::uint32_t>> map_;
};

// Parameters (u, v) in [0,1]^2 with p0 + u (p1 - p0) = q0 + v (q1 - q0).
bool segments_cross(const PlanePoint& p0, const PlanePoint& p1, const PlanePoint& q0, const PlanePoint& q1,
                    double* u, double* v) {
  Vec2 r = p1 - p0, s = q1 - q0;
  double den = cross(r, s);
  if (std::abs(den) < 1e-300) return false;
  Vec2 w = q0 - p0;
  *u = cross(w, s) / den;
  *v = cross(w, r) / den;
  return *u >= 0 && *u <= 1 && *v >= 0 && *v <= 1;
}

std::vector<Crossing> crossings(const UnstableSegment& A, const UnstableSegment& B) {
  const int G = 64;
  EdgeHash hash(A.leaf, G);
  std::vector<Crossing> out;
  const LeafSegment& b = B.leaf;
  std::vector<std::uint32_t> seen;
  for (std::size_t j = 0; j + 1 < b.size(); ++j) {
    seen.clear();
    PlanePoint q0 = project(b.points[j]).lift();
    PlanePoint q1 = q0 + (b.points[j + 1] - b.points[j]);
    hash.for_cells(q0, q1, [&](long key) {
      const auto* cand = hash.at(key);
      if (!cand) return;
      for (std::uint32_t i : *cand) {
        if (std::find(seen.begin(), seen.end(), i) != seen.end()) continue;
        seen.push_back(i);
        PlanePoint p0 = project(A.leaf.points[i]).lift();
        PlanePoint p1 = p0 + (A.leaf.points[i + 1] - A.leaf.points[i]);
        LatticeVector sh = round_lattice(p0 - q0);
        double u, v;
        if (!segments_cross(p0, p1, q0 + sh.as_vec(), q1 + sh.as_vec(), &u, &v)) continue;
        Crossing c;
        c.s_a = A.seed_s[i] + u * (A.seed_s[i + 1] - A.seed_s[i]);
        c.s_b = B.seed_s[j] + v * (B.seed_s[j + 1] - B.seed_s[j]);
        PlanePoint pa = A.leaf.points[i] + (A.leaf.points[i + 1] - A.leaf.points[i]) * u;
        PlanePoint pb = b.points[j] + (b.points[j + 1] - b.points[j]) * v;
        c.shift = round_lattice(pa - pb);
        out.push_back(c);
      }
    });
  }
  return out;
}

// Newton on A(s_a) - B(s_b) - shift = 0.
bool polish(const UnstableSegment& A, const UnstableSegment& B, Crossing c, UJunction* out) {
  const double lim_a = 8 * A.param->seed_halflength(), lim_b = 8 * B.param->seed_halflength();
  double sa = c.s_a, sb = c.s_b, gap = 1e300;
  PlanePoint pa;
  for (int it = 0; it < 20; ++it) {
    Vec2 da, db;
    pa = A.param->eval(sa, &da);
    PlanePoint pb = B.param->eval(sb, &db);
    Vec2 r = pa - pb - c.shift.as_vec();
    gap = norm(r);
    if (gap < 1e-14) break;
    double det = -da.x1 * db.x2 + db.x1 * da.x2;
    if (std::abs(det) < 1e-300) return false;
    // [da, -db] (dsa, dsb) = -r
    double dsa = (-r.x1 * -db.x2 - -db.x1 * -r.x2) / det;
    double dsb = (da.x1 * -r.x2 - da.x2 * -r.x1) / det;
    sa += dsa;
    sb += dsb;
    if (std::abs(sa) > lim_a || std::abs(sb) > lim_b) return false;
  }
  pa = A.param->eval(sa);
  gap = norm(pa - B.param->eval(sb) - c.shift.as_vec());
  out->s_a = sa;
  out->s_b = sb;
  out->point = pa;
  out->gap = gap;
  return true;
}

// Best polished junction between two segments, restricted to the parts of
// the leaves of radius R (the polyline) so segment lengths stay bounded.
bool best_junction(const UnstableSegment& A, const UnstableSegment& B, int ia, int ib, UJunction* out,
                   double* best_gap) {
  bool found = false;
  for (const Crossing& c : crossings(A, B)) {
    UJunction j;
    if (!polish(A, B, c, &j)) continue;
    double sa_lo = A.seed_s.front(), sa_hi = A.seed_s.back();
    double sb_lo = B.seed_s.front(), sb_hi = B.seed_s.back();
    if (j.s_a < std::min(sa_lo, sa_hi) || j.s_a > std::max(sa_lo, sa_hi)) continue;
    if (j.s_b < std::min(sb_lo, sb_hi) || j.s_b > std::max(sb_lo, sb_hi)) continue;
    *best_gap = std::min(*best_gap, j.gap);
    if (!found || j.gap < out->gap) {
      j.seg_a = ia;
      j.seg_b = ib;
      *out = j;
      found = true;
    }
  }
  return found;
}

}  // namespace

UPathFinder::UPathFinder(const MapSpec& spec, Rng& rng, int ensemble, const UPathOptions& opt)
    : spec_(spec), ensemble_(std::max(1, ensemble)), opt_(opt) {
  dich_ = dichotomy_verdict(spec_, rng);
  if (dich_.verdict == Dichotomy::Special)
    throw SpecialMap("map is special: unstable directions do not depend on the past");
  fan_ = find_fan_point(spec_, rng, 24, opt_.chain_length);
}

UPath UPathFinder::find(const TorusPoint& from, const TorusPoint& to, double radius, Rng& rng) const {
  UPath path;
  path.junction_tol = opt_.junction_tol;
  if (torus_distance(from.lift(), to.lift()) == 0.0) return path;

  const double tol = opt_.junction_tol;
  double best_gap = 1e300;
  int attempts = 0;
  for (double R = radius; R <= opt_.max_radius * (1 + 1e-12); R *= 2) {
    UnstableSegment Sa = unstable_segment(spec_, fan_.alpha, R, opt_.step);
    UnstableSegment Sb = unstable_segment(spec_, fan_.beta, R, opt_.step);
    for (int e = 0; e < ensemble_; ++e) {
      ++attempts;
      UnstableSegment W1 = unstable_segment(spec_, random_chain(spec_, from, opt_.chain_length, rng), R, opt_.step);
      UnstableSegment W4 = unstable_segment(spec_, random_chain(spec_, to, opt_.chain_length, rng), R, opt_.step);

      auto ok = [&](bool found, const UJunction& j) { return found && j.gap < tol; };
      UJunction j14, j1a, j1b, ja4, jb4;
      if (ok(best_junction(W1, W4, 0, 1, &j14, &best_gap), j14)) {
        path.segments = {W1, W4};
        path.junctions = {j14};
      } else {
        bool f1a = ok(best_junction(W1, Sa, 0, 1, &j1a, &best_gap), j1a);
        bool f1b = ok(best_junction(W1, Sb, 0, 1, &j1b, &best_gap), j1b);
        bool fa4 = ok(best_junction(Sa, W4, 1, 2, &ja4, &best_gap), ja4);
        bool fb4 = ok(best_junction(Sb, W4, 1, 2, &jb4, &best_gap), jb4);
        UJunction fan_j;
        fan_j.point = Sa.param->base();
        fan_j.gap = torus_distance(Sa.param->base(), Sb.param->base());
        if (f1a && fa4) {
          path.segments = {W1, Sa, W4};
          path.junctions = {j1a, ja4};
        } else if (f1b && fb4) {
          path.segments = {W1, Sb, W4};
          path.junctions = {j1b, jb4};
        } else if (f1a && fb4) {
          fan_j.seg_a = 1, fan_j.seg_b = 2;
          jb4.seg_a = 2, jb4.seg_b = 3;
          path.segments = {W1, Sa, Sb, W4};
          path.junctions = {j1a, fan_j, jb4};
        } else if (f1b && fa4) {
          fan_j.seg_a = 1, fan_j.seg_b = 2;
          ja4.seg_a = 2, ja4.seg_b = 3;
          path.segments = {W1, Sb, Sa, W4};
          path.junctions = {j1b, fan_j, ja4};
        }
      }
      if (!path.segments.empty()) {
        path.radius = R;
        path.attempts = attempts;
        path.source_gap = torus_distance(path.segments.front().param->base(), from.lift());
        path.target_gap = torus_distance(path.segments.back().param->base(), to.lift());
        return path;
      }
    }
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "no u-path within radius %.3g after %d attempts (best junction gap %.3g)",
                opt_.max_radius, attempts, best_gap);
  throw SearchExhausted(buf);
}

UPath find_u_path(const MapSpec& spec, const TorusPoint& from, const TorusPoint& to, double radius, int ensemble,
                  Rng& rng, const UPathOptions& opt) {
  if (torus_distance(from.lift(), to.lift()) == 0.0) {
    UPath p;
    p.junction_tol = opt.junction_tol;
    return p;
  }
  UPathFinder finder(spec, rng, ensemble, opt);
  return finder.find(from, to, radius, rng);
}

std::string upath_to_csv(const UPath& path) {
  std::string s = "segment,t,x1,x2\n";
  char buf[128];
  for (std::size_t k = 0; k < path.segments.size(); ++k) {
    const LeafSegment& L = path.segments[k].leaf;
    for (std::size_t i = 0; i < L.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.17g\n", k, L.t[i], L.points[i].x1, L.points[i].x2);
      s += buf;
    }
  }
  return s;
}

std::string upath_to_json(const UPath& path) {
  Json j;
  j["segments"] = path.segments.size();
  j["radius"] = path.radius;
  j["junction_tol"] = path.junction_tol;
  j["source_gap"] = path.source_gap;
  j["target_gap"] = path.target_gap;
  j["attempts"] = path.attempts;
  Json js = Json::array();
  for (const auto& u : path.junctions) {
    TorusPoint p = project(u.point);
    js.push_back({{"from_segment", u.seg_a}, {"to_segment", u.seg_b}, {"point", {p.x1, p.x2}}, {"gap", u.gap}});
  }
  j["junctions"] = js;
  Json bases = Json::array();
  for (const auto& seg : path.segments) {
    TorusPoint b = project(seg.param->base());
    Json br = seg.leaf.past ? Json(seg.leaf.past->branches)
                                              : Json::array();
    bases.push_back({{"base", {b.x1, b.x2}}, {"branches", br}});
  }
  j["segment_pasts"] = bases;
  return dump_json(j);
}

}  // namespace anosov
