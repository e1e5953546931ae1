#include "anosov/periodic.hpp"

#include <Eigen/Dense>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "anosov/errors.hpp"
#include "anosov/parallel.hpp"
#include "json.hpp"

namespace anosov {

std::int64_t periodic_count(const IntMat2& a, int n) {
  std::int64_t d = (a.pow(n) - IntMat2::identity()).det();
  return d < 0 ? -d : d;
}

std::int64_t primitive_orbit_count(const IntMat2& a, int n) {
  auto mobius = [](int k) {
    int mu = 1;
    for (int p = 2; p * p <= k; ++p) {
      if (k % p) continue;
      k /= p;
      if (k % p == 0) return 0;
      mu = -mu;
    }
    if (k > 1) mu = -mu;
    return mu;
  };
  std::int64_t s = 0;
  for (int d = 1; d <= n; ++d)
    if (n % d == 0) s += mobius(n / d) * periodic_count(a, d);
  return s / n;
}

namespace {

struct Shooting {
  std::vector<PlanePoint> t;      // reduced orbit points
  std::vector<LatticeVector> j;   // F(t_i) = t_{i+1} + j_i
};

// Linear periodic orbit of class m with exact rational arithmetic:
// x* = (A^n - I)^-1 m has denominator D = |det(A^n - I)|.
Shooting linear_seed(const IntMat2& a, int n, const LatticeVector& m) {
  IntMat2 B = a.pow(n) - IntMat2::identity();
  std::int64_t det = B.det();
  std::int64_t D = det < 0 ? -det : det;
  std::int64_t sgn = det < 0 ? -1 : 1;
  // adj(B) m / det
  LatticeVector num{sgn * (B.d * m.n1 - B.b * m.n2), sgn * (-B.c * m.n1 + B.a * m.n2)};
  auto fmod = [D](std::int64_t v) {
    std::int64_t r = v % D;
    return r < 0 ? r + D : r;
  };
  Shooting s;
  LatticeVector r{fmod(num.n1), fmod(num.n2)};
  for (int i = 0; i < n; ++i) {
    s.t.push_back({double(r.n1) / double(D), double(r.n2) / double(D)});
    LatticeVector ar = a * r;
    LatticeVector rn{fmod(ar.n1), fmod(ar.n2)};
    s.j.push_back({(ar.n1 - rn.n1) / D, (ar.n2 - rn.n2) / D});
    r = rn;
  }
  return s;
}

double shooting_residual(const MapSpec& spec, const Shooting& s, Eigen::VectorXd* res,
                         Eigen::MatrixXd* jac) {
  const int n = int(s.t.size());
  if (res) res->setZero(2 * n);
  if (jac) jac->setZero(2 * n, 2 * n);
  double mx = 0;
  for (int i = 0; i < n; ++i) {
    int k = (i + 1) % n;
    PlanePoint fx;
    Mat2 df;
    spec.lift_and_jacobian(s.t[i], fx, df);
    Vec2 r = fx - s.t[k] - s.j[i].as_vec();
    mx = std::max(mx, std::max(std::abs(r.x1), std::abs(r.x2)));
    if (res) {
      (*res)(2 * i) = r.x1;
      (*res)(2 * i + 1) = r.x2;
    }
    if (jac) {
      (*jac)(2 * i, 2 * i) += df.a;
      (*jac)(2 * i, 2 * i + 1) += df.b;
      (*jac)(2 * i + 1, 2 * i) += df.c;
      (*jac)(2 * i + 1, 2 * i + 1) += df.d;
      (*jac)(2 * i, 2 * k) -= 1;
      (*jac)(2 * i + 1, 2 * k + 1) -= 1;
    }
  }
  return mx;
}

bool shooting_newton(const MapSpec& spec, Shooting& s, std::vector<double>* trace) {
  const int n = int(s.t.size());
  Eigen::VectorXd r;
  Eigen::MatrixXd J;
  for (int it = 0; it < 80; ++it) {
    double rn = shooting_residual(spec, s, &r, &J);
    if (trace) trace->push_back(rn);
    if (rn < 1e-13) return true;
    Eigen::VectorXd step = J.partialPivLu().solve(r);
    double lam = 1.0;
    Shooting trial = s;
    for (int h = 0; h < 30; ++h) {
      for (int i = 0; i < n; ++i) trial.t[i] = s.t[i] - Vec2{step(2 * i), step(2 * i + 1)} * lam;
      if (shooting_residual(spec, trial, nullptr, nullptr) < rn || h == 29) break;
      lam *= 0.5;
    }
    s = trial;
  }
  return shooting_residual(spec, s, nullptr, nullptr) < 1e-13;
}

}  // namespace

PeriodicPoint solve_periodic_class(const MapSpec& spec, int n, const LatticeVector& m) {
  Shooting s = linear_seed(spec.linear.a, n, m);
  Shooting seed = s;
  std::vector<double> trace;
  bool ok = spec.is_linear() || shooting_newton(spec, s, &trace);
  if (!ok) {
    // Continuation from the half-amplitude orbit of the same class.
    s = seed;
    ok = shooting_newton(spec.scaled(0.5), s, nullptr) && shooting_newton(spec, s, nullptr);
  }
  if (!ok) {
    std::ostringstream os;
    os << "periodic Newton failed for n=" << n << " class (" << m.n1 << "," << m.n2 << "); trace:";
    for (double v : trace) os << " " << v;
    throw NewtonDivergence(os.str());
  }
  PeriodicPoint p;
  p.point = project(s.t[0]);
  p.lattice_class = m;
  p.min_period = n;
  for (int q = 1; q < n; ++q) {
    if (n % q) continue;
    if (torus_distance(s.t[q], s.t[0]) < 1e-9) {
      p.min_period = q;
      break;
    }
  }
  return p;
}

double orbit_jacobian(const MapSpec& spec, const PeriodicOrbit& orbit) {
  std::vector<TorusPoint> pts = orbit.points;
  if (pts.empty()) {
    TorusPoint x = orbit.point;
    for (int i = 0; i < orbit.period; ++i) {
      pts.push_back(x);
      x = spec.map(x);
    }
  }
  double s = 0;
  for (const auto& x : pts) s += std::log(std::abs(spec.jacobian(x.lift()).det()));
  return s;
}

PeriodicOrbit make_orbit(const MapSpec& spec, const TorusPoint& x, int period) {
  std::vector<TorusPoint> pts;
  TorusPoint z = x;
  for (int i = 0; i < period; ++i) {
    pts.push_back(z);
    z = spec.map(z);
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].x1 < pts[best].x1 || (pts[i].x1 == pts[best].x1 && pts[i].x2 < pts[best].x2)) best = i;
  std::rotate(pts.begin(), pts.begin() + best, pts.end());
  PeriodicOrbit o;
  o.point = pts[0];
  o.period = period;
  o.points = pts;
  PlanePoint y = pts[0].lift();
  for (int i = 0; i < period; ++i) y = spec.lift(y);
  o.lattice_class = round_lattice(y - pts[0].lift());
  Exponents e = periodic_exponents(spec, o);
  o.lambda_s = e.lambda_s;
  o.lambda_u = e.lambda_u;
  o.log_jac = orbit_jacobian(spec, o);
  return o;
}

PeriodicEnumeration enumerate_periodic(const MapSpec& spec, int n, std::int64_t budget) {
  if (n < 1) throw std::invalid_argument("period must be >= 1");
  std::int64_t count = periodic_count(spec.linear.a, n);
  if (count > budget)
    throw BudgetExceeded("|det(A^" + std::to_string(n) + " - I)| = " + std::to_string(count) +
                         " exceeds the budget " + std::to_string(budget));
  CosetIndex classes(spec.linear.a.pow(n) - IntMat2::identity());
  const auto& reps = classes.reps();
  PeriodicEnumeration out;
  out.n = n;
  out.points.resize(reps.size());
  parallel_for(reps.size(), [&](std::size_t i) { out.points[i] = solve_periodic_class(spec, n, reps[i]); });

  // Group into orbits by linking every point to the enumerated point nearest
  // its image; cycles of the link are the orbits.
  const std::size_t np = out.points.size();
  const int G = 1024;
  auto cell = [&](const TorusPoint& p) {
    return std::pair<int, int>{std::min(G - 1, int(p.x1 * G)), std::min(G - 1, int(p.x2 * G))};
  };
  std::map<std::pair<int, int>, std::vector<std::size_t>> grid;
  for (std::size_t i = 0; i < np; ++i) grid[cell(out.points[i].point)].push_back(i);
  std::vector<std::size_t> next(np);
  parallel_for(np, [&](std::size_t i) {
    TorusPoint y = spec.map(out.points[i].point);
    auto [cx, cy] = cell(y);
    double best = INFINITY;
    std::size_t arg = i;
    for (int dx = -1; dx <= 1; ++dx)
      for (int dy = -1; dy <= 1; ++dy) {
        auto it = grid.find({(cx + dx + G) % G, (cy + dy + G) % G});
        if (it == grid.end()) continue;
        for (std::size_t k : it->second) {
          double d = torus_distance(out.points[k].point.lift(), y.lift());
          if (d < best) best = d, arg = k;
        }
      }
    if (best > 1e-8) throw NoConvergence("image of a periodic point is not in the enumeration");
    next[i] = arg;
  });
  auto less = [&](std::size_t a, std::size_t b) {
    const TorusPoint &p = out.points[a].point, &q = out.points[b].point;
    return p.x1 < q.x1 || (p.x1 == q.x1 && p.x2 < q.x2);
  };
  std::vector<std::size_t> heads;
  for (std::size_t i = 0; i < np; ++i) {
    bool least = true;
    std::size_t k = next[i];
    for (int step = 1; step < out.points[i].min_period; ++step, k = next[k])
      if (less(k, i)) least = false;
    if (k != i) throw NoConvergence("periodic point links do not close up");
    if (least) heads.push_back(i);
  }
  out.orbits.resize(heads.size());
  parallel_for(heads.size(), [&](std::size_t h) {
    std::size_t i = heads[h];
    PeriodicOrbit o;
    o.period = out.points[i].min_period;
    std::size_t k = i;
    for (int step = 0; step < o.period; ++step, k = next[k]) o.points.push_back(out.points[k].point);
    o.point = o.points[0];
    PlanePoint y = o.point.lift();
    for (int step = 0; step < o.period; ++step) y = spec.lift(y);
    o.lattice_class = round_lattice(y - o.point.lift());
    Exponents e = periodic_exponents(spec, o);
    o.lambda_s = e.lambda_s;
    o.lambda_u = e.lambda_u;
    o.log_jac = orbit_jacobian(spec, o);
    out.orbits[h] = o;
  });
  std::sort(out.orbits.begin(), out.orbits.end(), [](const PeriodicOrbit& a, const PeriodicOrbit& b) {
    if (a.period != b.period) return a.period < b.period;
    if (a.point.x1 != b.point.x1) return a.point.x1 < b.point.x1;
    return a.point.x2 < b.point.x2;
  });
  return out;
}

// ---------------------------------------------------------------------------
// Orbit database

using nlohmann::json;

std::string orbit_to_json_line(const PeriodicOrbit& o) {
  char buf[512];
  std::snprintf(buf, sizeof buf,
                "{\"period\": %d, \"class\": [%lld, %lld], \"point\": [%.17g, %.17g], "
                "\"lambda_s\": %.17g, \"lambda_u\": %.17g, \"log_jac\": %.17g}",
                o.period, (long long)o.lattice_class.n1, (long long)o.lattice_class.n2, o.point.x1,
                o.point.x2, o.lambda_s, o.lambda_u, o.log_jac);
  return buf;
}

PeriodicOrbit orbit_from_json_line(const std::string& line) {
  json j = json::parse(line);
  PeriodicOrbit o;
  o.period = j.at("period").get<int>();
  o.lattice_class = {j.at("class")[0].get<std::int64_t>(), j.at("class")[1].get<std::int64_t>()};
  o.point = {j.at("point")[0].get<double>(), j.at("point")[1].get<double>()};
  o.lambda_s = j.at("lambda_s").get<double>();
  o.lambda_u = j.at("lambda_u").get<double>();
  o.log_jac = j.at("log_jac").get<double>();
  return o;
}

OrbitDb::OrbitDb(std::string dir, const MapSpec& spec) : dir_(std::move(dir)), spec_(spec) {
  path_ = (std::filesystem::path(dir_) / ("orbits-" + content_hash(map_spec_to_json(spec)) + ".jsonl")).string();
  load();
}

void OrbitDb::load() {
  std::ifstream in(path_);
  if (!in) return;
  std::string line;
  std::map<int, std::vector<PeriodicOrbit>> tmp;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    try {
      tmp[0].push_back(orbit_from_json_line(line));
    } catch (const std::exception&) {
      break;  // torn final line from an interrupted writer
    }
  }
  for (auto& o : tmp[0]) by_period_[o.period].push_back(o);
  // A period counts as present only when complete.
  for (auto it = by_period_.begin(); it != by_period_.end();) {
    if (std::int64_t(it->second.size()) != primitive_orbit_count(spec_.linear.a, it->first))
      it = by_period_.erase(it);
    else
      ++it;
  }
  for (auto& [p, list] : by_period_)
    for (auto& o : list) rebuild_points(o);
}

// Orbit points are not stored. Fresh and reloaded orbits both get them by
// iterating from the stored point, so reruns see identical data.
void OrbitDb::rebuild_points(PeriodicOrbit& o) const {
  TorusPoint z = o.point;
  o.points.clear();
  for (int i = 0; i < o.period; ++i) {
    o.points.push_back(z);
    z = spec_.map(z);
  }
}

void OrbitDb::append(const std::vector<PeriodicOrbit>& orbits) {
  if (dir_.empty()) return;
  std::filesystem::create_directories(dir_);
  std::ofstream out(path_, std::ios::app);
  for (const auto& o : orbits) out << orbit_to_json_line(o) << "\n";
}

std::vector<PeriodicOrbit> OrbitDb::orbits_of_period(int p) {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_period_.find(p);
  if (it != by_period_.end()) return it->second;
  PeriodicEnumeration e = enumerate_periodic(spec_, p);
  std::vector<PeriodicOrbit> list;
  for (const auto& o : e.orbits)
    if (o.period == p) list.push_back(o);
  if (std::int64_t(list.size()) != primitive_orbit_count(spec_.linear.a, p))
    throw NoConvergence("period " + std::to_string(p) + ": found " + std::to_string(list.size()) +
                        " primitive orbits, expected " +
                        std::to_string(primitive_orbit_count(spec_.linear.a, p)));
  append(list);
  for (auto& o : list) rebuild_points(o);
  by_period_[p] = list;
  return list;
}

std::vector<PeriodicOrbit> OrbitDb::orbits_up_to(int max_period) {
  std::vector<PeriodicOrbit> all;
  for (int p = 1; p <= max_period; ++p) {
    auto list = orbits_of_period(p);
    all.insert(all.end(), list.begin(), list.end());
  }
  return all;
}

}  // namespace anosov
