#include "joinlab/indicator.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>
#include <thread>

namespace joinlab {

namespace {

constexpr double kGolden = 0.6180339887498949;

double median(std::vector<double> v) {
  if (v.empty()) return 0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

Eigen::VectorXd unit_from_angle(double phi) {
  Eigen::VectorXd v(2);
  v << std::cos(phi), std::sin(phi);
  return v;
}

// Golden-section maximum of f over [lo, hi].
template <class F>
std::pair<double, double> golden_max(F&& f, double lo, double hi, int iters = 40) {
  if (!(hi > lo)) return {lo, f(lo)};
  double a = lo, b = hi;
  double x1 = b - kGolden * (b - a);
  double x2 = a + kGolden * (b - a);
  double f1 = f(x1), f2 = f(x2);
  for (int i = 0; i < iters && b - a > 1e-10; ++i) {
    if (f1 < f2) {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + kGolden * (b - a);
      f2 = f(x2);
    } else {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - kGolden * (b - a);
      f1 = f(x1);
    }
  }
  const double x = 0.5 * (a + b);
  return {x, f(x)};
}

// 2-D convex hull, counter-clockwise (Andrew monotone chain).
std::vector<Eigen::Vector2d> convex_hull_2d(std::vector<Eigen::Vector2d> pts) {
  std::sort(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
    return a.x() != b.x() ? a.x() < b.x() : a.y() < b.y();
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const auto& a, const auto& b) {
                          return a.x() == b.x() && a.y() == b.y();
                        }),
            pts.end());
  const size_t n = pts.size();
  if (n < 3) return pts;
  auto cross = [](const Eigen::Vector2d& o, const Eigen::Vector2d& a,
                  const Eigen::Vector2d& b) {
    return (a.x() - o.x()) * (b.y() - o.y()) - (a.y() - o.y()) * (b.x() - o.x());
  };
  std::vector<Eigen::Vector2d> hull(2 * n);
  size_t m = 0;
  for (size_t i = 0; i < n; ++i) {
    while (m >= 2 && cross(hull[m - 2], hull[m - 1], pts[i]) <= 0) --m;
    hull[m++] = pts[i];
  }
  const size_t lower = m + 1;
  for (size_t i = n - 1; i-- > 0;) {
    while (m >= lower && cross(hull[m - 2], hull[m - 1], pts[i]) <= 0) --m;
    hull[m++] = pts[i];
  }
  hull.resize(m - 1);
  return hull;
}

bool inside_convex(const std::vector<Eigen::Vector2d>& poly, const Eigen::Vector2d& p) {
  const size_t n = poly.size();
  if (n < 3) return false;
  for (size_t i = 0; i < n; ++i) {
    const auto& a = poly[i];
    const auto& b = poly[(i + 1) % n];
    const double c =
        (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
    if (c < 0) return false;
  }
  return true;
}

Eigen::VectorXd simplex_to_direction(const Eigen::Vector2d& w) {
  Eigen::VectorXd v(3);
  v << w.x(), w.y(), 1.0 - w.x() - w.y();
  if (v.minCoeff() <= 0) v = v.cwiseMax(1e-9);
  return v.normalized();
}

int resolve_threads(int threads) {
  if (threads > 0) return threads;
  const unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

std::optional<DirectionSample> try_growth_indicator(
    const OrbitDataset& data, const Eigen::VectorXd& v,
    const std::vector<double>& eps_schedule, const EstimatorParams& params) {
  const int k = data.k();
  if (v.size() != k) throw DomainError("direction dimension mismatch");
  std::vector<double> eps = eps_schedule;
  std::sort(eps.begin(), eps.end(), std::greater<double>());
  if (eps.empty()) throw DomainError("empty eps schedule");

  const Eigen::VectorXd u = v.normalized();
  std::vector<double> cos_eps(eps.size());
  for (size_t j = 0; j < eps.size(); ++j) cos_eps[j] = std::cos(eps[j]);

  // One scan: for every point, the largest j (smallest eps) it belongs to;
  // cone membership is nested along the schedule.
  std::vector<std::vector<double>> shells(eps.size());
  const size_t n = data.size();
  for (size_t i = 0; i < n; ++i) {
    const double nm = data.norm[i];
    if (nm <= 0) continue;
    double dot = 0;
    for (int c = 0; c < k; ++c) dot += data.mu[c][i] * u[c];
    if (dot <= cos_eps[0] * nm) continue;
    size_t j = 0;
    while (j + 1 < eps.size() && dot > cos_eps[j + 1] * nm) ++j;
    shells[j].push_back(nm);
  }

  // Cumulative counts from the smallest eps outward.
  std::optional<DirectionSample> best;
  std::vector<double> values;
  for (size_t j = eps.size(); j-- > 0;) {
    // values for eps[j'] with j' <= j are shells[0..j'] merged; build from
    // the largest cone down so each smaller cone reuses nothing stale.
    values.clear();
    size_t total = 0;
    for (size_t t = 0; t <= j; ++t) total += shells[t].size();
    values.reserve(total);
    for (size_t t = 0; t <= j; ++t)
      values.insert(values.end(), shells[t].begin(), shells[t].end());
    if (values.size() < std::max(params.min_samples, params.t0_rank + 5)) continue;
    try {
      ExponentEstimate est = abscissa_estimate(values, params);
      DirectionSample s;
      s.v = u;
      s.psi = est.value;
      s.stderr_ = est.stderr_;
      s.eps_used = eps[j];
      s.samples = est.samples;
      s.ok = true;
      best = s;
      break;  // smallest feasible eps wins
    } catch (const InsufficientDataError&) {
      continue;
    }
  }
  return best;
}

}  // namespace

ConeEstimate limit_cone_estimate(const OrbitDataset& data,
                                 const std::vector<ConjugacyClassEntry>& classes,
                                 double norm_floor) {
  const int k = data.k();
  ConeEstimate cone;
  cone.k = k;
  if (norm_floor <= 0) {
    norm_floor = median(data.norm);
  }
  cone.norm_floor = norm_floor;

  if (k == 2) {
    double smin = std::numeric_limits<double>::infinity();
    double smax = -std::numeric_limits<double>::infinity();
    size_t used = 0;
    for (size_t i = 0; i < data.size(); ++i) {
      if (data.norm[i] < norm_floor || data.mu[0][i] <= 0) continue;
      const double s = data.mu[1][i] / data.mu[0][i];
      smin = std::min(smin, s);
      smax = std::max(smax, s);
      ++used;
    }
    if (used == 0) throw InsufficientDataError("no orbit points above the norm floor");
    cone.points_used = used;
    cone.slope_min = smin;
    cone.slope_max = smax;

    double dmin = std::numeric_limits<double>::infinity();
    double dmax = -std::numeric_limits<double>::infinity();
    for (const auto& c : classes) {
      if (c.lengths[0] <= 0) continue;
      const double r = c.lengths[1] / c.lengths[0];
      dmin = std::min(dmin, r);
      dmax = std::max(dmax, r);
    }
    cone.d_minus = classes.empty() ? 0.0 : dmin;
    cone.d_plus = classes.empty() ? 0.0 : dmax;
    cone.class_count = classes.size();

    const double lo = cone.angle_min(), hi = cone.angle_max();
    for (double t : {0.25, 0.5, 0.75})
      cone.sample_directions.push_back(unit_from_angle(lo + t * (hi - lo)));
  } else if (k == 3) {
    std::vector<Eigen::Vector2d> pts;
    size_t used = 0;
    for (size_t i = 0; i < data.size(); ++i) {
      if (data.norm[i] < norm_floor) continue;
      const double s = data.mu[0][i] + data.mu[1][i] + data.mu[2][i];
      if (s <= 0) continue;
      pts.emplace_back(data.mu[0][i] / s, data.mu[1][i] / s);
      ++used;
    }
    if (used == 0) throw InsufficientDataError("no orbit points above the norm floor");
    cone.points_used = used;
    auto hull = convex_hull_2d(std::move(pts));
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& p : hull) centroid += p;
    if (!hull.empty()) centroid /= static_cast<double>(hull.size());
    for (const auto& p : hull) cone.hull.push_back(simplex_to_direction(p));
    cone.sample_directions.push_back(simplex_to_direction(centroid));
    for (const auto& p : hull)
      cone.sample_directions.push_back(
          simplex_to_direction(centroid + 0.5 * (p - centroid)));
    cone.class_count = classes.size();
  } else {
    // Single factor: the cone is the half line.
    cone.points_used = data.size();
    cone.sample_directions.push_back(Eigen::VectorXd::Ones(1));
  }
  return cone;
}

DirectionSample growth_indicator(const OrbitDataset& data, const Eigen::VectorXd& v,
                                 const std::vector<double>& eps_schedule,
                                 const EstimatorParams& params) {
  auto s = try_growth_indicator(data, v, eps_schedule, params);
  if (!s)
    throw InsufficientDataError(
        "cone around the requested direction holds too few orbit points");
  return *s;
}

double GrowthIndicatorProfile::psi_hat(double phi) const {
  // piecewise linear over ok grid nodes, clamped at the ends
  const size_t n = grid.size();
  double prev_angle = 0, prev_val = 0;
  bool have_prev = false;
  for (size_t i = 0; i < n; ++i) {
    if (!grid[i].ok) continue;
    const double a = std::atan2(grid[i].v[1], grid[i].v[0]);
    if (!have_prev) {
      if (phi <= a) return grid[i].psi;
      prev_angle = a;
      prev_val = grid[i].psi;
      have_prev = true;
      continue;
    }
    if (phi <= a) {
      const double t = (phi - prev_angle) / (a - prev_angle);
      return prev_val + t * (grid[i].psi - prev_val);
    }
    prev_angle = a;
    prev_val = grid[i].psi;
  }
  return prev_val;
}

double GrowthIndicatorProfile::stderr_hat(double phi) const {
  const size_t n = grid.size();
  double prev_angle = 0, prev_val = 0;
  bool have_prev = false;
  for (size_t i = 0; i < n; ++i) {
    if (!grid[i].ok) continue;
    const double a = std::atan2(grid[i].v[1], grid[i].v[0]);
    if (!have_prev) {
      if (phi <= a) return grid[i].stderr_;
      prev_angle = a;
      prev_val = grid[i].stderr_;
      have_prev = true;
      continue;
    }
    if (phi <= a) {
      const double t = (phi - prev_angle) / (a - prev_angle);
      return prev_val + t * (grid[i].stderr_ - prev_val);
    }
    prev_angle = a;
    prev_val = grid[i].stderr_;
  }
  return prev_val;
}

double GrowthIndicatorProfile::psi_at(const Eigen::VectorXd& v) const {
  const double nm = v.norm();
  if (nm <= 0) return 0;
  if (k == 2) {
    return nm * psi_hat(std::atan2(v[1], v[0]));
  }
  // k == 3: inverse-angular-distance weighting over ok nodes
  const Eigen::VectorXd u = v / nm;
  double wsum = 0, vsum = 0;
  for (const auto& g : grid) {
    if (!g.ok) continue;
    const double c = std::clamp(u.dot(g.v), -1.0, 1.0);
    const double ang = std::acos(c);
    if (ang < 1e-9) return nm * g.psi;
    const double w = 1.0 / (ang * ang);
    wsum += w;
    vsum += w * g.psi;
  }
  return wsum > 0 ? nm * vsum / wsum : 0.0;
}

double GrowthIndicatorProfile::concavity_violation() const {
  if (k != 2) return 0.0;
  double worst = 0.0;
  std::vector<const DirectionSample*> ok;
  for (const auto& g : grid)
    if (g.ok) ok.push_back(&g);
  for (size_t i = 0; i + 2 < ok.size(); ++i) {
    const auto &a = *ok[i], &b = *ok[i + 1], &c = *ok[i + 2];
    const double aa = std::atan2(a.v[1], a.v[0]);
    const double ab = std::atan2(b.v[1], b.v[0]);
    const double ac = std::atan2(c.v[1], c.v[0]);
    if (!(ac > aa)) continue;
    const double t = (ab - aa) / (ac - aa);
    // chord of the homogeneous extension through the unit arc endpoints
    const Eigen::VectorXd chord_pt = (1 - t) * a.v + t * c.v;
    const double chord_val =
        ((1 - t) * a.psi + t * c.psi) / chord_pt.norm();  // value on the unit circle
    const double tol = 2.0 * (a.stderr_ + b.stderr_ + c.stderr_);
    const double viol = chord_val - b.psi - tol;
    worst = std::max(worst, viol);
  }
  return worst;
}

GrowthIndicatorProfile build_profile(const OrbitDataset& data, const ConeEstimate& cone,
                                     int grid_size,
                                     const std::vector<double>& eps_schedule,
                                     const EstimatorParams& params, int threads) {
  if (data.k() < 2) throw DomainError("profiles need at least two factors");
  GrowthIndicatorProfile p;
  p.k = data.k();
  p.cone = cone;
  p.eps_schedule = eps_schedule;
  p.params = params;

  std::vector<Eigen::VectorXd> dirs;
  if (p.k == 2) {
    const double lo = cone.angle_min(), hi = cone.angle_max();
    const double width = hi - lo;
    p.angle_lo = lo + 0.05 * width;
    p.angle_hi = hi - 0.05 * width;
    const int m = std::max(grid_size, 1);
    for (int i = 0; i < m; ++i) {
      const double t = m == 1 ? 0.5 : static_cast<double>(i) / (m - 1);
      dirs.push_back(unit_from_angle(p.angle_lo + t * (p.angle_hi - p.angle_lo)));
    }
  } else {
    // geodesic sample of the spherical hull: barycentric lattice at depth 3
    std::vector<Eigen::Vector2d> poly;
    for (const auto& h : cone.hull) {
      const double s = h.sum();
      poly.emplace_back(h[0] / s, h[1] / s);
    }
    Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
    for (const auto& q : poly) centroid += q;
    if (!poly.empty()) centroid /= static_cast<double>(poly.size());
    for (auto& q : poly) q = centroid + 0.95 * (q - centroid);
    if (poly.size() < 3) {
      dirs.push_back(simplex_to_direction(centroid));
    } else {
      Eigen::Vector2d lo = poly[0], hi = poly[0];
      for (const auto& q : poly) {
        lo = lo.cwiseMin(q);
        hi = hi.cwiseMax(q);
      }
      const int subdiv = 8;  // depth 3
      for (int i = 0; i <= subdiv; ++i) {
        for (int j = 0; j <= subdiv; ++j) {
          Eigen::Vector2d q(lo.x() + (hi.x() - lo.x()) * i / subdiv,
                            lo.y() + (hi.y() - lo.y()) * j / subdiv);
          if (inside_convex(poly, q)) dirs.push_back(simplex_to_direction(q));
        }
      }
      if (dirs.empty()) dirs.push_back(simplex_to_direction(centroid));
    }
  }

  p.grid.resize(dirs.size());
  const int nthreads = resolve_threads(threads);
  const size_t chunk = (dirs.size() + nthreads - 1) / nthreads;
  std::vector<std::future<void>> futs;
  for (int t = 0; t < nthreads; ++t) {
    const size_t lo = t * chunk;
    const size_t hi = std::min(dirs.size(), lo + chunk);
    if (lo >= hi) break;
    futs.push_back(std::async(std::launch::async, [&, lo, hi] {
      for (size_t i = lo; i < hi; ++i) {
        auto s = try_growth_indicator(data, dirs[i], eps_schedule, params);
        if (s) {
          p.grid[i] = *s;
        } else {
          p.grid[i].v = dirs[i];
          p.grid[i].ok = false;
        }
      }
    }));
  }
  for (auto& f : futs) f.get();

  // maximal growth direction
  size_t best = SIZE_MAX;
  for (size_t i = 0; i < p.grid.size(); ++i) {
    if (!p.grid[i].ok) continue;
    if (best == SIZE_MAX || p.grid[i].psi > p.grid[best].psi) best = i;
  }
  if (best == SIZE_MAX)
    throw InsufficientDataError("no grid direction held enough orbit points");

  // flat-maximum diagnostic: a wide near-argmax set means the curvature is
  // below the noise floor; report the midpoint of the set in that case.
  std::vector<size_t> argmax_set;
  for (size_t i = 0; i < p.grid.size(); ++i)
    if (p.grid[i].ok &&
        p.grid[i].psi >= p.grid[best].psi - p.grid[best].stderr_)
      argmax_set.push_back(i);
  p.flat_max = !cone.degenerate() && argmax_set.size() >= 3 &&
               argmax_set.size() * 4 >= p.grid.size();
  if (p.flat_max) best = argmax_set[argmax_set.size() / 2];

  p.u_max = p.grid[best].v;
  p.psi_max = p.grid[best].psi;
  p.psi_max_stderr = p.grid[best].stderr_;

  if (p.k == 2 && !cone.degenerate()) {
    // golden-section refinement between the argmax neighbors, re-counting
    // at each probe
    const double phi_best = std::atan2(p.u_max[1], p.u_max[0]);
    const double span = (p.angle_hi - p.angle_lo) /
                        std::max<size_t>(p.grid.size() - 1, 1);
    const double lo = std::max(p.angle_lo, phi_best - span);
    const double hi = std::min(p.angle_hi, phi_best + span);
    auto eval = [&](double phi) {
      auto s = try_growth_indicator(data, unit_from_angle(phi), eps_schedule, params);
      return s ? s->psi : -std::numeric_limits<double>::infinity();
    };
    auto [phi_ref, val_ref] = golden_max(eval, lo, hi, 16);
    if (val_ref > p.psi_max) {
      auto s = try_growth_indicator(data, unit_from_angle(phi_ref), eps_schedule, params);
      if (s) {
        p.u_max = s->v;
        p.psi_max = s->psi;
        p.psi_max_stderr = s->stderr_;
      }
    }
  }
  return p;
}

DualPair dual_vector(const GrowthIndicatorProfile& profile, const Eigen::VectorXd& alpha) {
  if (alpha.size() != profile.k) throw DomainError("functional dimension mismatch");
  if (profile.k == 2) {
    const double lo = profile.angle_lo, hi = profile.angle_hi;
    if (alpha.dot(unit_from_angle(lo)) <= 0 || alpha.dot(unit_from_angle(hi)) <= 0)
      throw DomainError("slice misses the estimated limit cone");
    auto objective = [&](double phi) {
      return profile.psi_hat(phi) / alpha.dot(unit_from_angle(phi));
    };
    auto [phi, val] = golden_max(objective, lo, hi, 60);
    DualPair d;
    d.alpha = alpha;
    const Eigen::VectorXd u_hat = unit_from_angle(phi);
    d.u = u_hat / alpha.dot(u_hat);
    d.delta_u = val;
    d.stderr_ = profile.stderr_hat(phi);
    return d;
  }
  // k == 3: Nelder-Mead on the 2-D slice through the simplex chart.
  auto dir_of = [&](const Eigen::Vector2d& w) { return simplex_to_direction(w); };
  auto objective = [&](const Eigen::Vector2d& w) {
    const Eigen::VectorXd u = dir_of(w);
    const double a = alpha.dot(u);
    if (a <= 1e-12) return -std::numeric_limits<double>::infinity();
    return profile.psi_at(u / a);
  };
  // start from the centroid of ok grid nodes
  Eigen::Vector2d c(1.0 / 3, 1.0 / 3);
  double csum = 0;
  Eigen::Vector2d acc = Eigen::Vector2d::Zero();
  for (const auto& g : profile.grid) {
    if (!g.ok) continue;
    const double s = g.v.sum();
    acc += Eigen::Vector2d(g.v[0] / s, g.v[1] / s);
    csum += 1;
  }
  if (csum > 0) c = acc / csum;
  std::array<Eigen::Vector2d, 3> simplex = {c, c + Eigen::Vector2d(0.02, 0.0),
                                            c + Eigen::Vector2d(0.0, 0.02)};
  std::array<double, 3> fv;
  for (int i = 0; i < 3; ++i) fv[i] = objective(simplex[i]);
  for (int it = 0; it < 200; ++it) {
    std::array<int, 3> ord = {0, 1, 2};
    std::sort(ord.begin(), ord.end(), [&](int a, int b) { return fv[a] > fv[b]; });
    if (fv[ord[0]] - fv[ord[2]] < 1e-10) break;
    const Eigen::Vector2d mid = 0.5 * (simplex[ord[0]] + simplex[ord[1]]);
    const Eigen::Vector2d refl = mid + (mid - simplex[ord[2]]);
    const double fr = objective(refl);
    if (fr > fv[ord[0]]) {
      const Eigen::Vector2d exp_ = mid + 2.0 * (mid - simplex[ord[2]]);
      const double fe = objective(exp_);
      if (fe > fr) {
        simplex[ord[2]] = exp_;
        fv[ord[2]] = fe;
      } else {
        simplex[ord[2]] = refl;
        fv[ord[2]] = fr;
      }
    } else if (fr > fv[ord[1]]) {
      simplex[ord[2]] = refl;
      fv[ord[2]] = fr;
    } else {
      const Eigen::Vector2d con = mid + 0.5 * (simplex[ord[2]] - mid);
      const double fc = objective(con);
      if (fc > fv[ord[2]]) {
        simplex[ord[2]] = con;
        fv[ord[2]] = fc;
      } else {
        for (int i : {1, 2}) {
          simplex[ord[i]] = 0.5 * (simplex[ord[0]] + simplex[ord[i]]);
          fv[ord[i]] = objective(simplex[ord[i]]);
        }
      }
    }
  }
  int best = 0;
  for (int i = 1; i < 3; ++i)
    if (fv[i] > fv[best]) best = i;
  if (!std::isfinite(fv[best])) throw DomainError("slice misses the estimated limit cone");
  DualPair d;
  d.alpha = alpha;
  const Eigen::VectorXd u_hat = dir_of(simplex[best]);
  d.u = u_hat / alpha.dot(u_hat);
  d.delta_u = fv[best];
  d.stderr_ = 0;
  for (const auto& g : profile.grid)
    if (g.ok) d.stderr_ = std::max(d.stderr_, g.stderr_);
  return d;
}

DualPair supporting_functional(const GrowthIndicatorProfile& profile,
                               const Eigen::VectorXd& u) {
  const Eigen::VectorXd un = u.normalized();
  DualPair d;
  if (profile.k == 2) {
    const double phi = std::atan2(un[1], un[0]);
    const double psi = profile.psi_hat(phi);
    double dpsi = 0.0;
    if (!profile.cone.degenerate()) {
      // local quadratic fit of psi_hat around phi over nearby grid angles
      std::vector<double> xs, ys;
      for (const auto& g : profile.grid) {
        if (!g.ok) continue;
        const double a = std::atan2(g.v[1], g.v[0]);
        xs.push_back(a - phi);
        ys.push_back(g.psi);
      }
      std::vector<std::pair<double, double>> pts;
      for (size_t i = 0; i < xs.size(); ++i) pts.emplace_back(std::abs(xs[i]), i);
      std::sort(pts.begin(), pts.end());
      const size_t m = std::min<size_t>(7, pts.size());
      Eigen::MatrixXd A(m, 3);
      Eigen::VectorXd b(m);
      for (size_t i = 0; i < m; ++i) {
        const double x = xs[static_cast<size_t>(pts[i].second)];
        A(i, 0) = 1;
        A(i, 1) = x;
        A(i, 2) = x * x;
        b(i) = ys[static_cast<size_t>(pts[i].second)];
      }
      if (m >= 3) {
        const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
        dpsi = coef[1];
      }
    }
    // gradient of the 1-homogeneous extension at the unit vector
    Eigen::VectorXd perp(2);
    perp << -un[1], un[0];
    Eigen::VectorXd grad = psi * un + dpsi * perp;
    if (grad.norm() <= 0) grad = un;
    Eigen::VectorXd alpha = grad / grad.dot(un);  // forces <alpha, un> = 1
    d.alpha = alpha;
    d.u = un;
    d.delta_u = psi;
    d.stderr_ = profile.stderr_hat(phi);
    return d;
  }
  // k == 3: least-squares plane fit of psi over tangent coordinates.
  Eigen::VectorXd t1 = un.unitOrthogonal();
  Eigen::VectorXd t2(3);
  t2 << un[1] * t1[2] - un[2] * t1[1], un[2] * t1[0] - un[0] * t1[2],
      un[0] * t1[1] - un[1] * t1[0];
  std::vector<std::tuple<double, double, double, double>> rows;  // dist,x,y,psi
  for (const auto& g : profile.grid) {
    if (!g.ok) continue;
    const double x = t1.dot(g.v), y = t2.dot(g.v);
    rows.emplace_back(x * x + y * y, x, y, g.psi);
  }
  std::sort(rows.begin(), rows.end());
  const size_t m = std::min<size_t>(9, rows.size());
  double psi = profile.psi_at(un);
  Eigen::Vector2d grad_t = Eigen::Vector2d::Zero();
  if (m >= 3) {
    Eigen::MatrixXd A(m, 3);
    Eigen::VectorXd b(m);
    for (size_t i = 0; i < m; ++i) {
      A(i, 0) = 1;
      A(i, 1) = std::get<1>(rows[i]);
      A(i, 2) = std::get<2>(rows[i]);
      b(i) = std::get<3>(rows[i]);
    }
    const Eigen::Vector3d coef = A.colPivHouseholderQr().solve(b);
    grad_t << coef[1], coef[2];
  }
  Eigen::VectorXd grad = psi * un + grad_t[0] * t1 + grad_t[1] * t2;
  if (grad.norm() <= 0) grad = un;
  d.alpha = grad / grad.dot(un);
  d.u = un;
  d.delta_u = psi;
  d.stderr_ = 0;
  for (const auto& g : profile.grid)
    if (g.ok) d.stderr_ = std::max(d.stderr_, g.stderr_);
  return d;
}

TentReport tent_check(const GrowthIndicatorProfile& profile,
                      const std::vector<ExponentEstimate>& factor_exponents,
                      const std::vector<DualPair>& coordinate_duals) {
  TentReport rep;
  const int k = profile.k;
  auto tent = [&](const Eigen::VectorXd& v) {
    double t = std::numeric_limits<double>::infinity();
    for (int i = 0; i < k; ++i) t = std::min(t, v[i] * factor_exponents[i].value);
    return t;
  };
  rep.min_margin = std::numeric_limits<double>::infinity();
  for (const auto& g : profile.grid) {
    TentRow row;
    row.v = g.v;
    row.ok = g.ok;
    if (g.ok) {
      row.tent = tent(g.v);
      row.psi = g.psi;
      row.margin = row.tent - row.psi;
      row.stderr_ = g.stderr_;
      if (row.margin < rep.min_margin) {
        rep.min_margin = row.margin;
        rep.argmin = rep.rows.size();
      }
      if (std::abs(row.margin) <= 2 * std::max(row.stderr_, 1e-3))
        rep.equality_locus.push_back(rep.rows.size());
    }
    rep.rows.push_back(std::move(row));
  }
  rep.duals_in_locus = !coordinate_duals.empty();
  for (const auto& dual : coordinate_duals) {
    const double t = tent(dual.u);
    const double m = std::abs(t - dual.delta_u);
    rep.margin_at_dual.push_back(t - dual.delta_u);
    if (m > 2 * std::max(dual.stderr_, 1e-3) + 0.02) rep.duals_in_locus = false;
  }
  return rep;
}

GapReport gap_check(const GrowthIndicatorProfile& profile,
                    const std::vector<ExponentEstimate>& factor_exponents,
                    const ExponentEstimate& delta, double dim_limit_set) {
  GapReport rep;
  rep.u = profile.u_max;
  rep.delta = delta.value;
  rep.tent_bound = std::numeric_limits<double>::infinity();
  for (int i = 0; i < profile.k; ++i)
    rep.tent_bound = std::min(rep.tent_bound, rep.u[i] * factor_exponents[i].value);
  rep.tent_margin = rep.tent_bound - rep.delta;
  rep.dim_bound = dim_limit_set / std::sqrt(static_cast<double>(profile.k));
  rep.dim_margin = rep.dim_bound - rep.delta;
  rep.applicable = !profile.cone.degenerate();
  return rep;
}

LowerBoundReport lower_bound_check(const GrowthIndicatorProfile& profile,
                                   const std::vector<DualPair>& coordinate_duals,
                                   const std::vector<ExponentEstimate>& factor_exponents,
                                   const std::vector<FactorKind>& kinds) {
  LowerBoundReport rep;
  const int k = profile.k;
  rep.min_margin = std::numeric_limits<double>::infinity();

  auto add_row = [&](const std::vector<double>& w) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(k);
    double bound = 0;
    for (int i = 0; i < k; ++i) {
      v += w[i] * coordinate_duals[i].u;
      bound += w[i] * factor_exponents[i].value;
    }
    LowerBoundRow row;
    row.weights = w;
    row.psi = profile.psi_at(v);
    row.bound = bound;
    row.margin = row.psi - row.bound;
    rep.min_margin = std::min(rep.min_margin, row.margin);
    rep.rows.push_back(std::move(row));
  };

  const int steps = 10;
  if (k == 2) {
    for (int i = 0; i <= steps; ++i) {
      const double t = static_cast<double>(i) / steps;
      add_row({1.0 - t, t});
    }
  } else {
    for (int i = 0; i <= steps; ++i)
      for (int j = 0; i + j <= steps; ++j) {
        const double a = static_cast<double>(i) / steps;
        const double b = static_cast<double>(j) / steps;
        add_row({a, b, 1.0 - a - b});
      }
  }

  // half-sum-of-roots comparison on the unit grid directions
  rep.half_sum_excess = -std::numeric_limits<double>::infinity();
  for (const auto& g : profile.grid) {
    if (!g.ok) continue;
    double pi_v = 0;
    for (int i = 0; i < k; ++i)
      pi_v += g.v[i] * 0.5 * (boundary_dim(kinds[i]) - 1);
    rep.half_sum_excess = std::max(rep.half_sum_excess, g.psi - pi_v);
  }
  return rep;
}

StretchReport thurston_check(const ConeEstimate& cone,
                             const std::vector<ExponentEstimate>& factor_exponents) {
  StretchReport rep;
  if (cone.k != 2) return rep;
  rep.d_plus = cone.d_plus;
  rep.d_minus = cone.d_minus;
  const double d1 = factor_exponents[0].value;
  const double d2 = factor_exponents[1].value;
  rep.forward_margin = cone.d_plus * d2 - d1;
  rep.backward_margin = (cone.d_minus > 0 ? d1 / cone.d_minus : 0.0) - d2;
  rep.applicable = cone.d_plus > 1.0 + 1e-3 || cone.d_minus < 1.0 - 1e-3;
  return rep;
}

SymmetryReport symmetry_check(const OrbitDataset& data,
                              const GrowthIndicatorProfile& profile) {
  SymmetryReport rep;
  const int k = profile.k;
  for (const auto& g : profile.grid) {
    if (!g.ok) continue;
    Eigen::VectorXd m(k);
    for (int i = 0; i < k; ++i) m[i] = g.v[(i + 1) % k];
    auto s = try_growth_indicator(data, m, profile.eps_schedule, profile.params);
    if (!s) continue;
    rep.max_deviation = std::max(rep.max_deviation, std::abs(g.psi - s->psi));
    ++rep.directions_used;
  }
  const Eigen::VectorXd diag =
      Eigen::VectorXd::Ones(k) / std::sqrt(static_cast<double>(k));
  const double c = std::clamp(profile.u_max.dot(diag), -1.0, 1.0);
  rep.u_max_angle_deg = std::acos(c) * 180.0 / M_PI;
  return rep;
}

}  // namespace joinlab
