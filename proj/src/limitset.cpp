#include "joinlab/limitset.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <unordered_set>

namespace joinlab {

namespace {

double median_norm(const OrbitDataset& d) {
  std::vector<double> v = d.norm;
  if (v.empty()) return 0;
  const size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + mid, v.end());
  return v[mid];
}

// Two stereographic charts per sphere. Points with pole coordinate <= 0 are
// binned in chart 0 (projection from the positive pole), the rest in chart
// 1. The last active axis is the pole axis: index 1 for circles, 2 for
// spheres. Chart coordinates stay within the unit box on the chart's half,
// and the projection satisfies
//   |chart(P) - chart(Q)| = |P - Q| / sqrt((1 -+ P_pole)(1 -+ Q_pole)).
struct ChartPoint {
  int chart = 0;
  double x = 0.0, y = 0.0;  // y unused for circles
};

ChartPoint to_chart(const Eigen::Vector3d& p, FactorKind kind) {
  ChartPoint c;
  const int pole_axis = kind == FactorKind::Real2 ? 1 : 2;
  const double z = p[pole_axis];
  c.chart = z <= 0 ? 0 : 1;
  const double den = c.chart == 0 ? 1.0 - z : 1.0 + z;
  c.x = p[0] / den;
  if (kind == FactorKind::Complex3) c.y = p[1] / den;
  return c;
}

inline uint32_t cell_of(double x, int level) {
  const double step = std::ldexp(2.0, -level);  // 2 / 2^level
  double t = (x + 1.0) / step;
  if (t < 0) t = 0;
  const double maxc = std::ldexp(1.0, level) - 1.0;
  if (t > maxc) t = maxc;
  return static_cast<uint32_t>(t);
}

uint64_t cell_key(const ChartPoint& c, FactorKind kind, int level) {
  const uint64_t ix = cell_of(c.x, level);
  const uint64_t iy = kind == FactorKind::Complex3 ? cell_of(c.y, level) : 0;
  return (static_cast<uint64_t>(c.chart) << 62) | (ix << 31) | iy;
}

// 128-bit box key spanning all factors, for box counting.
struct BoxKey {
  uint64_t a = 0, b = 0;
  bool operator==(const BoxKey&) const = default;
};
struct BoxKeyHash {
  size_t operator()(const BoxKey& k) const {
    return std::hash<uint64_t>()(k.a * 0x9e3779b97f4a7c15ull ^ k.b);
  }
};

class BoxKeyBuilder {
 public:
  void push(uint64_t value, int bits) {
    if (pos_ + bits <= 64) {
      key_.a |= value << pos_;
    } else if (pos_ >= 64) {
      key_.b |= value << (pos_ - 64);
    } else {
      key_.a |= value << pos_;
      key_.b |= value >> (64 - pos_);
    }
    pos_ += bits;
  }
  BoxKey key() const { return key_; }

 private:
  BoxKey key_;
  int pos_ = 0;
};

}  // namespace

BoundarySampleSet boundary_samples(const OrbitDataset& data, double norm_floor) {
  if (data.size() == 0) throw InsufficientDataError("empty dataset");
  if (norm_floor <= 0) norm_floor = median_norm(data);
  BoundarySampleSet s;
  s.data = &data;
  s.norm_floor = norm_floor;
  for (size_t i = 0; i < data.size(); ++i)
    if (data.lox[i] && data.norm[i] >= norm_floor)
      s.idx.push_back(static_cast<uint32_t>(i));
  return s;
}

BoundarySampleSet directional_samples(const OrbitDataset& data, const Eigen::VectorXd& u,
                                      double R, double norm_floor) {
  if (norm_floor <= 0) norm_floor = median_norm(data);
  BoundarySampleSet s;
  s.data = &data;
  s.norm_floor = norm_floor;
  for (uint32_t i : filter_strip(data, u, R))
    if (data.lox[i] && data.norm[i] >= norm_floor) s.idx.push_back(i);
  if (s.idx.empty())
    throw InsufficientDataError("strip holds no boundary samples above the norm floor");
  return s;
}

namespace {

DimensionEstimate box_dimension_impl(
    size_t n_samples, int k, const std::vector<FactorKind>& kinds,
    const std::function<const Eigen::Vector3d&(int, size_t)>& point, int scale_min,
    int scale_max) {
  if (n_samples == 0) throw InsufficientDataError("no samples for box counting");
  scale_max = std::min(scale_max, 18);
  scale_min = std::max(scale_min, 1);

  DimensionEstimate est;
  est.samples = n_samples;
  est.low_confidence = n_samples < 10000;

  // cache chart points once
  std::vector<std::vector<ChartPoint>> charts(k);
  for (int f = 0; f < k; ++f) {
    charts[f].resize(n_samples);
    for (size_t i = 0; i < n_samples; ++i) charts[f][i] = to_chart(point(f, i), kinds[f]);
  }

  std::unordered_set<BoxKey, BoxKeyHash> boxes;
  for (int j = scale_min; j <= scale_max; ++j) {
    boxes.clear();
    boxes.reserve(1 << 14);
    for (size_t i = 0; i < n_samples; ++i) {
      BoxKeyBuilder kb;
      for (int f = 0; f < k; ++f) {
        const ChartPoint& c = charts[f][i];
        kb.push(static_cast<uint64_t>(c.chart), 1);
        kb.push(cell_of(c.x, j), j + 1);
        if (kinds[f] == FactorKind::Complex3) kb.push(cell_of(c.y, j), j + 1);
      }
      boxes.insert(kb.key());
    }
    est.counts.emplace_back(j, boxes.size());
    // Once every sample sits in its own box the curve is flat; finer
    // scales carry no information.
    if (boxes.size() >= n_samples) break;
  }

  // Regression window: scales with enough boxes to be meaningful and far
  // from saturation.
  std::vector<double> xs, ys;
  int lo = 0, hi = 0;
  for (const auto& [j, c] : est.counts) {
    if (c < 4) continue;
    if (c > n_samples / 4) continue;
    if (xs.empty()) lo = j;
    hi = j;
    xs.push_back(static_cast<double>(j));
    ys.push_back(std::log2(static_cast<double>(c)));
  }
  if (xs.size() < 3)
    throw InsufficientDataError("fewer than 3 stable scales for box counting");
  const LineFit fit = fit_line(xs, ys);
  est.value = fit.slope;
  est.stderr_ = fit.slope_stderr;
  est.scale_lo = lo;
  est.scale_hi = hi;
  return est;
}

}  // namespace

DimensionEstimate box_dimension(const BoundarySampleSet& samples, int scale_min,
                                int scale_max) {
  const OrbitDataset& d = *samples.data;
  std::vector<FactorKind> kinds;
  for (const auto& f : d.rep.factors) kinds.push_back(f.kind);
  return box_dimension_impl(
      samples.size(), d.k(), kinds,
      [&](int f, size_t i) -> const Eigen::Vector3d& { return d.xi[f][samples.idx[i]]; },
      scale_min, scale_max);
}

DimensionEstimate box_dimension(const std::vector<std::vector<Eigen::Vector3d>>& points,
                                const std::vector<FactorKind>& kinds, int scale_min,
                                int scale_max) {
  if (points.empty()) throw InsufficientDataError("no factors");
  return box_dimension_impl(
      points[0].size(), static_cast<int>(points.size()), kinds,
      [&](int f, size_t i) -> const Eigen::Vector3d& { return points[f][i]; }, scale_min,
      scale_max);
}

PSMeasureApprox ps_measure(const OrbitDataset& data, const DualPair& dual, double s) {
  PSMeasureApprox m;
  m.data = &data;
  m.functional = dual.psi_u();
  m.s = s;

  // refuse parameters at or below the estimated abscissa of the series
  try {
    const ExponentEstimate a =
        abscissa_estimate(score_linear(data, m.functional, all_indices(data)));
    if (s <= a.value)
      throw DomainError("series parameter s = " + std::to_string(s) +
                        " at or below the estimated abscissa " +
                        std::to_string(a.value));
  } catch (const InsufficientDataError&) {
    // tiny datasets cannot estimate the abscissa; accept s as given
  }

  const int k = data.k();
  double total = 0;
  for (size_t i = 0; i < data.size(); ++i) {
    if (!data.lox[i]) {
      ++m.dropped;
      continue;
    }
    double f = 0;
    for (int c = 0; c < k; ++c) f += m.functional[c] * data.mu[c][i];
    const double w = std::exp(-s * f);
    if (w <= 0) continue;
    m.atoms.push_back(static_cast<uint32_t>(i));
    m.weight.push_back(w);
    total += w;
  }
  if (m.atoms.empty()) throw InsufficientDataError("measure has no atoms");
  m.normalizer = total;
  for (double& w : m.weight) w /= total;
  return m;
}

ExponentEstimate psu_abscissa(const OrbitDataset& data, const DualPair& dual,
                              const EstimatorParams& params) {
  return abscissa_estimate(score_linear(data, dual.psi_u(), all_indices(data)), params);
}

ExponentEstimate strip_abscissa(const OrbitDataset& data, const DualPair& dual, double R,
                                const EstimatorParams& params) {
  const auto idx = filter_strip(data, dual.u.normalized(), R);
  return abscissa_estimate(score_linear(data, dual.psi_u(), idx), params);
}

Shadow shadow(const OrbitDataset& data, size_t index, double R) {
  if (index >= data.size()) throw DomainError("point index out of range");
  if (!data.lox[index])
    throw NonLoxodromicError("shadow center needs a loxodromic point");
  Shadow s;
  s.point = static_cast<uint32_t>(index);
  const double c = std::exp(R);
  for (int f = 0; f < data.k(); ++f) {
    s.center.push_back(data.xi[f][index]);
    s.radii.push_back(c * std::exp(-data.mu[f][index]));
  }
  return s;
}

// ----- BallIndex ------------------------------------------------------------

BallIndex::BallIndex(const OrbitDataset& data, const std::vector<uint32_t>& rows)
    : data_(&data), rows_(rows), level_(12) {
  const int k = data.k();
  grids_.resize(k);
  for (int f = 0; f < k; ++f) {
    const FactorKind kind = data.rep.factors[f].kind;
    auto& cells = grids_[f].cells;
    cells.reserve(rows.size());
    for (uint32_t slot = 0; slot < rows.size(); ++slot) {
      const ChartPoint c = to_chart(data.xi[f][rows[slot]], kind);
      cells.emplace_back(cell_key(c, kind, level_), slot);
    }
    std::sort(cells.begin(), cells.end());
  }
}

std::pair<double, size_t> BallIndex::query(const std::vector<Eigen::Vector3d>& centers,
                                           const std::vector<double>& radii,
                                           const std::vector<double>& weights) const {
  const OrbitDataset& d = *data_;
  const int k = d.k();

  auto exact_accept = [&](uint32_t slot) -> bool {
    const uint32_t row = rows_[slot];
    for (int f = 0; f < k; ++f)
      if ((d.xi[f][row] - centers[f]).norm() > radii[f]) return false;
    return true;
  };

  // pivot on the most selective factor
  int pivot = 0;
  for (int f = 1; f < k; ++f)
    if (radii[f] < radii[pivot]) pivot = f;
  const FactorKind kind = d.rep.factors[pivot].kind;
  const int pole_axis = kind == FactorKind::Real2 ? 1 : 2;
  const double r = radii[pivot];
  const double step = std::ldexp(2.0, -level_);

  double weight_sum = 0;
  size_t count = 0;

  // chart cover radius r / sqrt(1 -+ pole) blows up only when the ball is
  // far from the chart's half; skip those charts outright.
  const double z = centers[pivot][pole_axis];
  bool full_scan = r > 0.02;
  std::vector<std::pair<uint64_t, uint64_t>> ranges;  // inclusive cell ranges per axis set
  if (!full_scan) {
    const auto& cells = grids_[pivot].cells;
    auto process_cell = [&](uint64_t key) {
      auto lo = std::lower_bound(cells.begin(), cells.end(),
                                 std::make_pair(key, uint32_t(0)));
      for (auto it = lo; it != cells.end() && it->first == key; ++it) {
        if (exact_accept(it->second)) {
          weight_sum += weights[it->second];
          ++count;
        }
      }
    };
    for (int chart = 0; chart < 2; ++chart) {
      const double dist_to_half = chart == 0 ? z : -z;  // chordal lower bound
      if (dist_to_half > r) continue;
      const double den = chart == 0 ? 1.0 - z : 1.0 + z;
      if (den <= r * r / 4) continue;  // center essentially at the far pole
      const double cover = r / std::sqrt(std::max(den - r, 1e-12));
      if (cover > 0.02) {
        full_scan = true;
        break;
      }
      ChartPoint c;
      c.chart = chart;
      c.x = centers[pivot][0] / den;
      c.y = kind == FactorKind::Complex3 ? centers[pivot][1] / den : 0.0;
      const uint32_t x0 = cell_of(c.x - cover, level_), x1 = cell_of(c.x + cover, level_);
      const uint32_t y0 = kind == FactorKind::Complex3 ? cell_of(c.y - cover, level_) : 0;
      const uint32_t y1 = kind == FactorKind::Complex3 ? cell_of(c.y + cover, level_) : 0;
      for (uint32_t ix = x0; ix <= x1; ++ix)
        for (uint32_t iy = y0; iy <= y1; ++iy) {
          const uint64_t key = (static_cast<uint64_t>(chart) << 62) |
                               (static_cast<uint64_t>(ix) << 31) | iy;
          process_cell(key);
        }
    }
  }
  if (full_scan) {
    weight_sum = 0;
    count = 0;
    for (uint32_t slot = 0; slot < rows_.size(); ++slot) {
      if (exact_accept(slot)) {
        weight_sum += weights[slot];
        ++count;
      }
    }
  }
  return {weight_sum, count};
}

// ----- checks ---------------------------------------------------------------

ShadowLemmaReport shadow_lemma_check(const PSMeasureApprox& measure,
                                     const BallIndex& index, double R,
                                     size_t sample_count, Rng& rng) {
  const OrbitDataset& d = *measure.data;
  // mid-depth pool: atoms between the 40th and 70th percentile of |mu|
  std::vector<uint32_t> pool;
  {
    std::vector<double> norms;
    norms.reserve(measure.atoms.size());
    for (uint32_t row : measure.atoms) norms.push_back(d.norm[row]);
    std::vector<double> sorted = norms;
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted[static_cast<size_t>(0.40 * (sorted.size() - 1))];
    const double hi = sorted[static_cast<size_t>(0.70 * (sorted.size() - 1))];
    for (size_t i = 0; i < measure.atoms.size(); ++i)
      if (norms[i] >= lo && norms[i] <= hi) pool.push_back(measure.atoms[i]);
  }
  if (pool.empty()) throw InsufficientDataError("no mid-depth atoms to sample");

  ShadowLemmaReport rep;
  rep.lo = std::numeric_limits<double>::infinity();
  rep.hi = -std::numeric_limits<double>::infinity();
  const int k = d.k();
  for (size_t t = 0; t < sample_count; ++t) {
    const uint32_t row = pool[rng.below(pool.size())];
    const Shadow s = shadow(d, row, R);
    const auto [nu, cnt] = index.query(s.center, s.radii, measure.weight);
    ++rep.sampled;
    if (nu <= 0 || cnt == 0) {
      ++rep.empty_shadows;
      continue;
    }
    double f = 0;
    for (int c = 0; c < k; ++c) f += measure.functional[c] * d.mu[c][row];
    const double dev = std::log(nu) + f;
    rep.lo = std::min(rep.lo, dev);
    rep.hi = std::max(rep.hi, dev);
  }
  if (rep.sampled == rep.empty_shadows)
    throw InsufficientDataError("every sampled shadow was empty");
  rep.spread = rep.hi - rep.lo;
  rep.pass = rep.spread <= std::log(400.0);
  return rep;
}

BallDecayReport ball_decay_check(const PSMeasureApprox& measure, const BallIndex& index,
                                 const BoundarySampleSet& centers,
                                 const Eigen::VectorXd& u, double delta_u,
                                 const std::vector<double>& t_grid, size_t center_count,
                                 Rng& rng) {
  const OrbitDataset& d = *measure.data;
  if (centers.size() == 0) throw InsufficientDataError("no centers to sample");
  const Eigen::VectorXd un = u.normalized();
  const int k = d.k();

  BallDecayReport rep;
  rep.centers_requested = center_count;
  rep.delta_u = delta_u;
  size_t upper_pass = 0, lower_pass = 0, joint_pass = 0;
  for (size_t t = 0; t < center_count; ++t) {
    const uint32_t row = centers.idx[rng.below(centers.size())];
    std::vector<Eigen::Vector3d> ctr(k);
    for (int f = 0; f < k; ++f) ctr[f] = d.xi[f][row];
    std::vector<double> xs, ys;
    for (double tv : t_grid) {
      std::vector<double> radii(k);
      for (int f = 0; f < k; ++f) radii[f] = std::exp(-un[f] * tv);
      const auto [nu, cnt] = index.query(ctr, radii, measure.weight);
      if (cnt < 20) break;  // window ends when balls run out of atoms
      xs.push_back(tv);
      ys.push_back(std::log(nu));
    }
    if (xs.size() < 4) continue;
    const LineFit fit = fit_line(xs, ys);
    rep.slopes.push_back(fit.slope);
    ++rep.centers_used;
    const bool up = fit.slope <= -delta_u + 0.15;
    const bool low = fit.slope >= -delta_u * 1.1 - 0.15;
    upper_pass += up;
    lower_pass += low;
    joint_pass += up && low;
  }
  if (rep.centers_used == 0)
    throw InsufficientDataError("no center produced a usable decay window");
  rep.upper_pass_fraction = static_cast<double>(upper_pass) / rep.centers_used;
  rep.lower_pass_fraction = static_cast<double>(lower_pass) / rep.centers_used;
  rep.joint_pass_fraction = static_cast<double>(joint_pass) / rep.centers_used;
  return rep;
}

DimensionChecksReport dimension_checks(const OrbitDataset& data,
                                       const GrowthIndicatorProfile& profile,
                                       const std::vector<ExponentEstimate>& factor_exponents,
                                       const ExponentEstimate& delta, double strip_R,
                                       const EstimatorParams& params) {
  DimensionChecksReport rep;
  const int k = data.k();

  const BoundarySampleSet full = boundary_samples(data);
  rep.dim_limit_set = box_dimension(full);
  rep.max_factor_exponent = 0;
  for (const auto& e : factor_exponents)
    rep.max_factor_exponent = std::max(rep.max_factor_exponent, e.value);
  auto [dmin, dmax] = minmax_exponents(data, params);
  rep.delta_min = dmin;
  rep.delta_max = dmax;
  rep.identity_gap_box = std::abs(rep.dim_limit_set.value - rep.max_factor_exponent);
  rep.identity_gap_min = std::abs(rep.delta_min.value - rep.max_factor_exponent);

  // exponent chain delta <= delta_max <= sqrt(k) delta <= delta_min
  const double sq = std::sqrt(static_cast<double>(k));
  double slack = 0;
  slack = std::max(slack, delta.value - rep.delta_max.value);
  slack = std::max(slack, rep.delta_max.value - sq * delta.value);
  slack = std::max(slack, sq * delta.value - rep.delta_min.value);
  rep.chain_slack = slack;

  // directional brackets at three interior directions
  std::vector<Eigen::VectorXd> dirs;
  if (k == 2 && !profile.cone.degenerate()) {
    const double lo = profile.angle_lo, hi = profile.angle_hi;
    for (double t : {0.3, 0.5, 0.7}) {
      Eigen::VectorXd v(2);
      const double phi = lo + t * (hi - lo);
      v << std::cos(phi), std::sin(phi);
      dirs.push_back(v);
    }
  } else {
    dirs.push_back(profile.u_max);
  }
  for (const auto& u : dirs) {
    DimensionChecksReport::Directional row;
    row.u = u;
    row.delta_u = profile.psi_at(u);
    const double m_u = u.minCoeff();
    const double big_m = u.maxCoeff();
    row.bracket_lo = row.delta_u / big_m - 0.2;
    row.bracket_hi = row.delta_u / m_u + 0.2;
    try {
      const BoundarySampleSet strip = directional_samples(data, u, strip_R);
      row.dim = box_dimension(strip);
      row.pass = row.dim.value >= row.bracket_lo && row.dim.value <= row.bracket_hi;
    } catch (const InsufficientDataError&) {
      row.ok = false;
    }
    rep.directional.push_back(std::move(row));
  }

  // delta_max against the profile: sup over grid of psi / max component
  double best = 0;
  for (const auto& g : profile.grid) {
    if (!g.ok) continue;
    best = std::max(best, g.psi / g.v.maxCoeff());
  }
  rep.delta_max_profile = best;
  rep.dmax_gap = std::abs(rep.delta_max.value - rep.delta_max_profile);
  return rep;
}

}  // namespace joinlab
