#include "joinlab/spectrum.hpp"

#include <algorithm>
#include <cmath>

namespace joinlab {

std::vector<double> score_norm(const OrbitDataset& d, const std::vector<uint32_t>& idx) {
  std::vector<double> out(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) out[j] = d.norm[idx[j]];
  return out;
}

std::vector<double> score_component(const OrbitDataset& d, int i,
                                    const std::vector<uint32_t>& idx) {
  if (i < 0 || i >= d.k()) throw DomainError("factor index out of range");
  std::vector<double> out(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) out[j] = d.mu[i][idx[j]];
  return out;
}

std::vector<double> score_linear(const OrbitDataset& d, const Eigen::VectorXd& alpha,
                                 const std::vector<uint32_t>& idx) {
  if (alpha.size() != d.k()) throw DomainError("functional dimension mismatch");
  const int k = d.k();
  std::vector<double> out(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    double s = 0;
    for (int i = 0; i < k; ++i) s += alpha[i] * d.mu[i][idx[j]];
    out[j] = s;
  }
  return out;
}

std::vector<double> score_min(const OrbitDataset& d, const std::vector<uint32_t>& idx) {
  const int k = d.k();
  std::vector<double> out(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    double m = d.mu[0][idx[j]];
    for (int i = 1; i < k; ++i) m = std::min(m, d.mu[i][idx[j]]);
    out[j] = m;
  }
  return out;
}

std::vector<double> score_max(const OrbitDataset& d, const std::vector<uint32_t>& idx) {
  const int k = d.k();
  std::vector<double> out(idx.size());
  for (size_t j = 0; j < idx.size(); ++j) {
    double m = d.mu[0][idx[j]];
    for (int i = 1; i < k; ++i) m = std::max(m, d.mu[i][idx[j]]);
    out[j] = m;
  }
  return out;
}

std::vector<std::pair<double, size_t>> counting_function(
    std::vector<double> f_values, const std::vector<double>& grid) {
  for (size_t i = 1; i < grid.size(); ++i)
    if (!(grid[i] > grid[i - 1])) throw DomainError("grid must be strictly increasing");
  std::sort(f_values.begin(), f_values.end());
  std::vector<std::pair<double, size_t>> out;
  out.reserve(grid.size());
  for (double t : grid) {
    const auto it = std::lower_bound(f_values.begin(), f_values.end(), t);
    out.emplace_back(t, static_cast<size_t>(it - f_values.begin()));
  }
  return out;
}

namespace {

ExponentEstimate estimate_from_sorted(const std::vector<double>& sorted,
                                      const EstimatorParams& params,
                                      int window_shift_steps = 0) {
  const size_t n = sorted.size();
  if (n == 0) throw InsufficientDataError("empty subset: no orbit points to count");
  if (n < params.t0_rank + 5)
    throw InsufficientDataError("too few points for a counting window (" +
                                std::to_string(n) + ")");
  const double t1 = params.t1_fraction * sorted.back();
  double t0 = sorted[params.t0_rank - 1];
  const int m = std::max(params.grid_points, 8);
  const double step0 = (t1 - t0) / (m - 1);
  t0 += window_shift_steps * step0;
  if (!(t1 > t0))
    throw InsufficientDataError("degenerate counting window: scores too concentrated");
  const double step = (t1 - t0) / (m - 1);

  std::vector<double> ts, logs;
  ts.reserve(m);
  logs.reserve(m);
  for (int j = 0; j < m; ++j) {
    const double t = t0 + step * j;
    const auto it = std::lower_bound(sorted.begin(), sorted.end(), t);
    const size_t count = static_cast<size_t>(it - sorted.begin());
    if (count == 0) continue;
    ts.push_back(t);
    logs.push_back(std::log(static_cast<double>(count)));
  }
  if (ts.size() < 5)
    throw InsufficientDataError("fewer than 5 usable grid points in the window");
  const LineFit fit = fit_line(ts, logs);
  ExponentEstimate est;
  est.value = fit.slope;
  est.stderr_ = fit.slope_stderr;
  est.window_lo = t0;
  est.window_hi = t1;
  est.samples = n;
  est.low_confidence = n < params.min_samples;
  return est;
}

}  // namespace

ExponentEstimate abscissa_estimate(std::vector<double> f_values,
                                   const EstimatorParams& params) {
  std::sort(f_values.begin(), f_values.end());
  return estimate_from_sorted(f_values, params);
}

double window_shift_delta(std::vector<double> f_values, const EstimatorParams& params) {
  std::sort(f_values.begin(), f_values.end());
  const ExponentEstimate a = estimate_from_sorted(f_values, params, 0);
  const ExponentEstimate b = estimate_from_sorted(f_values, params, 1);
  return b.value - a.value;
}

ExponentEstimate critical_exponent(const OrbitDataset& d, const EstimatorParams& params) {
  return abscissa_estimate(score_norm(d, all_indices(d)), params);
}

ExponentEstimate factor_exponent(const OrbitDataset& d, int i,
                                 const EstimatorParams& params) {
  return abscissa_estimate(score_component(d, i, all_indices(d)), params);
}

ExponentEstimate manhattan_exponent(const OrbitDataset& d, const Eigen::VectorXd& alpha,
                                    const std::vector<Eigen::VectorXd>& cone_directions,
                                    const EstimatorParams& params) {
  if (alpha.size() != d.k()) throw DomainError("functional dimension mismatch");
  for (const auto& v : cone_directions) {
    if (alpha.dot(v) <= 0)
      throw DomainError("functional is not positive on the sampled limit cone");
  }
  return abscissa_estimate(score_linear(d, alpha, all_indices(d)), params);
}

std::pair<ExponentEstimate, ExponentEstimate> minmax_exponents(
    const OrbitDataset& d, const EstimatorParams& params) {
  if (d.k() < 2) throw DomainError("min/max exponents need at least two factors");
  const auto idx = all_indices(d);
  return {abscissa_estimate(score_min(d, idx), params),
          abscissa_estimate(score_max(d, idx), params)};
}

}  // namespace joinlab
