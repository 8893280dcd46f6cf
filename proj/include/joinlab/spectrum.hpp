#pragma once

// Abscissa-of-convergence estimation: every exponent is the growth rate of
// a counting function N_f(T) = #{gamma : f(mu(gamma)) < T}, estimated as
// the least-squares slope of log N(T) against T over an auto-selected
// window. Counting is over joined group elements (words), never
// deduplicated by mu value.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "joinlab/orbit.hpp"

namespace joinlab {

struct EstimatorParams {
  double t1_fraction = 0.9;   // window end as a fraction of max observed f
  size_t t0_rank = 200;       // window starts at the t0_rank-th smallest f
  int grid_points = 64;
  size_t min_samples = 500;   // below this the estimate is flagged
};

struct ExponentEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double window_lo = 0.0;
  double window_hi = 0.0;
  size_t samples = 0;
  bool low_confidence = false;
};

// ----- score extraction over a dataset subset ------------------------------

std::vector<double> score_norm(const OrbitDataset& d, const std::vector<uint32_t>& idx);
std::vector<double> score_component(const OrbitDataset& d, int i,
                                    const std::vector<uint32_t>& idx);
std::vector<double> score_linear(const OrbitDataset& d, const Eigen::VectorXd& alpha,
                                 const std::vector<uint32_t>& idx);
std::vector<double> score_min(const OrbitDataset& d, const std::vector<uint32_t>& idx);
std::vector<double> score_max(const OrbitDataset& d, const std::vector<uint32_t>& idx);

// ----- counting and regression ---------------------------------------------

// (T, N(T)) with N(T) = #{f < T}; grid must be strictly increasing.
std::vector<std::pair<double, size_t>> counting_function(
    std::vector<double> f_values, const std::vector<double>& grid);

// Core estimator over raw f-values. Throws InsufficientDataError when the
// window yields fewer than 5 usable grid points.
ExponentEstimate abscissa_estimate(std::vector<double> f_values,
                                   const EstimatorParams& params = {});

// ----- the named exponents ---------------------------------------------------

// delta: f = |mu|
ExponentEstimate critical_exponent(const OrbitDataset& d,
                                   const EstimatorParams& params = {});

// delta_{rho_i}: f = mu_i
ExponentEstimate factor_exponent(const OrbitDataset& d, int i,
                                 const EstimatorParams& params = {});

// D_alpha for the Manhattan metric <alpha, mu>; alpha must be positive on
// the sampled limit cone (validated against cone directions).
ExponentEstimate manhattan_exponent(const OrbitDataset& d, const Eigen::VectorXd& alpha,
                                    const std::vector<Eigen::VectorXd>& cone_directions,
                                    const EstimatorParams& params = {});

// (delta_min, delta_max): f = min_i mu_i and max_i mu_i; requires k >= 2.
std::pair<ExponentEstimate, ExponentEstimate> minmax_exponents(
    const OrbitDataset& d, const EstimatorParams& params = {});

// Shifts the window start by one grid step and reports the change, as a
// stability diagnostic.
double window_shift_delta(std::vector<double> f_values, const EstimatorParams& params);

}  // namespace joinlab
