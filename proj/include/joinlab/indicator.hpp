#pragma once

// Growth-indicator reconstruction on a direction grid, limit-cone and
// stretch-constant estimation, the duality between linear functionals and
// cone directions, and the tent / gap / lower-bound / stretch / symmetry
// checks built on top of them.

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "joinlab/orbit.hpp"
#include "joinlab/spectrum.hpp"

namespace joinlab {

struct ConeEstimate {
  int k = 0;
  double norm_floor = 0.0;
  size_t points_used = 0;

  // k == 2: direction interval as slopes mu_2/mu_1 of deep orbit points.
  double slope_min = 0.0;
  double slope_max = 0.0;
  // k == 2: stretch constants, extremes of length ratios over conjugacy
  // classes. Both intervals approximate the limit cone from inside.
  double d_minus = 0.0;
  double d_plus = 0.0;
  size_t class_count = 0;

  // k == 3: extreme unit directions of the convex hull of mu directions.
  std::vector<Eigen::VectorXd> hull;

  // A few interior unit directions, used to validate dual functionals.
  std::vector<Eigen::VectorXd> sample_directions;

  double angle_min() const { return std::atan(slope_min); }
  double angle_max() const { return std::atan(slope_max); }
  bool degenerate() const { return k == 2 && angle_max() - angle_min() < 1e-6; }
};

// norm_floor <= 0 selects the median |mu|.
ConeEstimate limit_cone_estimate(const OrbitDataset& data,
                                 const std::vector<ConjugacyClassEntry>& classes,
                                 double norm_floor = 0.0);

struct DirectionSample {
  Eigen::VectorXd v;  // unit direction
  double psi = 0.0;
  double stderr_ = 0.0;
  double eps_used = 0.0;
  size_t samples = 0;
  bool ok = false;
};

inline const std::vector<double>& default_eps_schedule() {
  static const std::vector<double> s{0.30, 0.20, 0.12, 0.08};
  return s;
}

// Cone-restricted abscissa at direction v: the estimate at the smallest
// half-angle in the schedule that still holds enough samples. Throws when
// even the largest cone is too thin.
DirectionSample growth_indicator(const OrbitDataset& data, const Eigen::VectorXd& v,
                                 const std::vector<double>& eps_schedule,
                                 const EstimatorParams& params = {});

struct GrowthIndicatorProfile {
  int k = 0;
  ConeEstimate cone;
  std::vector<double> eps_schedule;
  EstimatorParams params;
  std::vector<DirectionSample> grid;  // k == 2: ordered by angle

  Eigen::VectorXd u_max;  // unit maximal-growth direction
  double psi_max = 0.0;
  double psi_max_stderr = 0.0;
  bool flat_max = false;

  // k == 2 interpolation helpers (piecewise linear in the angle).
  double angle_lo = 0.0;
  double angle_hi = 0.0;
  double psi_hat(double phi) const;
  double stderr_hat(double phi) const;

  // Degree-1 homogeneous interpolated value at any cone vector.
  double psi_at(const Eigen::VectorXd& v) const;

  // Midpoint concavity violation: max over grid triples of
  // psi(mid) below the chord by more than 2 * stderr (k == 2).
  double concavity_violation() const;
};

GrowthIndicatorProfile build_profile(const OrbitDataset& data, const ConeEstimate& cone,
                                     int grid_size,
                                     const std::vector<double>& eps_schedule,
                                     const EstimatorParams& params = {},
                                     int threads = 0);

struct DualPair {
  Eigen::VectorXd alpha;  // functional, <alpha, u> = 1
  Eigen::VectorXd u;      // cone vector realizing the dual
  double delta_u = 0.0;   // psi at u
  double stderr_ = 0.0;
  Eigen::VectorXd psi_u() const { return delta_u * alpha; }
};

// Maximizer of psi over the slice {<alpha, v> = 1} of the cone.
DualPair dual_vector(const GrowthIndicatorProfile& profile, const Eigen::VectorXd& alpha);

// Supporting functional at a given unit direction (gradient route).
DualPair supporting_functional(const GrowthIndicatorProfile& profile,
                               const Eigen::VectorXd& u);

// ----- theorem checks -------------------------------------------------------

struct TentRow {
  Eigen::VectorXd v;
  double tent = 0.0;
  double psi = 0.0;
  double margin = 0.0;  // tent - psi
  double stderr_ = 0.0;
  bool ok = false;
};

struct TentReport {
  std::vector<TentRow> rows;
  double min_margin = 0.0;
  size_t argmin = 0;
  std::vector<size_t> equality_locus;   // |margin| <= 2 stderr
  std::vector<double> margin_at_dual;   // |T - psi| at each u_{e_i} direction
  bool duals_in_locus = false;
};

TentReport tent_check(const GrowthIndicatorProfile& profile,
                      const std::vector<ExponentEstimate>& factor_exponents,
                      const std::vector<DualPair>& coordinate_duals);

struct GapReport {
  Eigen::VectorXd u;          // maximal growth direction used
  double delta = 0.0;
  double tent_bound = 0.0;    // min_i u_i * delta_{rho_i}
  double tent_margin = 0.0;   // bound - delta
  double dim_bound = 0.0;     // dim(limit set) / sqrt(k)
  double dim_margin = 0.0;
  bool applicable = true;     // false when the pair looks conjugate
};

GapReport gap_check(const GrowthIndicatorProfile& profile,
                    const std::vector<ExponentEstimate>& factor_exponents,
                    const ExponentEstimate& delta, double dim_limit_set);

struct LowerBoundRow {
  std::vector<double> weights;
  double psi = 0.0;
  double bound = 0.0;   // sum of weights * delta_{rho_i}
  double margin = 0.0;  // psi - bound, should be >= -tol
};

struct LowerBoundReport {
  std::vector<LowerBoundRow> rows;
  double min_margin = 0.0;
  // Half-sum comparison: max over the grid of psi(v) - sum_i v_i (n_i - 1)/2,
  // which should stay <= 0 up to noise.
  double half_sum_excess = 0.0;
};

LowerBoundReport lower_bound_check(const GrowthIndicatorProfile& profile,
                                   const std::vector<DualPair>& coordinate_duals,
                                   const std::vector<ExponentEstimate>& factor_exponents,
                                   const std::vector<FactorKind>& kinds);

struct StretchReport {
  bool applicable = false;  // needs k == 2 and a certified non-conjugate pair
  double d_plus = 0.0;
  double d_minus = 0.0;
  double forward_margin = 0.0;   // d_plus * delta_2 - delta_1
  double backward_margin = 0.0;  // delta_1 / d_minus - delta_2
};

StretchReport thurston_check(const ConeEstimate& cone,
                             const std::vector<ExponentEstimate>& factor_exponents);

struct SymmetryReport {
  double max_deviation = 0.0;     // sup |psi(v) - psi(theta v)| over the grid
  double u_max_angle_deg = 0.0;   // angle between u_max and the diagonal
  size_t directions_used = 0;
};

// theta is the cyclic coordinate permutation; for k == 2 the swap.
SymmetryReport symmetry_check(const OrbitDataset& data,
                              const GrowthIndicatorProfile& profile);

}  // namespace joinlab
