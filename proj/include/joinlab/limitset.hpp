#pragma once

// Boundary-side numerics: limit-set samples, box-counting dimension,
// directional (strip) limit sets, weighted-atom approximations of the
// Patterson-Sullivan measures, shadows, and the dimension / shadow-lemma /
// ball-decay checks.

#include <Eigen/Dense>
#include <vector>

#include "joinlab/indicator.hpp"
#include "joinlab/orbit.hpp"
#include "joinlab/spectrum.hpp"

namespace joinlab {

struct BoundarySampleSet {
  const OrbitDataset* data = nullptr;
  std::vector<uint32_t> idx;  // rows loxodromic in every factor, deep enough
  double norm_floor = 0.0;
  size_t size() const { return idx.size(); }
};

// One sample per all-factor-loxodromic point with |mu| >= norm_floor
// (norm_floor <= 0 selects the median |mu|).
BoundarySampleSet boundary_samples(const OrbitDataset& data, double norm_floor = 0.0);

// Boundary samples of the strip around direction u, width R.
BoundarySampleSet directional_samples(const OrbitDataset& data, const Eigen::VectorXd& u,
                                      double R, double norm_floor = 0.0);

struct DimensionEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  int scale_lo = 0;  // regression window, dyadic exponents
  int scale_hi = 0;
  std::vector<std::pair<int, size_t>> counts;  // occupied boxes per scale
  size_t samples = 0;
  bool low_confidence = false;  // fewer than 10^4 samples
};

// Box-counting over the dyadic grid on the product of factor spheres via
// two stereographic charts per sphere; metric is the max over factors of
// the chordal distance.
DimensionEstimate box_dimension(const BoundarySampleSet& samples, int scale_min = 2,
                                int scale_max = 18);

// Synthetic-input overload for tests: per-factor point lists.
DimensionEstimate box_dimension(const std::vector<std::vector<Eigen::Vector3d>>& points,
                                const std::vector<FactorKind>& kinds, int scale_min = 2,
                                int scale_max = 18);

struct PSMeasureApprox {
  const OrbitDataset* data = nullptr;
  Eigen::VectorXd functional;  // psi_u as a vector: weight = e^{-s <functional, mu>}
  double s = 0.0;
  double normalizer = 0.0;        // sum of unnormalized weights
  std::vector<uint32_t> atoms;    // rows carrying mass (loxodromic)
  std::vector<double> weight;     // positive, sums to 1
  size_t dropped = 0;             // non-loxodromic rows dropped
};

// Weighted-atom approximation at parameter s; refuses s at or below the
// estimated abscissa of the defining series.
PSMeasureApprox ps_measure(const OrbitDataset& data, const DualPair& dual, double s);

// Abscissa of the series with f = psi_u(mu); the normalization predicts 1.
ExponentEstimate psu_abscissa(const OrbitDataset& data, const DualPair& dual,
                              const EstimatorParams& params = {});

// Same, restricted to the strip of width R around the dual direction.
ExponentEstimate strip_abscissa(const OrbitDataset& data, const DualPair& dual, double R,
                                const EstimatorParams& params = {});

struct Shadow {
  uint32_t point = 0;
  std::vector<Eigen::Vector3d> center;  // attracting point tuple
  std::vector<double> radii;            // e^{R - mu_i}, chordal
};

Shadow shadow(const OrbitDataset& data, size_t index, double R);

// Fixed-grid spatial index on the sphere charts over a set of rows; built
// once, immutable, safe for concurrent queries.
class BallIndex {
 public:
  BallIndex(const OrbitDataset& data, const std::vector<uint32_t>& rows);

  // Total weight (per `weights`, parallel to `rows`) and atom count inside
  // the product of per-factor chordal balls.
  std::pair<double, size_t> query(const std::vector<Eigen::Vector3d>& centers,
                                  const std::vector<double>& radii,
                                  const std::vector<double>& weights) const;

 private:
  struct FactorGrid {
    std::vector<std::pair<uint64_t, uint32_t>> cells;  // (cell key, slot), sorted
  };
  const OrbitDataset* data_;
  std::vector<uint32_t> rows_;
  std::vector<FactorGrid> grids_;  // per factor
  int level_;
};

struct ShadowLemmaReport {
  size_t sampled = 0;
  size_t empty_shadows = 0;  // truncation artifacts, excluded from the spread
  double spread = 0.0;       // max - min of log nu(shadow) + psi_u(mu)
  double lo = 0.0, hi = 0.0;
  bool pass = false;  // spread <= log 400
};

ShadowLemmaReport shadow_lemma_check(const PSMeasureApprox& measure,
                                     const BallIndex& index, double R,
                                     size_t sample_count, Rng& rng);

struct BallDecayReport {
  size_t centers_requested = 0;
  size_t centers_used = 0;  // centers with a usable regression window
  std::vector<double> slopes;
  double delta_u = 0.0;
  double upper_pass_fraction = 0.0;  // slope <= -delta_u + 0.15
  double lower_pass_fraction = 0.0;  // slope >= -delta_u (1 + eps) - 0.15
  double joint_pass_fraction = 0.0;
};

BallDecayReport ball_decay_check(const PSMeasureApprox& measure, const BallIndex& index,
                                 const BoundarySampleSet& centers,
                                 const Eigen::VectorXd& u, double delta_u,
                                 const std::vector<double>& t_grid, size_t center_count,
                                 Rng& rng);

struct DimensionChecksReport {
  DimensionEstimate dim_limit_set;
  double max_factor_exponent = 0.0;
  ExponentEstimate delta_min;
  ExponentEstimate delta_max;
  double identity_gap_box = 0.0;   // |box dim - max delta_rho|
  double identity_gap_min = 0.0;   // |delta_min - max delta_rho|
  struct Directional {
    Eigen::VectorXd u;
    double delta_u = 0.0;
    double bracket_lo = 0.0;  // delta_u / max component - 0.2
    double bracket_hi = 0.0;  // delta_u / min component + 0.2
    DimensionEstimate dim;
    bool pass = false;
    bool ok = true;
  };
  std::vector<Directional> directional;
  double delta_max_profile = 0.0;  // max over grid of psi / max component
  double dmax_gap = 0.0;           // |delta_max - delta_max_profile|
  double chain_slack = 0.0;        // how badly the exponent chain is violated
};

DimensionChecksReport dimension_checks(const OrbitDataset& data,
                                       const GrowthIndicatorProfile& profile,
                                       const std::vector<ExponentEstimate>& factor_exponents,
                                       const ExponentEstimate& delta, double strip_R,
                                       const EstimatorParams& params = {});

}  // namespace joinlab
