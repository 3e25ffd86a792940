#pragma once

// Fractal dimension of sampled attractors.
//
// n(M, eps) is counted with axis-aligned boxes of side eps on a grid anchored
// at the cloud's minimum corner. Box and ball covering numbers differ by a
// dimension-dependent constant factor, which does not change the slope of
// ln n(M, eps) against ln(1/eps).

#include "sdd/integrator.hpp"
#include "sdd/model.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace sdd {

struct PointCloud {
  Matrix points;  // one point per row
  std::string meta;
  std::uint64_t seed = 0;
  std::vector<std::string> warnings;

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  void validate() const;
};

struct DimensionEstimate {
  std::vector<double> epsilons;     // descending
  std::vector<std::size_t> counts;  // n(M, eps), or pair counts for the correlation estimator
  double slope = 0.0;
  double residual = 0.0;  // RMS residual of the log-log fit
  std::pair<std::size_t, std::size_t> window{0, 0};  // [first, last) rungs used
};

// Geometric ladder diam * ratio^k, k = 1..rungs, with diam the largest
// coordinate extent of the cloud (1 when the cloud is a single point).
std::vector<double> default_ladder(const PointCloud& cloud, std::size_t rungs = 8, double ratio = 0.5);

// Occupied boxes of side eps.
std::size_t box_count(const PointCloud& cloud, double eps);

// Box-counting estimate. Without an explicit window the fit drops the two
// coarsest rungs and every rung whose count reaches a fifth of the sample size.
DimensionEstimate box_counting(const PointCloud& cloud, const std::vector<double>& eps_ladder,
                               std::optional<std::pair<std::size_t, std::size_t>> window = std::nullopt);

// Grassberger-Procaccia: slope of ln C(r) against ln r with C(r) the fraction
// of point pairs closer than r. Radii with no pairs are left out of the fit.
DimensionEstimate correlation_dimension(const PointCloud& cloud, const std::vector<double>& radii);

// ln(mZ) / ln(2 / (1 + gamma)), the covering bound for a set with the
// squeezing property; mZ is the packing count at radius 4 L_K / (1 - gamma).
double thmA6_bound(double gamma, double L_K, double mZ_value);

struct AttractorSampling {
  std::size_t n_traj = 4;
  double transient = 50.0;
  double sample_dt = 0.1;
  Eigen::Index embed_modes = 8;
  std::uint64_t seed = 1;
  // Initial coefficients are drawn uniformly from [-amplitude / k, amplitude / k].
  double amplitude = 1.0;
};

// Integrates n_traj trajectories from seeded random constant histories up to
// cfg.T_final and records the first embed_modes coefficients every sample_dt
// after the transient.
PointCloud sample_attractor(const ModelSpec& spec, const IntegratorConfig& cfg, const AttractorSampling& opts);

// Same trajectories, several embeddings at once (one cloud per entry of modes).
std::vector<PointCloud> sample_attractor_embeddings(const ModelSpec& spec, const IntegratorConfig& cfg,
                                                    const AttractorSampling& opts,
                                                    const std::vector<Eigen::Index>& modes);

}  // namespace sdd
