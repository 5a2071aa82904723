#pragma once

#include "vcgmm/core.hpp"

#include <functional>
#include <vector>

namespace vcgmm {

//! Kernel-weighted normal equations of the local-linear fit at s0.
//! lhs = sum_{i,j} K_h(s_j - s0) W_ij W_ij^T / (nr), rhs = sum K_h W_ij Y_ij / (nr)
//! with W_ij = z_h(s_j - s0) (x) X_i.
struct LocalSystem
{
  Eigen::MatrixXd lhs;
  Eigen::VectorXd rhs;
  double s0 = 0.0;
};

struct LocalFit
{
  Eigen::VectorXd beta;          // p
  Eigen::VectorXd dbeta_scaled;  // p, h * beta'(s0)
};

//! Cross products of instruments with covariates and responses over a subject
//! subset: mx = sum_i M_i X_i^T (q x p), my row j = sum_i M_i Y_ij (r x q).
//!
//! Because all subjects share one grid, these are sufficient for every local
//! system built from the subset.
struct CrossMoments
{
  Eigen::MatrixXd mx;
  Eigen::MatrixXd my;
  std::size_t n = 0;

  static CrossMoments compute(const Eigen::MatrixXd& instruments,
                              const FunctionalDataset& data,
                              std::span<const std::size_t> subjects);
  static CrossMoments compute(const Eigen::MatrixXd& instruments,
                              const FunctionalDataset& data);
};

//! Localized moment matrices at s0: design = sum_j k_j z z^T (x) mx / (nr)
//! (2q x 2p) and response = sum_j k_j z (x) my_j / (nr) (2q). Throws
//! ErrorKind::empty_window when every kernel weight vanishes.
struct LocalMoments
{
  Eigen::MatrixXd design;
  Eigen::VectorXd response;
};

LocalMoments local_moments(const CrossMoments& cm, const Grid& grid, double s0, double h);

LocalSystem assemble_lle_system(const FunctionalDataset& data, double s0, double h);

LocalFit lle_at(const FunctionalDataset& data, double s0, double h, double ridge_jitter = 1e-10);

CoefficientEstimate lle_curve(const FunctionalDataset& data, double h, double ridge_jitter = 1e-10);

//! Local-linear fit from precomputed cross moments (instruments = covariates).
CoefficientEstimate lle_curve(const CrossMoments& cm, const Grid& grid, double h, double ridge_jitter);

// Bandwidth selection --------------------------------------------------------

//! Fits a coefficient curve on the given training subjects at bandwidth h.
using CurveFitter =
  std::function<CoefficientEstimate(std::span<const std::size_t> train, double h)>;

//! Fold label per subject: a seeded shuffle followed by round-robin labels.
std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed);

//! sum over subjects i and grid points j of (Y_ij - X_i^T beta^{-fold(i)}(s_j; h))^2 / (nr).
double cv_score(const FunctionalDataset& data,
                std::span<const std::size_t> fold_of,
                std::size_t folds,
                double h,
                const CurveFitter& fit);

struct BandwidthSelection
{
  double bandwidth = 0.0;
  std::vector<double> candidates;
  std::vector<double> scores;  // +inf where the fit failed
};

//! K-fold CV over config.bandwidths_for(grid); ties go to the larger h.
//! Candidates are scored on up to config.workers threads.
BandwidthSelection cv_bandwidth(const FunctionalDataset& data,
                                const EstimatorConfig& config,
                                const CurveFitter& fit);

CurveFitter lle_fitter(const FunctionalDataset& data, double ridge_jitter);

} // namespace vcgmm
