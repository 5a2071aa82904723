#pragma once

#include "vcgmm/fpca.hpp"
#include "vcgmm/hetero.hpp"
#include "vcgmm/locallinear.hpp"

#include <nlohmann/json.hpp>

namespace vcgmm {

//! Projections of the localized moment conditions onto each eigenfunction.
//! Column k of `design` is X_k(s0) (2p), `response(k)` is Y_k(s0).
struct SpectralSystem
{
  Eigen::MatrixXd design;    // 2p x K
  Eigen::VectorXd response;  // K
  Eigen::VectorXd weights;   // K, lambda_k / (lambda_k^2 + alpha)

  //! Normal equations sum_k w_k X_k X_k^T and sum_k w_k X_k Y_k.
  Eigen::MatrixXd normal_matrix() const;
  Eigen::VectorXd normal_rhs() const;
};

SpectralSystem spectral_system_at(const FunctionalDataset& data,
                                  const InstrumentSet& instruments,
                                  const EigenSystem& eig,
                                  double h,
                                  double s0);

//! Projected system from cross moments of a subject subset.
SpectralSystem spectral_system_at(const CrossMoments& cm,
                                  const Grid& grid,
                                  const EigenSystem& eig,
                                  double h,
                                  double s0);

LocalFit gmm_at(const FunctionalDataset& data,
                const InstrumentSet& instruments,
                const EigenSystem& eig,
                double h,
                double s0,
                double ridge_jitter = 1e-10);

CoefficientEstimate gmm_curve(const FunctionalDataset& data,
                              const InstrumentSet& instruments,
                              const EigenSystem& eig,
                              double h,
                              double ridge_jitter = 1e-10);

CurveFitter gmm_fitter(const FunctionalDataset& data,
                       const InstrumentSet& instruments,
                       const EigenSystem& eig,
                       double ridge_jitter);

struct EstimationDiagnostics
{
  double bandwidth_init = 0.0;      // CV choice of the initial fit
  double bandwidth_gmm_cv = 0.0;    // CV choice for the GMM fit
  double bandwidth_gmm = 0.0;       // after shrink
  std::vector<double> cv_candidates;
  std::vector<double> cv_scores_init;
  std::vector<double> cv_scores_gmm;
  std::size_t kappa0 = 0;
  double alpha = 0.0;
  std::vector<double> eigenvalues;
  double min_raw_eigenvalue = 0.0;
  double sigma2_min = 0.0;
  double sigma2_median = 0.0;
  double sigma2_max = 0.0;
  double sigma2_mean = 0.0;
  bool variance_constant_fallback = false;
  double fve = 0.0;
  double bandwidth_shrink = 0.0;
  std::size_t cv_folds = 0;
};

struct EstimationResult
{
  CoefficientEstimate lle;
  CoefficientEstimate llgmm;
  EstimationDiagnostics diagnostics;
};

//! Full multi-step procedure: CV local-linear fit, variance model and
//! instruments, moment covariance eigensystem, CV GMM bandwidth with shrink,
//! final GMM fit. Failures are rethrown as StageError.
EstimationResult estimate_full(const FunctionalDataset& data, const EstimatorConfig& config);

nlohmann::json to_json(const EstimationDiagnostics& diag);

} // namespace vcgmm
