#pragma once

#include "vcgmm/core.hpp"

namespace vcgmm {

//! Absolute floor used by the variance stage: `relative * mean(R)`, or
//! `relative` itself when every R_i is zero.
double absolute_variance_floor(const Eigen::VectorXd& integrated_residuals, double relative);

//! R_i = int (Y_i(s) - X_i^T beta(s))^2 ds by trapezoid quadrature, clamped
//! below at 1e-3 times the absolute variance floor.
Eigen::VectorXd integrated_sq_residuals(const FunctionalDataset& data,
                                        const CoefficientEstimate& init,
                                        const EstimatorConfig& config);

//! Local-linear regression of log R on the covariates with a product
//! Epanechnikov kernel. Coordinates without spread are left out of the kernel;
//! where fewer than 20% of the subjects fall in the window it is widened.
class VarianceModel
{
public:
  static VarianceModel fit(const Eigen::MatrixXd& covariates,
                           const Eigen::VectorXd& integrated_residuals,
                           const EstimatorConfig& config);

  //! sigma^2 at the training covariates, floored.
  const Eigen::VectorXd& fitted() const noexcept { return fitted_; }

  //! sigma^2 at an arbitrary covariate vector, floored.
  double predict(const Eigen::VectorXd& x) const;

  const Eigen::VectorXd& bandwidths() const noexcept { return bandwidths_; }
  double floor() const noexcept { return floor_; }

  //! True when no covariate has spread and sigma^2 = exp(mean log R).
  bool constant_fallback() const noexcept { return constant_; }

  std::size_t size() const noexcept { return static_cast<std::size_t>(fitted_.size()); }

private:
  double predict_log(const Eigen::VectorXd& x) const;

  Eigen::MatrixXd inputs_;
  Eigen::VectorXd log_targets_;
  Eigen::VectorXd bandwidths_;  // 0 marks an excluded coordinate
  Eigen::VectorXd fitted_;
  double floor_ = 0.0;
  double mean_log_ = 0.0;
  bool constant_ = false;
};

inline VarianceModel fit_variance(const Eigen::MatrixXd& covariates,
                                  const Eigen::VectorXd& integrated_residuals,
                                  const EstimatorConfig& config)
{
  return VarianceModel::fit(covariates, integrated_residuals, config);
}

//! Instrument matrix, one row per subject.
struct InstrumentSet
{
  Eigen::MatrixXd values;  // n x q

  std::size_t q() const noexcept { return static_cast<std::size_t>(values.cols()); }

  //! M(X) = X. The just-identified case, equivalent to least squares.
  static InstrumentSet covariates_only(const Eigen::MatrixXd& covariates);
};

//! M(X_i) = (X_i, X_i / sigma^2(X_i)), q = 2p.
InstrumentSet build_instruments(const Eigen::MatrixXd& covariates, const VarianceModel& model);

} // namespace vcgmm
