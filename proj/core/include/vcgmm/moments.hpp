#pragma once

#include "vcgmm/core.hpp"
#include "vcgmm/hetero.hpp"

namespace vcgmm {

// Lined-up layout: the d-variate moment process on the r-point grid is stored
// as one vector of length d*r whose entry l*r + j holds component l at s_j.

//! Per-subject moment processes g_i(s_j), lined up row-wise (n x dr).
struct MomentSample
{
  Grid grid;
  std::size_t d = 0;
  Eigen::MatrixXd lined;

  std::size_t n() const noexcept { return static_cast<std::size_t>(lined.rows()); }
  Eigen::VectorXd at(std::size_t subject, std::size_t j) const;
  //! n^-1 sum_i g_i(s_j)
  Eigen::VectorXd mean_at(std::size_t j) const;
};

//! C(s_j, s_j') = n^-1 sum_i g_i(s_j) g_i(s_j')^T, stored lined-up (dr x dr).
struct MomentCovariance
{
  Grid grid;
  std::size_t d = 0;
  Eigen::MatrixXd lined;

  Eigen::MatrixXd block(std::size_t j, std::size_t jp) const;
};

//! g_i(gamma(s0)) = r^-1 sum_j K_h(s_j - s0) z_h(s_j - s0) (x) M(X_i)(Y_ij - W_ij^T gamma)
//! for every subject, as columns of a (2q x n) matrix.
Eigen::MatrixXd moment_eval(const FunctionalDataset& data,
                            const InstrumentSet& instruments,
                            const Eigen::VectorXd& gamma_at_s0,
                            double h,
                            double s0);

//! Same, taking gamma(s0) from an estimate; s0 must be a grid point of it.
Eigen::MatrixXd moment_eval(const FunctionalDataset& data,
                            const InstrumentSet& instruments,
                            const CoefficientEstimate& gamma,
                            double h,
                            double s0);

//! Moment processes evaluated at every grid point, gamma held at `gamma`.
MomentSample moment_sample(const FunctionalDataset& data,
                           const InstrumentSet& instruments,
                           const CoefficientEstimate& gamma,
                           double h);

MomentCovariance moment_covariance(const MomentSample& sample);

} // namespace vcgmm
