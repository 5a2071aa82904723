#pragma once

#include "vcgmm/moments.hpp"

namespace vcgmm {

//! Eigenpairs of the lined-up moment covariance operator.
//!
//! Eigenfunctions are vector functions on the grid, stored lined-up as the
//! columns of `functions` (dr x K) and orthonormal in the integrated sense:
//! sum_l int phi_{k,l} phi_{k',l} ds = 1(k = k') under the grid's quadrature.
//!
//! The estimation error of these eigenpairs is governed by the rates
//! delta_n1(h) = {(1 + (hr)^-1) log n / n}^1/2 and
//! delta_n2(h) = {(1 + (hr)^-1 + (hr)^-2) log n / n}^1/2; they are not
//! computed at runtime.
struct EigenSystem
{
  Grid grid;
  std::size_t d = 0;
  Eigen::VectorXd eigenvalues;  // descending, all > 0
  Eigen::MatrixXd functions;    // dr x K
  std::size_t kappa0 = 0;       // 0 until select_truncation
  double alpha = 0.0;
  double min_raw_eigenvalue = 0.0;

  std::size_t size() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  bool truncated() const noexcept { return kappa0 > 0; }

  //! phi_k(s_j) as a d-vector.
  Eigen::VectorXd phi_at_grid(std::size_t k, std::size_t j) const;

  //! phi_k(s), linear interpolation between grid points, constant beyond the ends.
  Eigen::VectorXd phi_at(std::size_t k, double s) const;

  //! Spectral filter weights lambda_k / (lambda_k^2 + alpha). Requires truncation.
  Eigen::VectorXd filter_weights() const;
};

//! Decomposes the full lined-up matrix (symmetrized) with square-root
//! quadrature weighting. Eigenvalues below 1e-12 * lambda_1 are dropped.
EigenSystem lineup_eigen(const MomentCovariance& cov);

//! Same eigenpairs from the n x n Gram matrix of the sample, which is much
//! cheaper when n < dr. Nonzero spectra coincide with the covariance route.
EigenSystem lineup_eigen(const MomentSample& sample);

//! kappa0 = smallest K reaching `fve` of the eigenvalue mass;
//! alpha = max(lambda_{kappa0+1}^2, 1e-8 lambda_1^2).
EigenSystem select_truncation(EigenSystem eig, double fve);

} // namespace vcgmm
