#include "vcgmm/fpca.hpp"

#include <algorithm>
#include <cmath>

namespace vcgmm {

Eigen::VectorXd EigenSystem::phi_at_grid(std::size_t k, std::size_t j) const
{
  const auto r = grid.size();
  Eigen::VectorXd v(static_cast<Eigen::Index>(d));
  for (std::size_t l = 0; l < d; ++l)
    v(static_cast<Eigen::Index>(l)) =
      functions(static_cast<Eigen::Index>(l * r + j), static_cast<Eigen::Index>(k));
  return v;
}

Eigen::VectorXd EigenSystem::phi_at(std::size_t k, double s) const
{
  const auto& pts = grid.points();
  const auto r = grid.size();
  if (s <= pts(0))
    return phi_at_grid(k, 0);
  if (s >= pts(pts.size() - 1))
    return phi_at_grid(k, r - 1);
  const double* first = pts.data();
  const auto hi = static_cast<std::size_t>(std::upper_bound(first, first + r, s) - first);
  const auto lo = hi - 1;
  if (s == pts(static_cast<Eigen::Index>(lo)))
    return phi_at_grid(k, lo);
  const double t = (s - grid[lo]) / (grid[hi] - grid[lo]);
  return (1.0 - t) * phi_at_grid(k, lo) + t * phi_at_grid(k, hi);
}

Eigen::VectorXd EigenSystem::filter_weights() const
{
  if (!truncated())
    fail(ErrorKind::argument, "eigensystem has no truncation; call select_truncation first");
  return eigenvalues.array() / (eigenvalues.array().square() + alpha);
}

namespace {

Eigen::VectorXd lined_sqrt_weights(const Grid& grid, std::size_t d)
{
  const auto r = static_cast<Eigen::Index>(grid.size());
  Eigen::VectorXd w(static_cast<Eigen::Index>(d) * r);
  for (std::size_t l = 0; l < d; ++l)
    w.segment(static_cast<Eigen::Index>(l) * r, r) = grid.quadrature_weights().cwiseSqrt();
  return w;
}

// Keeps eigenpairs above the relative cutoff, in descending order, with the
// largest-magnitude entry of every function made nonnegative.
EigenSystem finish(const Grid& grid,
                   std::size_t d,
                   const Eigen::VectorXd& ascending_values,
                   const Eigen::MatrixXd& unit_vectors,  // columns match ascending_values
                   const Eigen::VectorXd& sqrt_w,
                   double min_raw)
{
  EigenSystem eig{grid, d, {}, {}, 0, 0.0, 0.0};
  eig.min_raw_eigenvalue = min_raw;
  const auto m = ascending_values.size();
  const double top = m > 0 ? ascending_values(m - 1) : 0.0;
  std::vector<Eigen::Index> keep;
  if (top > 0.0)
    for (Eigen::Index c = m - 1; c >= 0; --c)
      if (ascending_values(c) > 1e-12 * top)
        keep.push_back(c);

  const auto K = static_cast<Eigen::Index>(keep.size());
  eig.eigenvalues.resize(K);
  eig.functions.resize(sqrt_w.size(), K);
  for (Eigen::Index k = 0; k < K; ++k) {
    eig.eigenvalues(k) = ascending_values(keep[static_cast<std::size_t>(k)]);
    Eigen::VectorXd phi = unit_vectors.col(keep[static_cast<std::size_t>(k)]).cwiseQuotient(sqrt_w);
    Eigen::Index arg = 0;
    phi.cwiseAbs().maxCoeff(&arg);
    if (phi(arg) < 0.0)
      phi = -phi;
    eig.functions.col(k) = phi;
  }
  return eig;
}

} // namespace

EigenSystem lineup_eigen(const MomentCovariance& cov)
{
  if (!cov.lined.allFinite())
    fail(ErrorKind::validation, "moment covariance has non-finite entries");
  const auto dr = static_cast<Eigen::Index>(cov.d * cov.grid.size());
  if (cov.lined.rows() != dr || cov.lined.cols() != dr)
    fail(ErrorKind::dimension, "lined-up covariance has the wrong size");

  const Eigen::VectorXd sw = lined_sqrt_weights(cov.grid, cov.d);
  const Eigen::MatrixXd sym = 0.5 * (cov.lined + cov.lined.transpose());
  const Eigen::MatrixXd weighted = sw.asDiagonal() * sym * sw.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(weighted);
  if (es.info() != Eigen::Success)
    fail(ErrorKind::validation, "eigendecomposition of the moment covariance did not converge");
  const double min_raw = es.eigenvalues().size() > 0 ? es.eigenvalues()(0) : 0.0;
  return finish(cov.grid, cov.d, es.eigenvalues(), es.eigenvectors(), sw, min_raw);
}

EigenSystem lineup_eigen(const MomentSample& sample)
{
  if (!sample.lined.allFinite())
    fail(ErrorKind::validation, "moment sample has non-finite entries");
  if (sample.n() < 2)
    fail(ErrorKind::argument, "moment covariance needs at least 2 subjects");
  const Eigen::VectorXd sw = lined_sqrt_weights(sample.grid, sample.d);
  // C = B^T B with B = G sqrt(W) / sqrt(n); the nonzero spectrum of B^T B
  // equals that of the n x n matrix B B^T.
  const Eigen::MatrixXd B =
    (sample.lined * sw.asDiagonal()) / std::sqrt(static_cast<double>(sample.n()));
  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(B.rows(), B.rows());
  gram.selfadjointView<Eigen::Lower>().rankUpdate(B);
  gram.triangularView<Eigen::StrictlyUpper>() = gram.transpose();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram);
  if (es.info() != Eigen::Success)
    fail(ErrorKind::validation, "eigendecomposition of the moment Gram matrix did not converge");

  const Eigen::VectorXd& vals = es.eigenvalues();
  Eigen::MatrixXd u = Eigen::MatrixXd::Zero(B.cols(), vals.size());
  for (Eigen::Index c = 0; c < vals.size(); ++c)
    if (vals(c) > 0.0)
      u.col(c) = B.transpose() * es.eigenvectors().col(c) / std::sqrt(vals(c));
  double min_raw = vals.size() > 0 ? vals(0) : 0.0;
  if (B.cols() > B.rows())
    min_raw = std::min(min_raw, 0.0);
  return finish(sample.grid, sample.d, vals, u, sw, min_raw);
}

EigenSystem select_truncation(EigenSystem eig, double fve)
{
  if (!(fve > 0.0 && fve <= 1.0))
    fail(ErrorKind::argument, "fve must lie in (0, 1]");
  if (eig.size() == 0 || !(eig.eigenvalues(0) > 0.0))
    fail(ErrorKind::degenerate_covariance, "moment covariance has no positive eigenvalue");
  const auto& lam = eig.eigenvalues;
  const double total = lam.sum();
  double cum = 0.0;
  std::size_t k0 = eig.size();
  for (Eigen::Index k = 0; k < lam.size(); ++k) {
    cum += lam(k);
    if (cum / total >= fve) {
      k0 = static_cast<std::size_t>(k) + 1;
      break;
    }
  }
  eig.kappa0 = k0;
  const double next = k0 < eig.size() ? lam(static_cast<Eigen::Index>(k0)) : 0.0;
  eig.alpha = std::max(next * next, 1e-8 * lam(0) * lam(0));
  return eig;
}

} // namespace vcgmm
