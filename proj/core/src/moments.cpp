#include "vcgmm/moments.hpp"

#include "vcgmm/kernel.hpp"
#include "window.hpp"

#include <cmath>

namespace vcgmm {

Eigen::VectorXd MomentSample::at(std::size_t subject, std::size_t j) const
{
  const auto r = grid.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(d));
  for (std::size_t l = 0; l < d; ++l)
    g(static_cast<Eigen::Index>(l)) =
      lined(static_cast<Eigen::Index>(subject), static_cast<Eigen::Index>(l * r + j));
  return g;
}

Eigen::VectorXd MomentSample::mean_at(std::size_t j) const
{
  const auto r = grid.size();
  Eigen::VectorXd g(static_cast<Eigen::Index>(d));
  for (std::size_t l = 0; l < d; ++l)
    g(static_cast<Eigen::Index>(l)) = lined.col(static_cast<Eigen::Index>(l * r + j)).mean();
  return g;
}

Eigen::MatrixXd MomentCovariance::block(std::size_t j, std::size_t jp) const
{
  const auto r = grid.size();
  const auto dd = static_cast<Eigen::Index>(d);
  Eigen::MatrixXd b(dd, dd);
  for (std::size_t l = 0; l < d; ++l)
    for (std::size_t lp = 0; lp < d; ++lp)
      b(static_cast<Eigen::Index>(l), static_cast<Eigen::Index>(lp)) =
        lined(static_cast<Eigen::Index>(l * r + j), static_cast<Eigen::Index>(lp * r + jp));
  return b;
}

Eigen::MatrixXd moment_eval(const FunctionalDataset& data,
                            const InstrumentSet& instruments,
                            const Eigen::VectorXd& gamma_at_s0,
                            double h,
                            double s0)
{
  if (!(h > 0.0))
    fail(ErrorKind::argument, "bandwidth must be positive");
  if (static_cast<std::size_t>(instruments.values.rows()) != data.n())
    fail(ErrorKind::argument, "instrument rows do not match the subject count");
  const auto p = static_cast<Eigen::Index>(data.p());
  if (gamma_at_s0.size() != 2 * p)
    fail(ErrorKind::argument, "gamma(s0) must have length 2p");

  const auto& x = data.covariates();
  const auto& y = data.responses();
  const auto& grid = data.grid();
  const Eigen::VectorXd level = x * gamma_at_s0.head(p);
  const Eigen::VectorXd slope = x * gamma_at_s0.tail(p);

  const auto n = static_cast<Eigen::Index>(data.n());
  Eigen::VectorXd a0 = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd a1 = Eigen::VectorXd::Zero(n);
  const auto [lo, hi] = detail::kernel_window(grid, s0, h);
  for (std::size_t j = lo; j < hi; ++j) {
    const double u = (grid[j] - s0) / h;
    const double k = kernel_eval(u) / h;
    if (k <= 0.0)
      continue;
    const Eigen::VectorXd e = y.col(static_cast<Eigen::Index>(j)) - level - u * slope;
    a0.noalias() += k * e;
    a1.noalias() += (k * u) * e;
  }
  const double inv_r = 1.0 / static_cast<double>(grid.size());
  const auto q = instruments.values.cols();
  Eigen::MatrixXd g(2 * q, n);
  g.topRows(q) = instruments.values.transpose() * (inv_r * a0).asDiagonal();
  g.bottomRows(q) = instruments.values.transpose() * (inv_r * a1).asDiagonal();
  return g;
}

Eigen::MatrixXd moment_eval(const FunctionalDataset& data,
                            const InstrumentSet& instruments,
                            const CoefficientEstimate& gamma,
                            double h,
                            double s0)
{
  if (!(gamma.grid == data.grid()))
    fail(ErrorKind::argument, "coefficient path is on a different grid");
  const auto& pts = gamma.grid.points();
  for (Eigen::Index j = 0; j < pts.size(); ++j)
    if (pts(j) == s0)
      return moment_eval(data, instruments, gamma.gamma(static_cast<std::size_t>(j)), h, s0);
  fail(ErrorKind::argument, "s0 = " + format_real(s0) + " is not a grid point of the coefficient path");
}

MomentSample moment_sample(const FunctionalDataset& data,
                           const InstrumentSet& instruments,
                           const CoefficientEstimate& gamma,
                           double h)
{
  if (!(gamma.grid == data.grid()))
    fail(ErrorKind::argument, "coefficient path is on a different grid");
  const auto r = data.r();
  const auto d = 2 * instruments.q();
  MomentSample ms{data.grid(), d, Eigen::MatrixXd(static_cast<Eigen::Index>(data.n()),
                                                  static_cast<Eigen::Index>(d * r))};
  for (std::size_t j = 0; j < r; ++j) {
    const Eigen::MatrixXd g = moment_eval(data, instruments, gamma.gamma(j), h, data.grid()[j]);
    for (std::size_t l = 0; l < d; ++l)
      ms.lined.col(static_cast<Eigen::Index>(l * r + j)) = g.row(static_cast<Eigen::Index>(l)).transpose();
  }
  return ms;
}

MomentCovariance moment_covariance(const MomentSample& sample)
{
  if (sample.n() < 2)
    fail(ErrorKind::argument, "moment covariance needs at least 2 subjects");
  MomentCovariance cov{sample.grid, sample.d, Eigen::MatrixXd()};
  const auto dr = sample.lined.cols();
  cov.lined = Eigen::MatrixXd::Zero(dr, dr);
  cov.lined.selfadjointView<Eigen::Lower>().rankUpdate(sample.lined.transpose(),
                                                        1.0 / static_cast<double>(sample.n()));
  cov.lined.triangularView<Eigen::StrictlyUpper>() = cov.lined.transpose();
  return cov;
}

} // namespace vcgmm
