#include "vcgmm/hetero.hpp"

#include "vcgmm/kernel.hpp"

#include <algorithm>
#include <cmath>

namespace vcgmm {

double absolute_variance_floor(const Eigen::VectorXd& integrated_residuals, double relative)
{
  const double m = integrated_residuals.size() > 0 ? integrated_residuals.mean() : 0.0;
  return m > 0.0 ? relative * m : relative;
}

Eigen::VectorXd integrated_sq_residuals(const FunctionalDataset& data,
                                        const CoefficientEstimate& init,
                                        const EstimatorConfig& config)
{
  if (!(init.grid == data.grid()))
    fail(ErrorKind::dimension, "initial estimate is on a different grid");
  if (init.p() != data.p())
    fail(ErrorKind::dimension, "initial estimate has the wrong number of coefficients");

  const Eigen::MatrixXd fitted = data.covariates() * init.beta.transpose();  // n x r
  const Eigen::MatrixXd sq = (data.responses() - fitted).array().square().matrix();
  const auto& w = data.grid().quadrature_weights();
  Eigen::VectorXd R = sq * w;
  const double clamp = 1e-3 * absolute_variance_floor(R, config.variance_floor);
  return R.cwiseMax(clamp);
}

namespace {

constexpr double min_support_fraction = 0.2;

// Local-linear fit of the log target at x. Returns false when the weighted
// system is too thin to be trusted at these bandwidths.
bool local_log_fit(const Eigen::MatrixXd& inputs,
                   const Eigen::VectorXd& targets,
                   const Eigen::VectorXd& bandwidths,
                   const Eigen::VectorXd& x,
                   Eigen::Index min_support,
                   double& out)
{
  const auto n = inputs.rows();
  std::vector<Eigen::Index> active;
  for (Eigen::Index c = 0; c < bandwidths.size(); ++c)
    if (bandwidths(c) > 0.0)
      active.push_back(c);
  const auto m = static_cast<Eigen::Index>(active.size()) + 1;

  Eigen::MatrixXd lhs = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd z(m);
  Eigen::Index support = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double k = 1.0;
    z(0) = 1.0;
    for (std::size_t a = 0; a < active.size(); ++a) {
      const auto c = active[a];
      const double u = (inputs(i, c) - x(c)) / bandwidths(c);
      k *= kernel_eval(u);
      if (k == 0.0)
        break;
      z(static_cast<Eigen::Index>(a) + 1) = u;
    }
    if (k == 0.0)
      continue;
    ++support;
    lhs.noalias() += k * z * z.transpose();
    rhs.noalias() += (k * targets(i)) * z;
  }
  if (support < std::max(m + 1, min_support))
    return false;
  Eigen::LDLT<Eigen::MatrixXd> ldlt(lhs);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-8)
    return false;
  out = ldlt.solve(rhs)(0);
  return std::isfinite(out);
}

} // namespace

double VarianceModel::predict_log(const Eigen::VectorXd& x) const
{
  if (x.size() != inputs_.cols())
    fail(ErrorKind::dimension, "covariate vector has the wrong length");
  if (constant_)
    return mean_log_;
  // Sparse regions (the tails of X) get a locally widened window: the
  // bandwidths grow geometrically until the window holds a fixed share of the
  // sample and the local design is well posed. log R is noisy (log-chi-square
  // errors), so a handful of tail points would otherwise set the slope.
  const auto min_support =
    static_cast<Eigen::Index>(std::ceil(min_support_fraction * static_cast<double>(inputs_.rows())));
  Eigen::VectorXd h = bandwidths_;
  for (int attempt = 0; attempt < 40; ++attempt) {
    double v = 0.0;
    if (local_log_fit(inputs_, log_targets_, h, x, min_support, v))
      return v;
    h *= 1.25;
  }
  return mean_log_;
}

double VarianceModel::predict(const Eigen::VectorXd& x) const
{
  return std::max(std::exp(predict_log(x)), floor_);
}

VarianceModel VarianceModel::fit(const Eigen::MatrixXd& covariates,
                                 const Eigen::VectorXd& integrated_residuals,
                                 const EstimatorConfig& config)
{
  const auto n = covariates.rows();
  const auto p = covariates.cols();
  if (n < 3)
    fail(ErrorKind::argument, "variance model needs at least 3 subjects");
  if (integrated_residuals.size() != n)
    fail(ErrorKind::dimension, "integrated residuals do not match the subject count");
  if ((integrated_residuals.array() <= 0.0).any() || !integrated_residuals.allFinite())
    fail(ErrorKind::argument, "integrated residuals must be positive and finite");

  VarianceModel vm;
  vm.inputs_ = covariates;
  vm.log_targets_ = integrated_residuals.array().log().matrix();
  vm.mean_log_ = vm.log_targets_.mean();
  vm.floor_ = absolute_variance_floor(integrated_residuals, config.variance_floor);
  vm.bandwidths_ = Eigen::VectorXd::Zero(p);

  const double rate = std::pow(static_cast<double>(n), -1.0 / (4.0 + static_cast<double>(p)));
  bool any = false;
  for (Eigen::Index c = 0; c < p; ++c) {
    const auto col = covariates.col(c).array();
    const double sd = std::sqrt((col - col.mean()).square().sum() / static_cast<double>(n - 1));
    if (sd > 1e-12 * std::max(1.0, col.abs().maxCoeff())) {
      vm.bandwidths_(c) = 1.06 * sd * rate;
      any = true;
    }
  }
  vm.constant_ = !any;

  vm.fitted_.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    vm.fitted_(i) = vm.predict(covariates.row(i).transpose());
  return vm;
}

InstrumentSet InstrumentSet::covariates_only(const Eigen::MatrixXd& covariates)
{
  return InstrumentSet{covariates};
}

InstrumentSet build_instruments(const Eigen::MatrixXd& covariates, const VarianceModel& model)
{
  if (static_cast<std::size_t>(covariates.rows()) != model.size())
    fail(ErrorKind::dimension, "variance model was fitted on a different sample");
  const auto p = covariates.cols();
  InstrumentSet inst;
  inst.values.resize(covariates.rows(), 2 * p);
  inst.values.leftCols(p) = covariates;
  inst.values.rightCols(p) = covariates.array().colwise() / model.fitted().array();
  return inst;
}

} // namespace vcgmm
