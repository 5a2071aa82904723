#include "vcgmm/core.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace vcgmm {

namespace {

bool all_finite(const Eigen::MatrixXd& m)
{
  return m.allFinite();
}

} // namespace

Grid::Grid(std::vector<double> points)
{
  const auto r = points.size();
  if (r < 2)
    fail(ErrorKind::validation, "grid needs at least 2 points, got " + std::to_string(r));
  for (std::size_t j = 0; j < r; ++j) {
    const double s = points[j];
    if (!std::isfinite(s) || s < 0.0 || s > 1.0)
      fail(ErrorKind::validation,
           "grid point " + std::to_string(j) + " = " + format_real(s) + " outside [0, 1]");
    if (j == 0 && s <= 0.0)
      fail(ErrorKind::validation, "first grid point must be positive (Delta(s_1) = s_1 > 0)");
    if (j > 0 && !(s > points[j - 1]))
      fail(ErrorKind::validation,
           "grid must be strictly increasing: s_" + std::to_string(j) + " = " + format_real(s) +
             " after " + format_real(points[j - 1]));
  }

  const auto rr = static_cast<Eigen::Index>(r);
  points_ = Eigen::Map<const Eigen::VectorXd>(points.data(), rr);
  spacings_.resize(rr);
  spacings_(0) = points_(0);
  for (Eigen::Index j = 1; j < rr; ++j)
    spacings_(j) = points_(j) - points_(j - 1);

  // Constant extension over [0, s_1] puts the whole leading panel on w_1.
  weights_.resize(rr);
  weights_(0) = points_(0) + 0.5 * spacings_(1);
  for (Eigen::Index j = 1; j + 1 < rr; ++j)
    weights_(j) = 0.5 * (spacings_(j) + spacings_(j + 1));
  weights_(rr - 1) = 0.5 * spacings_(rr - 1);
}

Grid Grid::midpoint(std::size_t r)
{
  std::vector<double> pts(r);
  for (std::size_t j = 0; j < r; ++j)
    pts[j] = (static_cast<double>(j) + 0.5) / static_cast<double>(r);
  return Grid(std::move(pts));
}

FunctionalDataset::FunctionalDataset(Grid grid,
                                     Eigen::MatrixXd responses,
                                     Eigen::MatrixXd covariates,
                                     std::vector<std::string> ids)
  : grid_(std::move(grid))
  , responses_(std::move(responses))
  , covariates_(std::move(covariates))
  , ids_(std::move(ids))
{
  const auto n = responses_.rows();
  if (n < 2)
    fail(ErrorKind::validation, "dataset needs at least 2 subjects, got " + std::to_string(n));
  if (covariates_.rows() != n)
    fail(ErrorKind::dimension,
         "responses have " + std::to_string(n) + " rows but covariates have " +
           std::to_string(covariates_.rows()));
  if (covariates_.cols() < 1)
    fail(ErrorKind::validation, "dataset needs at least one covariate");
  if (static_cast<std::size_t>(responses_.cols()) != grid_.size())
    fail(ErrorKind::dimension,
         "responses have " + std::to_string(responses_.cols()) + " columns for a grid of " +
           std::to_string(grid_.size()) + " points");
  if (!all_finite(responses_))
    fail(ErrorKind::validation, "responses contain non-finite entries");
  if (!all_finite(covariates_))
    fail(ErrorKind::validation, "covariates contain non-finite entries");
  if (ids_.empty()) {
    ids_.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      ids_.push_back("s" + std::to_string(i + 1));
  } else if (ids_.size() != static_cast<std::size_t>(n)) {
    fail(ErrorKind::dimension, "id count does not match subject count");
  }
}

FunctionalDataset FunctionalDataset::subset(std::span<const std::size_t> subjects) const
{
  const auto m = static_cast<Eigen::Index>(subjects.size());
  Eigen::MatrixXd y(m, responses_.cols());
  Eigen::MatrixXd x(m, covariates_.cols());
  std::vector<std::string> ids;
  ids.reserve(subjects.size());
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto i = subjects[static_cast<std::size_t>(k)];
    if (i >= n())
      fail(ErrorKind::argument, "subject index out of range");
    y.row(k) = responses_.row(static_cast<Eigen::Index>(i));
    x.row(k) = covariates_.row(static_cast<Eigen::Index>(i));
    ids.push_back(ids_[i]);
  }
  return FunctionalDataset(grid_, std::move(y), std::move(x), std::move(ids));
}

Eigen::VectorXd CoefficientEstimate::gamma(std::size_t j) const
{
  const auto p = beta.cols();
  Eigen::VectorXd g(2 * p);
  g.head(p) = beta.row(static_cast<Eigen::Index>(j)).transpose();
  g.tail(p) = dbeta_scaled.row(static_cast<Eigen::Index>(j)).transpose();
  return g;
}

void CoefficientEstimate::validate() const
{
  const auto r = static_cast<Eigen::Index>(grid.size());
  if (beta.rows() != r || dbeta_scaled.rows() != r)
    fail(ErrorKind::dimension, "estimate rows do not match the grid size");
  if (beta.cols() < 1 || dbeta_scaled.cols() != beta.cols())
    fail(ErrorKind::dimension, "estimate beta/dbeta column counts disagree");
  if (!beta.allFinite() || !dbeta_scaled.allFinite())
    fail(ErrorKind::validation, "estimate contains non-finite entries");
  if (bandwidth <= 0.0)
    fail(ErrorKind::validation, "estimate bandwidth must be positive");
}

void EstimatorConfig::validate(std::size_t n) const
{
  for (double h : bandwidth_grid)
    if (!(h > 0.0) || !std::isfinite(h))
      fail(ErrorKind::argument, "bandwidth candidates must be positive and finite");
  if (cv_folds < 2)
    fail(ErrorKind::argument, "cv_folds must be at least 2");
  if (cv_folds > n)
    fail(ErrorKind::argument,
         "cv_folds (" + std::to_string(cv_folds) + ") exceeds subject count (" +
           std::to_string(n) + ")");
  if (!(fve > 0.0 && fve < 1.0))
    fail(ErrorKind::argument, "fve must lie in (0, 1)");
  if (!(bandwidth_shrink > 0.0))
    fail(ErrorKind::argument, "bandwidth_shrink must be positive");
  if (!(variance_floor > 0.0))
    fail(ErrorKind::argument, "variance_floor must be positive");
  if (!(ridge_jitter > 0.0))
    fail(ErrorKind::argument, "ridge_jitter must be positive");
}

std::vector<double> EstimatorConfig::bandwidths_for(const Grid& grid) const
{
  return bandwidth_grid.empty() ? default_bandwidth_grid(grid) : bandwidth_grid;
}

std::vector<double> default_bandwidth_grid(const Grid& grid)
{
  constexpr int count = 12;
  const double lo = 2.0 * grid.max_spacing();
  const double hi = 0.5;
  std::vector<double> out;
  out.reserve(count);
  if (lo >= hi) {
    out.push_back(lo);
    return out;
  }
  const double ratio = std::pow(hi / lo, 1.0 / (count - 1));
  double h = lo;
  for (int k = 0; k < count; ++k, h *= ratio)
    out.push_back(k == count - 1 ? hi : h);
  return out;
}

double trapezoid_integrate(std::span<const double> values, const Grid& grid)
{
  if (values.size() != grid.size())
    fail(ErrorKind::dimension,
         "integrand has " + std::to_string(values.size()) + " values for a grid of " +
           std::to_string(grid.size()) + " points");
  double acc = values[0] * grid[0];
  for (std::size_t j = 1; j < values.size(); ++j)
    acc += 0.5 * (values[j] + values[j - 1]) * (grid[j] - grid[j - 1]);
  return acc;
}

double trapezoid_integrate(const Eigen::Ref<const Eigen::VectorXd>& values, const Grid& grid)
{
  return trapezoid_integrate(
    std::span<const double>(values.data(), static_cast<std::size_t>(values.size())), grid);
}

std::string format_real(double value)
{
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

} // namespace vcgmm
