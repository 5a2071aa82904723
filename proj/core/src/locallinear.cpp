#include "vcgmm/locallinear.hpp"

#include "vcgmm/kernel.hpp"
#include "vcgmm/linalg.hpp"
#include "vcgmm/parallel.hpp"
#include "window.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <numeric>
#include <random>

namespace vcgmm {

CrossMoments CrossMoments::compute(const Eigen::MatrixXd& instruments,
                                   const FunctionalDataset& data,
                                   std::span<const std::size_t> subjects)
{
  if (static_cast<std::size_t>(instruments.rows()) != data.n())
    fail(ErrorKind::dimension, "instrument rows do not match the subject count");
  std::vector<Eigen::Index> rows(subjects.begin(), subjects.end());
  const Eigen::MatrixXd m = instruments(rows, Eigen::placeholders::all);
  const Eigen::MatrixXd x = data.covariates()(rows, Eigen::placeholders::all);
  const Eigen::MatrixXd y = data.responses()(rows, Eigen::placeholders::all);
  CrossMoments cm;
  cm.mx = m.transpose() * x;
  cm.my = y.transpose() * m;
  cm.n = subjects.size();
  return cm;
}

CrossMoments CrossMoments::compute(const Eigen::MatrixXd& instruments, const FunctionalDataset& data)
{
  if (static_cast<std::size_t>(instruments.rows()) != data.n())
    fail(ErrorKind::dimension, "instrument rows do not match the subject count");
  CrossMoments cm;
  cm.mx = instruments.transpose() * data.covariates();
  cm.my = data.responses().transpose() * instruments;
  cm.n = data.n();
  return cm;
}

LocalMoments local_moments(const CrossMoments& cm, const Grid& grid, double s0, double h)
{
  if (!(h > 0.0))
    fail(ErrorKind::argument, "bandwidth must be positive");
  if (static_cast<std::size_t>(cm.my.rows()) != grid.size())
    fail(ErrorKind::dimension, "cross moments do not match the grid");

  const auto q = cm.my.cols();
  const auto p = cm.mx.cols();
  double s0w = 0.0, s1w = 0.0, s2w = 0.0;
  Eigen::VectorXd t0 = Eigen::VectorXd::Zero(q);
  Eigen::VectorXd t1 = Eigen::VectorXd::Zero(q);
  const auto [lo, hi] = detail::kernel_window(grid, s0, h);
  for (std::size_t j = lo; j < hi; ++j) {
    const double u = (grid[j] - s0) / h;
    const double k = kernel_eval(u) / h;
    if (k <= 0.0)
      continue;
    s0w += k;
    s1w += k * u;
    s2w += k * u * u;
    const auto row = cm.my.row(static_cast<Eigen::Index>(j)).transpose();
    t0.noalias() += k * row;
    t1.noalias() += (k * u) * row;
  }
  if (s0w <= 0.0)
    fail(ErrorKind::empty_window,
         "no grid point within bandwidth " + format_real(h) + " of s0 = " + format_real(s0));

  const double scale = 1.0 / (static_cast<double>(cm.n) * static_cast<double>(grid.size()));
  LocalMoments lm;
  lm.design.resize(2 * q, 2 * p);
  lm.design.topLeftCorner(q, p) = (s0w * scale) * cm.mx;
  lm.design.topRightCorner(q, p) = (s1w * scale) * cm.mx;
  lm.design.bottomLeftCorner(q, p) = (s1w * scale) * cm.mx;
  lm.design.bottomRightCorner(q, p) = (s2w * scale) * cm.mx;
  lm.response.resize(2 * q);
  lm.response.head(q) = scale * t0;
  lm.response.tail(q) = scale * t1;
  return lm;
}

LocalSystem assemble_lle_system(const FunctionalDataset& data, double s0, double h)
{
  const auto cm = CrossMoments::compute(data.covariates(), data);
  auto lm = local_moments(cm, data.grid(), s0, h);
  return LocalSystem{std::move(lm.design), std::move(lm.response), s0};
}

namespace {

LocalFit split_gamma(const Eigen::VectorXd& gamma)
{
  const auto p = gamma.size() / 2;
  return LocalFit{gamma.head(p), gamma.tail(p)};
}

LocalFit lle_from_moments(const CrossMoments& cm, const Grid& grid, double s0, double h, double jitter)
{
  const auto lm = local_moments(cm, grid, s0, h);
  assert(lm.design.isApprox(lm.design.transpose()));
  return split_gamma(solve_symmetric(lm.design, lm.response, jitter,
                                     "local-linear fit at s0 = " + format_real(s0)));
}

} // namespace

LocalFit lle_at(const FunctionalDataset& data, double s0, double h, double ridge_jitter)
{
  const auto cm = CrossMoments::compute(data.covariates(), data);
  return lle_from_moments(cm, data.grid(), s0, h, ridge_jitter);
}

CoefficientEstimate lle_curve(const CrossMoments& cm, const Grid& grid, double h, double ridge_jitter)
{
  const auto r = static_cast<Eigen::Index>(grid.size());
  const auto p = cm.mx.cols();
  CoefficientEstimate est{grid, Eigen::MatrixXd(r, p), Eigen::MatrixXd(r, p), h};
  for (Eigen::Index j = 0; j < r; ++j) {
    const auto fit = lle_from_moments(cm, grid, grid[static_cast<std::size_t>(j)], h, ridge_jitter);
    est.beta.row(j) = fit.beta.transpose();
    est.dbeta_scaled.row(j) = fit.dbeta_scaled.transpose();
  }
  return est;
}

CoefficientEstimate lle_curve(const FunctionalDataset& data, double h, double ridge_jitter)
{
  return lle_curve(CrossMoments::compute(data.covariates(), data), data.grid(), h, ridge_jitter);
}

std::vector<std::size_t> assign_folds(std::size_t n, std::size_t folds, std::uint64_t seed)
{
  if (folds < 2 || folds > n)
    fail(ErrorKind::argument,
         "fold count " + std::to_string(folds) + " invalid for " + std::to_string(n) + " subjects");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 rng(seed);
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle implementation.
  for (std::size_t k = n; k > 1; --k) {
    const auto pick = static_cast<std::size_t>(rng() % k);
    std::swap(order[k - 1], order[pick]);
  }
  std::vector<std::size_t> fold_of(n);
  for (std::size_t k = 0; k < n; ++k)
    fold_of[order[k]] = k % folds;
  return fold_of;
}

double cv_score(const FunctionalDataset& data,
                std::span<const std::size_t> fold_of,
                std::size_t folds,
                double h,
                const CurveFitter& fit)
{
  if (fold_of.size() != data.n())
    fail(ErrorKind::dimension, "fold labels do not match the subject count");
  const auto& x = data.covariates();
  const auto& y = data.responses();
  double total = 0.0;
  std::vector<std::size_t> train, test;
  for (std::size_t f = 0; f < folds; ++f) {
    train.clear();
    test.clear();
    for (std::size_t i = 0; i < data.n(); ++i)
      (fold_of[i] == f ? test : train).push_back(i);
    if (test.empty())
      continue;
    const auto est = fit(train, h);
    for (auto i : test) {
      const auto ii = static_cast<Eigen::Index>(i);
      const Eigen::VectorXd pred = est.beta * x.row(ii).transpose();
      total += (y.row(ii).transpose() - pred).squaredNorm();
    }
  }
  return total / (static_cast<double>(data.n()) * static_cast<double>(data.r()));
}

BandwidthSelection cv_bandwidth(const FunctionalDataset& data,
                                const EstimatorConfig& config,
                                const CurveFitter& fit)
{
  config.validate(data.n());
  BandwidthSelection sel;
  sel.candidates = config.bandwidths_for(data.grid());
  const auto folds = assign_folds(data.n(), config.cv_folds, config.seed);
  sel.scores.assign(sel.candidates.size(), std::numeric_limits<double>::infinity());

  parallel_for(sel.candidates.size(), config.workers, [&](std::size_t c) {
    try {
      sel.scores[c] = cv_score(data, folds, config.cv_folds, sel.candidates[c], fit);
    } catch (const Error&) {
      // infeasible candidate, left at +inf
    }
  });

  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t c = 0; c < sel.candidates.size(); ++c) {
    const double s = sel.scores[c];
    if (!std::isfinite(s))
      continue;
    if (!found || s < best || (s == best && sel.candidates[c] > sel.bandwidth)) {
      best = s;
      sel.bandwidth = sel.candidates[c];
      found = true;
    }
  }
  if (!found)
    fail(ErrorKind::no_feasible_bandwidth,
         "every bandwidth candidate failed to fit (" + std::to_string(sel.candidates.size()) +
           " tried)");
  return sel;
}

CurveFitter lle_fitter(const FunctionalDataset& data, double ridge_jitter)
{
  return [&data, ridge_jitter](std::span<const std::size_t> train, double h) {
    const auto cm = CrossMoments::compute(data.covariates(), data, train);
    return lle_curve(cm, data.grid(), h, ridge_jitter);
  };
}

} // namespace vcgmm
