#include "vcgmm/gmm.hpp"

#include "vcgmm/linalg.hpp"

#include <algorithm>

namespace vcgmm {

Eigen::MatrixXd SpectralSystem::normal_matrix() const
{
  return design * weights.asDiagonal() * design.transpose();
}

Eigen::VectorXd SpectralSystem::normal_rhs() const
{
  return design * weights.cwiseProduct(response);
}

SpectralSystem spectral_system_at(const CrossMoments& cm,
                                  const Grid& grid,
                                  const EigenSystem& eig,
                                  double h,
                                  double s0)
{
  if (!(eig.grid == grid))
    fail(ErrorKind::argument, "eigensystem is on a different grid");
  if (eig.d != 2 * static_cast<std::size_t>(cm.mx.rows()))
    fail(ErrorKind::dimension, "eigenfunction dimension does not match the instruments");
  const auto lm = local_moments(cm, grid, s0, h);
  const auto K = static_cast<Eigen::Index>(eig.size());
  Eigen::MatrixXd phi(static_cast<Eigen::Index>(eig.d), K);
  for (Eigen::Index k = 0; k < K; ++k)
    phi.col(k) = eig.phi_at(static_cast<std::size_t>(k), s0);
  SpectralSystem sys;
  sys.design = lm.design.transpose() * phi;
  sys.response = phi.transpose() * lm.response;
  sys.weights = eig.filter_weights();
  return sys;
}

SpectralSystem spectral_system_at(const FunctionalDataset& data,
                                  const InstrumentSet& instruments,
                                  const EigenSystem& eig,
                                  double h,
                                  double s0)
{
  return spectral_system_at(CrossMoments::compute(instruments.values, data), data.grid(), eig, h, s0);
}

namespace {

LocalFit solve_spectral(const SpectralSystem& sys, double jitter, double s0)
{
  const Eigen::VectorXd gamma = solve_symmetric(sys.normal_matrix(), sys.normal_rhs(), jitter,
                                                "spectral GMM system at s0 = " + format_real(s0));
  const auto p = gamma.size() / 2;
  return LocalFit{gamma.head(p), gamma.tail(p)};
}

CoefficientEstimate curve_from_moments(const CrossMoments& cm,
                                       const Grid& grid,
                                       const EigenSystem& eig,
                                       double h,
                                       double jitter)
{
  const auto r = static_cast<Eigen::Index>(grid.size());
  const auto p = cm.mx.cols();
  CoefficientEstimate est{grid, Eigen::MatrixXd(r, p), Eigen::MatrixXd(r, p), h};
  for (Eigen::Index j = 0; j < r; ++j) {
    const double s0 = grid[static_cast<std::size_t>(j)];
    const auto fit = solve_spectral(spectral_system_at(cm, grid, eig, h, s0), jitter, s0);
    est.beta.row(j) = fit.beta.transpose();
    est.dbeta_scaled.row(j) = fit.dbeta_scaled.transpose();
  }
  return est;
}

} // namespace

LocalFit gmm_at(const FunctionalDataset& data,
                const InstrumentSet& instruments,
                const EigenSystem& eig,
                double h,
                double s0,
                double ridge_jitter)
{
  return solve_spectral(spectral_system_at(data, instruments, eig, h, s0), ridge_jitter, s0);
}

CoefficientEstimate gmm_curve(const FunctionalDataset& data,
                              const InstrumentSet& instruments,
                              const EigenSystem& eig,
                              double h,
                              double ridge_jitter)
{
  return curve_from_moments(CrossMoments::compute(instruments.values, data), data.grid(), eig, h,
                            ridge_jitter);
}

CurveFitter gmm_fitter(const FunctionalDataset& data,
                       const InstrumentSet& instruments,
                       const EigenSystem& eig,
                       double ridge_jitter)
{
  return [&data, &instruments, &eig, ridge_jitter](std::span<const std::size_t> train, double h) {
    const auto cm = CrossMoments::compute(instruments.values, data, train);
    return curve_from_moments(cm, data.grid(), eig, h, ridge_jitter);
  };
}

namespace {

template <class F>
auto staged(const char* stage, F&& body) -> decltype(body())
{
  try {
    return body();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(stage, e);
  }
}

double median_of(Eigen::VectorXd v)
{
  const auto n = static_cast<std::size_t>(v.size());
  std::vector<double> xs(v.data(), v.data() + n);
  std::sort(xs.begin(), xs.end());
  return n % 2 == 1 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

} // namespace

EstimationResult estimate_full(const FunctionalDataset& data, const EstimatorConfig& config)
{
  staged("config", [&] { config.validate(data.n()); return 0; });
  EstimationDiagnostics diag;
  diag.fve = config.fve;
  diag.bandwidth_shrink = config.bandwidth_shrink;
  diag.cv_folds = config.cv_folds;

  // Initial local-linear fit with a CV bandwidth.
  auto init_sel = staged("lle-cv", [&] { return cv_bandwidth(data, config, lle_fitter(data, config.ridge_jitter)); });
  const double h_init = init_sel.bandwidth;
  auto lle = staged("lle", [&] { return lle_curve(data, h_init, config.ridge_jitter); });
  diag.bandwidth_init = h_init;
  diag.cv_candidates = init_sel.candidates;
  diag.cv_scores_init = init_sel.scores;

  // Variance function and instruments.
  const auto model = staged("variance", [&] {
    const auto R = integrated_sq_residuals(data, lle, config);
    return VarianceModel::fit(data.covariates(), R, config);
  });
  const auto instruments = staged("instruments", [&] { return build_instruments(data.covariates(), model); });
  const auto& s2 = model.fitted();
  diag.sigma2_min = s2.minCoeff();
  diag.sigma2_max = s2.maxCoeff();
  diag.sigma2_mean = s2.mean();
  diag.sigma2_median = median_of(s2);
  diag.variance_constant_fallback = model.constant_fallback();

  // Eigensystem of the moment process at the initial fit.
  const auto eig = staged("fpca", [&] {
    const auto sample = moment_sample(data, instruments, lle, h_init);
    return select_truncation(lineup_eigen(sample), config.fve);
  });
  diag.kappa0 = eig.kappa0;
  diag.alpha = eig.alpha;
  diag.eigenvalues.assign(eig.eigenvalues.data(), eig.eigenvalues.data() + eig.eigenvalues.size());
  diag.min_raw_eigenvalue = eig.min_raw_eigenvalue;

  // Spectral GMM with its own CV bandwidth, shrunk.
  auto gmm_sel = staged("gmm-cv", [&] {
    return cv_bandwidth(data, config, gmm_fitter(data, instruments, eig, config.ridge_jitter));
  });
  diag.bandwidth_gmm_cv = gmm_sel.bandwidth;
  diag.bandwidth_gmm = config.bandwidth_shrink * gmm_sel.bandwidth;
  diag.cv_scores_gmm = gmm_sel.scores;
  auto llgmm = staged("gmm", [&] {
    return gmm_curve(data, instruments, eig, diag.bandwidth_gmm, config.ridge_jitter);
  });

  return EstimationResult{std::move(lle), std::move(llgmm), std::move(diag)};
}

nlohmann::json to_json(const EstimationDiagnostics& diag)
{
  auto finite_or_null = [](const std::vector<double>& xs) {
    nlohmann::json a = nlohmann::json::array();
    for (double x : xs)
      a.push_back(std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr));
    return a;
  };
  return nlohmann::json{
    {"bandwidth_init", diag.bandwidth_init},
    {"bandwidth_gmm_cv", diag.bandwidth_gmm_cv},
    {"bandwidth_gmm", diag.bandwidth_gmm},
    {"bandwidth_shrink", diag.bandwidth_shrink},
    {"cv_folds", diag.cv_folds},
    {"cv_candidates", diag.cv_candidates},
    {"cv_scores_init", finite_or_null(diag.cv_scores_init)},
    {"cv_scores_gmm", finite_or_null(diag.cv_scores_gmm)},
    {"fve", diag.fve},
    {"kappa0", diag.kappa0},
    {"alpha", diag.alpha},
    {"eigenvalues", diag.eigenvalues},
    {"min_raw_eigenvalue", diag.min_raw_eigenvalue},
    {"sigma2", {{"min", diag.sigma2_min},
                {"median", diag.sigma2_median},
                {"max", diag.sigma2_max},
                {"mean", diag.sigma2_mean},
                {"constant_fallback", diag.variance_constant_fallback}}},
  };
}

} // namespace vcgmm
