#include "vcgmm/simulate.hpp"

#include "vcgmm/parallel.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

namespace vcgmm {

std::string to_string(VarianceProfile profile)
{
  switch (profile) {
    case VarianceProfile::s0: return "S0";
    case VarianceProfile::s1: return "S1";
    case VarianceProfile::s2: return "S2";
    case VarianceProfile::s3: return "S3";
    case VarianceProfile::s4: return "S4";
  }
  return "S?";
}

std::optional<VarianceProfile> parse_variance_profile(const std::string& name)
{
  std::string key;
  for (char c : name)
    if (c != '.')
      key.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  for (auto p : {VarianceProfile::s0, VarianceProfile::s1, VarianceProfile::s2, VarianceProfile::s3,
                 VarianceProfile::s4})
    if (key == to_string(p))
      return p;
  return std::nullopt;
}

double variance_function(VarianceProfile profile, double x) noexcept
{
  switch (profile) {
    case VarianceProfile::s0: return 1.0;
    case VarianceProfile::s1: { const double a = 1.0 + 0.5 * x * x; return a * a; }
    case VarianceProfile::s2: return std::exp(1.0 + 0.5 * x * x);
    case VarianceProfile::s3: return std::exp(1.0 + std::abs(x) + x * x);
    case VarianceProfile::s4: { const double a = 1.0 + 0.5 * std::abs(x); return a * a; }
  }
  return 1.0;
}

void Scenario::validate() const
{
  if (n < 2)
    fail(ErrorKind::argument, "scenario needs n >= 2");
  if (r < 2)
    fail(ErrorKind::argument, "scenario needs r >= 2");
  if (!(snr > 0.0) || !std::isfinite(snr))
    fail(ErrorKind::argument, "snr must be positive");
  if (replicates < 1)
    fail(ErrorKind::argument, "need at least one replicate");
}

std::string Scenario::label() const
{
  char buf[96];
  std::snprintf(buf, sizeof buf, "%s_n%zu_snr%g", to_string(profile).c_str(), n, snr);
  return buf;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> basis_psi(const Grid& grid)
{
  const double tau = 2.0 * std::numbers::pi;
  const auto& s = grid.points();
  Eigen::VectorXd a = 1.5 - (tau * s.array()).sin() - (tau * s.array()).cos();
  Eigen::VectorXd b = (2.0 * tau * s.array()).sin();
  const auto& w = grid.quadrature_weights();
  a /= std::sqrt(a.cwiseAbs2().dot(w));
  b /= std::sqrt(b.cwiseAbs2().dot(w));
  return {a, b};
}

double expected_variance(VarianceProfile profile)
{
  if (profile == VarianceProfile::s0)
    return 1.0;
  std::mt19937_64 rng(0x5eed5eedULL);
  std::normal_distribution<double> z(1.0, 1.0);
  constexpr int draws = 1'000'000;
  double sum = 0.0;
  for (int k = 0; k < draws; ++k)
    sum += variance_function(profile, z(rng));
  return sum / draws;
}

double calibrate_theta0(const Scenario& scenario)
{
  scenario.validate();
  constexpr double signal_variance = 1.0;  // E[X^2] * int cos^2 - (E[X] int cos)^2
  return std::sqrt(signal_variance / (4.5 * expected_variance(scenario.profile))) / scenario.snr;
}

double calibrate_theta0_sample(const Scenario& scenario,
                               const Eigen::VectorXd& covariates,
                               const Grid& grid)
{
  scenario.validate();
  const Eigen::ArrayXd c = (2.0 * std::numbers::pi * grid.points().array()).cos();
  const Eigen::ArrayXXd signal = covariates * c.matrix().transpose();
  const double mean = signal.mean();
  const double v_signal = (signal - mean).square().mean();
  double ev = 0.0;
  for (Eigen::Index i = 0; i < covariates.size(); ++i)
    ev += variance_function(scenario.profile, covariates(i));
  ev /= static_cast<double>(covariates.size());
  return std::sqrt(v_signal / (4.5 * ev)) / scenario.snr;
}

SimulatedReplicate generate(const Scenario& scenario, std::size_t index, std::optional<double> theta_override)
{
  scenario.validate();
  const auto seed = scenario.seed;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
                    0x76636d6dU};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> std_normal(0.0, 1.0);

  const auto n = static_cast<Eigen::Index>(scenario.n);
  Eigen::VectorXd x(n), z1(n), z2(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x(i) = 1.0 + std_normal(rng);
    z1(i) = std_normal(rng);
    z2(i) = std_normal(rng);
  }

  Grid grid = Grid::midpoint(scenario.r);
  const double theta0 = theta_override ? *theta_override : calibrate_theta0_sample(scenario, x, grid);
  const auto [psi1, psi2] = basis_psi(grid);
  const Eigen::VectorXd beta = (2.0 * std::numbers::pi * grid.points().array()).cos();

  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(scenario.r));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sd = std::sqrt(variance_function(scenario.profile, x(i))) * theta0;
    const double xi1 = std::sqrt(3.0) * sd * z1(i);
    const double xi2 = std::sqrt(1.5) * sd * z2(i);
    y.row(i) = (x(i) * beta + xi1 * psi1 + xi2 * psi2).transpose();
  }
  return SimulatedReplicate{FunctionalDataset(grid, std::move(y), x), beta, theta0};
}

namespace {

template <class F>
Eigen::VectorXd integrated(const CoefficientEstimate& est, const Eigen::MatrixXd& truth, F&& f)
{
  if (truth.rows() != est.beta.rows() || truth.cols() != est.beta.cols())
    fail(ErrorKind::dimension, "truth does not match the estimate's grid and coefficients");
  const auto& delta = est.grid.spacings();
  return (est.beta - truth).unaryExpr(f).transpose() * delta;
}

} // namespace

Eigen::VectorXd imse(const CoefficientEstimate& est, const Eigen::MatrixXd& truth)
{
  return integrated(est, truth, [](double e) { return e * e; });
}

Eigen::VectorXd imae(const CoefficientEstimate& est, const Eigen::MatrixXd& truth)
{
  return integrated(est, truth, [](double e) { return std::abs(e); });
}

double MonteCarloReport::failure_rate() const
{
  return replicates.empty() ? 0.0
                            : static_cast<double>(failures) / static_cast<double>(replicates.size());
}

ReplicateOutcome run_replicate(const Scenario& scenario, const EstimatorConfig& config, std::size_t index)
{
  ReplicateOutcome out;
  out.index = index;
  try {
    const auto rep = generate(scenario, index);
    const auto fit = estimate_full(rep.data, config);
    out.lle_imse = imse(fit.lle, rep.truth).sum();
    out.lle_imae = imae(fit.lle, rep.truth).sum();
    out.llgmm_imse = imse(fit.llgmm, rep.truth).sum();
    out.llgmm_imae = imae(fit.llgmm, rep.truth).sum();
    out.ok = std::isfinite(out.lle_imse) && std::isfinite(out.llgmm_imse);
    if (!out.ok)
      out.failure = "non-finite error metric";
  } catch (const Error& e) {
    out.ok = false;
    out.failure = e.what();
  }
  return out;
}

namespace {

MethodSummary summarize(const std::vector<ReplicateOutcome>& reps, bool gmm)
{
  std::vector<double> se, ae;
  for (const auto& r : reps)
    if (r.ok) {
      se.push_back(gmm ? r.llgmm_imse : r.lle_imse);
      ae.push_back(gmm ? r.llgmm_imae : r.lle_imae);
    }
  auto mean_se = [](const std::vector<double>& v, double& mean, double& err) {
    const double m = static_cast<double>(v.size());
    mean = err = 0.0;
    if (v.empty())
      return;
    for (double x : v)
      mean += x;
    mean /= m;
    if (v.size() < 2)
      return;
    double ss = 0.0;
    for (double x : v)
      ss += (x - mean) * (x - mean);
    err = std::sqrt(ss / (m - 1.0) / m);
  };
  MethodSummary s;
  mean_se(se, s.mean_imse, s.se_imse);
  mean_se(ae, s.mean_imae, s.se_imae);
  return s;
}

} // namespace

MonteCarloReport run_cell(const Scenario& scenario, const EstimatorConfig& config, std::size_t workers)
{
  scenario.validate();
  const auto start = std::chrono::steady_clock::now();
  MonteCarloReport report;
  report.scenario = scenario;
  report.replicates.resize(scenario.replicates);
  EstimatorConfig inner = config;
  if (workers > 1)
    inner.workers = 1;  // parallelism lives at the replicate level
  parallel_for(scenario.replicates, workers, [&](std::size_t b) {
    report.replicates[b] = run_replicate(scenario, inner, b);
  });
  for (const auto& r : report.replicates)
    if (!r.ok)
      ++report.failures;
  report.lle = summarize(report.replicates, false);
  report.llgmm = summarize(report.replicates, true);
  report.wall_seconds =
    std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

} // namespace vcgmm
