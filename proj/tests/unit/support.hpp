#pragma once

#include "vcgmm/core.hpp"
#include "vcgmm/fpca.hpp"
#include "vcgmm/gmm.hpp"
#include "vcgmm/locallinear.hpp"
#include "vcgmm/hetero.hpp"
#include "vcgmm/netfeat.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <random>
#include <string>
#include <vector>

namespace vcgmm::testing {

inline double epan(double u)
{
  return std::abs(u) < 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
}

inline double kh(double u, double h)
{
  return epan(u / h) / h;
}

//! Dataset with Y_ij = X_i^T beta(s_j) + noise_ij for a caller-supplied beta.
template <class Beta>
FunctionalDataset make_dataset(const Grid& grid,
                               const Eigen::MatrixXd& x,
                               Beta beta,
                               double noise_sd = 0.0,
                               std::uint64_t seed = 1)
{
  const Eigen::Index n = x.rows();
  const Eigen::Index r = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd y(n, r);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < r; ++j) {
      const Eigen::VectorXd b = beta(grid[static_cast<std::size_t>(j)]);
      y(i, j) = x.row(i).dot(b) + (noise_sd > 0 ? noise_sd * z(rng) : 0.0);
    }
  return FunctionalDataset(grid, y, x);
}

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed,
                                     double mean = 0.0)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z(mean, 1.0);
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r)
      m(r, c) = z(rng);
  return m;
}

//! Local-linear fit by stacking every (i, j) row of the weighted design and
//! solving the least-squares problem with a QR factorization.
inline Eigen::VectorXd wls_oracle(const FunctionalDataset& data, double s0, double h)
{
  const std::size_t n = data.n(), r = data.r(), p = data.p();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(n * r), static_cast<Eigen::Index>(2 * p));
  Eigen::VectorXd b(a.rows());
  Eigen::Index row = 0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < r; ++j, ++row) {
      const double u = data.grid()[j] - s0;
      const double w = std::sqrt(kh(u, h));
      for (std::size_t c = 0; c < p; ++c) {
        const double xc = data.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
        a(row, static_cast<Eigen::Index>(c)) = w * xc;
        a(row, static_cast<Eigen::Index>(p + c)) = w * xc * u / h;
      }
      b(row) = w * data.responses()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  return a.colPivHouseholderQr().solve(b);
}

//! All-pairs shortest paths by Floyd-Warshall; mean over connected pairs.
inline PathLengthSummary floyd_warshall_apl(const Adjacency& adj)
{
  const std::size_t m = adj.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(m * m, inf);
  for (std::size_t k = 0; k < m; ++k) {
    d[k * m + k] = 0.0;
    for (std::size_t l = 0; l < m; ++l)
      if (adj.edge(k, l))
        d[k * m + l] = 1.0;
  }
  for (std::size_t via = 0; via < m; ++via)
    for (std::size_t k = 0; k < m; ++k)
      for (std::size_t l = 0; l < m; ++l)
        d[k * m + l] = std::min(d[k * m + l], d[k * m + via] + d[via * m + l]);
  PathLengthSummary out;
  double total = 0.0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l)
      if (std::isfinite(d[k * m + l])) {
        total += d[k * m + l];
        ++out.connected_pairs;
      }
  out.apl = out.connected_pairs ? total / static_cast<double>(out.connected_pairs) : 0.0;
  return out;
}

//! Two vector functions on the grid, orthonormal under quadrature, lined up.
inline Eigen::MatrixXd orthonormal_pair(const Grid& grid, std::size_t d)
{
  const Eigen::Index r = static_cast<Eigen::Index>(grid.size());
  Eigen::MatrixXd f = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d) * r, 2);
  for (Eigen::Index j = 0; j < r; ++j) {
    const double s = grid[static_cast<std::size_t>(j)];
    f(j, 0) = std::cos(M_PI * s) + 0.3;
    f(j, 1) = s * s - 0.2;
    if (d > 1) {
      f(r + j, 0) = std::sin(2 * M_PI * s);
      f(r + j, 1) = 1.0 - s;
    }
  }
  // Gram-Schmidt in the weighted inner product.
  Eigen::VectorXd w(f.rows());
  for (std::size_t l = 0; l < d; ++l)
    w.segment(static_cast<Eigen::Index>(l) * r, r) = grid.quadrature_weights();
  auto inner = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return (a.array() * b.array() * w.array()).sum();
  };
  f.col(0) /= std::sqrt(inner(f.col(0), f.col(0)));
  f.col(1) -= inner(f.col(0), f.col(1)) * f.col(0);
  f.col(1) /= std::sqrt(inner(f.col(1), f.col(1)));
  return f;
}

inline MomentCovariance covariance_from_expansion(const Grid& grid,
                                                  std::size_t d,
                                                  const Eigen::MatrixXd& functions,
                                                  const Eigen::VectorXd& lambda)
{
  MomentCovariance cov{grid, d, functions * lambda.asDiagonal() * functions.transpose()};
  return cov;
}

inline Eigen::VectorXd ranks(const Eigen::VectorXd& v)
{
  const auto n = v.size();
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i)
    idx[static_cast<std::size_t>(i)] = i;
  std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return v(a) < v(b); });
  Eigen::VectorXd out(n);
  for (Eigen::Index k = 0; k < n;) {
    Eigen::Index e = k;
    while (e + 1 < n && v(idx[static_cast<std::size_t>(e + 1)]) == v(idx[static_cast<std::size_t>(k)]))
      ++e;
    for (Eigen::Index t = k; t <= e; ++t)
      out(idx[static_cast<std::size_t>(t)]) = 0.5 * static_cast<double>(k + e);
    k = e + 1;
  }
  return out;
}

//! Pearson correlation of average ranks.
inline double spearman(const Eigen::VectorXd& a, const Eigen::VectorXd& b)
{
  Eigen::VectorXd ra = ranks(a), rb = ranks(b);
  ra.array() -= ra.mean();
  rb.array() -= rb.mean();
  return ra.dot(rb) / std::sqrt(ra.squaredNorm() * rb.squaredNorm());
}

//! Fresh scratch directory under the system temp path.
inline std::filesystem::path scratch_dir(const std::string& name)
{
  auto dir = std::filesystem::temp_directory_path() / ("vcgmm_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

//! CV score computed fold by fold with the stacked least-squares oracle.
inline double cv_oracle(const FunctionalDataset& data, const std::vector<std::size_t>& fold_of,
                 std::size_t folds, double h)
{
  double total = 0.0;
  for (std::size_t f = 0; f < folds; ++f) {
    std::vector<std::size_t> train, test;
    for (std::size_t i = 0; i < data.n(); ++i)
      (fold_of[i] == f ? test : train).push_back(i);
    const auto sub = data.subset(train);
    for (std::size_t j = 0; j < data.r(); ++j) {
      const Eigen::VectorXd g = wls_oracle(sub, data.grid()[j], h);
      for (auto i : test) {
        const double pred = data.covariates().row(static_cast<Eigen::Index>(i)).dot(g.head(static_cast<Eigen::Index>(data.p())));
        const double e = data.responses()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - pred;
        total += e * e;
      }
    }
  }
  return total / static_cast<double>(data.n() * data.r());
}

//! Mean moment n^-1 sum_i g_i(gamma) at s0 by direct summation over (i, j).
inline Eigen::VectorXd mean_moment(const FunctionalDataset& data, const Eigen::MatrixXd& inst,
                            const Eigen::VectorXd& gamma, double h, double s0)
{
  const auto p = static_cast<Eigen::Index>(data.p());
  const auto q = inst.cols();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(2 * q);
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(data.n()); ++i)
    for (std::size_t j = 0; j < data.r(); ++j) {
      const double u = (data.grid()[j] - s0) / h;
      const double k = kh(data.grid()[j] - s0, h);
      const Eigen::VectorXd x = data.covariates().row(i).transpose();
      const double resid = data.responses()(i, static_cast<Eigen::Index>(j)) -
                           x.dot(gamma.head(p)) - u * x.dot(gamma.tail(p));
      g.head(q) += k * resid * inst.row(i).transpose();
      g.tail(q) += k * u * resid * inst.row(i).transpose();
    }
  return g / static_cast<double>(data.n() * data.r());
}

//! Minimizes sum_k w_k (gbar(gamma)^T phi_k(s0))^2 directly: gbar is affine
//! in gamma, so the objective is a weighted least-squares problem in gamma,
//! solved here by QR on the square-root-weighted rows.
inline Eigen::VectorXd objective_minimizer(const FunctionalDataset& data, const Eigen::MatrixXd& inst,
                                    const EigenSystem& eig, double h, std::size_t j)
{
  const double s0 = data.grid()[j];
  const auto m = static_cast<Eigen::Index>(2 * data.p());
  const Eigen::VectorXd g0 = mean_moment(data, inst, Eigen::VectorXd::Zero(m), h, s0);
  Eigen::MatrixXd slope(g0.size(), m);
  for (Eigen::Index c = 0; c < m; ++c)
    slope.col(c) = g0 - mean_moment(data, inst, Eigen::VectorXd::Unit(m, c), h, s0);

  const auto K = static_cast<Eigen::Index>(eig.size());
  const Eigen::VectorXd w = eig.filter_weights();
  Eigen::MatrixXd a(K, m);
  Eigen::VectorXd b(K);
  for (Eigen::Index k = 0; k < K; ++k) {
    const Eigen::VectorXd phi = eig.phi_at_grid(static_cast<std::size_t>(k), j);
    a.row(k) = std::sqrt(w(k)) * phi.transpose() * slope;
    b(k) = std::sqrt(w(k)) * phi.dot(g0);
  }
  return a.colPivHouseholderQr().solve(b);
}

inline Eigen::VectorXd lined_weights(const Grid& g, std::size_t d)
{
  const auto r = static_cast<Eigen::Index>(g.size());
  Eigen::VectorXd w(static_cast<Eigen::Index>(d) * r);
  for (std::size_t l = 0; l < d; ++l)
    w.segment(static_cast<Eigen::Index>(l) * r, r) = g.quadrature_weights();
  return w;
}

inline Eigen::VectorXd sign_fixed(Eigen::VectorXd v)
{
  Eigen::Index arg = 0;
  v.cwiseAbs().maxCoeff(&arg);
  return v(arg) < 0.0 ? Eigen::VectorXd(-v) : v;
}

inline EigenSystem with_values(std::initializer_list<double> values)
{
  const Grid g = Grid::midpoint(4);
  EigenSystem eig{g, 1, {}, {}, 0, 0.0, 0.0};
  eig.eigenvalues.resize(static_cast<Eigen::Index>(values.size()));
  Eigen::Index k = 0;
  for (double v : values)
    eig.eigenvalues(k++) = v;
  eig.functions = Eigen::MatrixXd::Zero(4, eig.eigenvalues.size());
  return eig;
}

inline double orthonormality_error(const EigenSystem& eig)
{
  const Eigen::VectorXd w = lined_weights(eig.grid, eig.d);
  const Eigen::MatrixXd gram = eig.functions.transpose() * w.asDiagonal() * eig.functions;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

struct Instance
{
  FunctionalDataset data;
  InstrumentSet inst;
  EigenSystem eig;
  double h;
};

inline Instance build_instance(std::size_t n, std::size_t r, std::uint64_t seed, double h, bool default_instruments)
{
  const Eigen::MatrixXd x = random_matrix(static_cast<Eigen::Index>(n), 1, seed, 1.0);
  Eigen::MatrixXd y = random_matrix(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(r), seed + 1);
  for (Eigen::Index i = 0; i < y.rows(); ++i)
    y.row(i) *= 0.5 + std::abs(x(i, 0));
  FunctionalDataset data(Grid::midpoint(r), y, x);
  const auto init = lle_curve(data, h);
  InstrumentSet inst = InstrumentSet::covariates_only(x);
  if (default_instruments) {
    const EstimatorConfig config;
    inst = build_instruments(x, fit_variance(x, integrated_sq_residuals(data, init, config), config));
  }
  auto eig = select_truncation(lineup_eigen(moment_sample(data, inst, init, h)), 0.99);
  return {std::move(data), std::move(inst), std::move(eig), h};
}

//! Initial local-linear fit at the CV bandwidth followed by the variance model.
inline VarianceModel pipeline_variance(const FunctionalDataset& data, const EstimatorConfig& config)
{
  const auto sel = cv_bandwidth(data, config, lle_fitter(data, config.ridge_jitter));
  const auto init = lle_curve(data, sel.bandwidth, config.ridge_jitter);
  return fit_variance(data.covariates(), integrated_sq_residuals(data, init, config), config);
}

//! Graph on m nodes whose edges are the set bits of mask in (k, l) order, k < l.
inline Adjacency from_mask(std::size_t m, std::uint64_t mask)
{
  Adjacency adj(m);
  std::size_t bit = 0;
  for (std::size_t k = 0; k < m; ++k)
    for (std::size_t l = k + 1; l < m; ++l, ++bit)
      if (mask >> bit & 1u)
        adj.connect(k, l);
  return adj;
}

} // namespace vcgmm::testing
