#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vcgmm/error.hpp"

namespace vcgmm {

//! Ordered design points s_1 < ... < s_r in [0, 1].
//!
//! Spacings follow the convention Δ(s_1) = s_1 - 0 and Δ(s_j) = s_j - s_{j-1},
//! so the spacings sum to s_r. Immutable after construction.
class Grid
{
public:
  explicit Grid(std::vector<double> points);

  //! Equidistant midpoints s_j = (j - 0.5) / r.
  static Grid midpoint(std::size_t r);

  std::size_t size() const noexcept { return static_cast<std::size_t>(points_.size()); }
  double operator[](std::size_t j) const { return points_[static_cast<Eigen::Index>(j)]; }
  const Eigen::VectorXd& points() const noexcept { return points_; }
  const Eigen::VectorXd& spacings() const noexcept { return spacings_; }

  //! Weights w_j such that sum_j w_j f(s_j) equals trapezoid_integrate(f).
  const Eigen::VectorXd& quadrature_weights() const noexcept { return weights_; }

  double max_spacing() const noexcept { return spacings_.maxCoeff(); }

  bool operator==(const Grid& other) const { return points_ == other.points_; }

private:
  Eigen::VectorXd points_;
  Eigen::VectorXd spacings_;
  Eigen::VectorXd weights_;
};

//! n response curves observed on a common grid together with n covariate
//! vectors of length p.
class FunctionalDataset
{
public:
  FunctionalDataset(Grid grid,
                    Eigen::MatrixXd responses,
                    Eigen::MatrixXd covariates,
                    std::vector<std::string> ids = {});

  const Grid& grid() const noexcept { return grid_; }
  const Eigen::MatrixXd& responses() const noexcept { return responses_; }
  const Eigen::MatrixXd& covariates() const noexcept { return covariates_; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }

  std::size_t n() const noexcept { return static_cast<std::size_t>(responses_.rows()); }
  std::size_t r() const noexcept { return grid_.size(); }
  std::size_t p() const noexcept { return static_cast<std::size_t>(covariates_.cols()); }

  //! Rows `subjects` in the given order.
  FunctionalDataset subset(std::span<const std::size_t> subjects) const;

private:
  Grid grid_;
  Eigen::MatrixXd responses_;
  Eigen::MatrixXd covariates_;
  std::vector<std::string> ids_;
};

//! beta(s_j) and h * beta'(s_j) on a grid, plus the bandwidth that produced them.
struct CoefficientEstimate
{
  Grid grid;
  Eigen::MatrixXd beta;          // r x p
  Eigen::MatrixXd dbeta_scaled;  // r x p
  double bandwidth = 0.0;

  std::size_t p() const noexcept { return static_cast<std::size_t>(beta.cols()); }

  //! gamma(s_j) = (beta(s_j), h beta'(s_j)) stacked as a 2p vector.
  Eigen::VectorXd gamma(std::size_t j) const;

  //! Throws validation errors when shapes disagree or entries are non-finite.
  void validate() const;
};

struct EstimatorConfig
{
  std::vector<double> bandwidth_grid;  // empty: default_bandwidth_grid(grid)
  std::size_t cv_folds = 5;
  double fve = 0.99;
  double bandwidth_shrink = 0.75;
  double variance_floor = 1e-6;  // relative to mean integrated squared residual
  double ridge_jitter = 1e-10;
  std::uint64_t seed = 20240611;
  std::size_t workers = 1;

  void validate(std::size_t n) const;
  std::vector<double> bandwidths_for(const Grid& grid) const;
};

//! 12 geometric points between 2 * (max spacing) and 0.5.
std::vector<double> default_bandwidth_grid(const Grid& grid);

//! Trapezoid rule over the grid with the leading panel [0, s_1] integrated by
//! constant extension of the first value.
double trapezoid_integrate(std::span<const double> values, const Grid& grid);
double trapezoid_integrate(const Eigen::Ref<const Eigen::VectorXd>& values, const Grid& grid);

// CSV interfaces -------------------------------------------------------------

FunctionalDataset load_dataset(const std::string& covariates_path,
                               const std::string& responses_path);

void write_dataset(const FunctionalDataset& data,
                   const std::string& covariates_path,
                   const std::string& responses_path);

void write_estimate(const CoefficientEstimate& est, const std::string& path);
CoefficientEstimate read_estimate(const std::string& path);

//! `s,beta_1..beta_p` truth file used by simulation exports.
void write_truth(const Grid& grid, const Eigen::MatrixXd& truth, const std::string& path);
Eigen::MatrixXd read_truth(const std::string& path, Grid* grid = nullptr);

//! Formats with 17 significant digits so values survive a round trip.
std::string format_real(double value);

} // namespace vcgmm
