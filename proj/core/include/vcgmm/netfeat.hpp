#pragma once

#include "vcgmm/core.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace vcgmm {

//! Pairwise |y_k - y_l| scaled so the largest entry is 1 (all-zero stays zero).
class SimilarityMatrix
{
public:
  explicit SimilarityMatrix(Eigen::MatrixXd values);

  std::size_t size() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  double operator()(std::size_t k, std::size_t l) const
  {
    return values_(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l));
  }
  const Eigen::MatrixXd& values() const noexcept { return values_; }

private:
  Eigen::MatrixXd values_;
};

SimilarityMatrix similarity_from_measurements(std::span<const double> measurements);

//! Symmetric boolean adjacency without self loops.
class Adjacency
{
public:
  explicit Adjacency(std::size_t nodes);

  std::size_t size() const noexcept { return nodes_; }
  bool edge(std::size_t k, std::size_t l) const { return bits_[k * nodes_ + l] != 0; }
  void connect(std::size_t k, std::size_t l);
  std::size_t edge_count() const;

private:
  std::size_t nodes_;
  std::vector<std::uint8_t> bits_;
};

//! Edge (k, l) iff c_kl > t. Throws when t is outside (0, 1).
Adjacency threshold_adjacency(const SimilarityMatrix& sim, double threshold);

struct PathLengthSummary
{
  double apl = 0.0;
  std::size_t connected_pairs = 0;
};

//! Mean BFS distance over unordered node pairs joined by some path; 0 when no
//! pair is connected.
PathLengthSummary average_path_length(const Adjacency& adj);

struct APLCurve
{
  std::vector<double> thresholds;
  std::vector<double> apl;
  std::vector<std::size_t> connected_pairs;
};

//! 0.01, 0.02, ..., 0.99
std::vector<double> default_thresholds();

APLCurve apl_curve(const SimilarityMatrix& sim, const std::vector<double>& thresholds);

//! Optional local-linear presmoother of a single curve (X = 1).
Eigen::VectorXd smooth_curve(const Eigen::VectorXd& values, const Grid& grid, double h);

struct RoiTable
{
  std::vector<std::string> ids;
  Eigen::MatrixXd values;  // subjects x ROIs
};

//! `id,roi_1,...,roi_m`
RoiTable load_roi_table(const std::string& path);

//! `id,t,apl,connected_pairs`, one row per subject and threshold.
void write_apl_curves(const std::string& path,
                      const std::vector<std::string>& ids,
                      const std::vector<APLCurve>& curves);

//! Pivot to the responses.csv layout: `id,<t_1>,...,<t_T>`.
void write_apl_responses(const std::string& path,
                         const std::vector<std::string>& ids,
                         const std::vector<APLCurve>& curves);

} // namespace vcgmm
