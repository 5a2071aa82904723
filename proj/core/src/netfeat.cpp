#include "vcgmm/netfeat.hpp"

#include "vcgmm/locallinear.hpp"
#include "csv.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <queue>

namespace vcgmm {

SimilarityMatrix::SimilarityMatrix(Eigen::MatrixXd values) : values_(std::move(values))
{
  if (values_.rows() != values_.cols())
    fail(ErrorKind::dimension, "similarity matrix must be square");
  if (!values_.allFinite() || (values_.array() < 0.0).any() || (values_.array() > 1.0).any())
    fail(ErrorKind::validation, "similarity entries must lie in [0, 1]");
  if (!values_.isApprox(values_.transpose(), 0.0) || values_.diagonal().cwiseAbs().maxCoeff() != 0.0)
    fail(ErrorKind::validation, "similarity matrix must be symmetric with zero diagonal");
}

SimilarityMatrix similarity_from_measurements(std::span<const double> y)
{
  const auto m = static_cast<Eigen::Index>(y.size());
  if (m < 2)
    fail(ErrorKind::argument, "need at least 2 measurements");
  Eigen::MatrixXd c(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    if (!std::isfinite(y[static_cast<std::size_t>(k)]))
      fail(ErrorKind::argument, "measurements must be finite");
    for (Eigen::Index l = 0; l < m; ++l)
      c(k, l) = std::abs(y[static_cast<std::size_t>(k)] - y[static_cast<std::size_t>(l)]);
  }
  const double top = c.maxCoeff();
  if (top > 0.0)
    c /= top;
  return SimilarityMatrix(std::move(c));
}

Adjacency::Adjacency(std::size_t nodes) : nodes_(nodes), bits_(nodes * nodes, 0) {}

void Adjacency::connect(std::size_t k, std::size_t l)
{
  if (k >= nodes_ || l >= nodes_)
    fail(ErrorKind::argument, "node index out of range");
  if (k == l)
    return;
  bits_[k * nodes_ + l] = 1;
  bits_[l * nodes_ + k] = 1;
}

std::size_t Adjacency::edge_count() const
{
  std::size_t c = 0;
  for (std::size_t k = 0; k < nodes_; ++k)
    for (std::size_t l = k + 1; l < nodes_; ++l)
      c += bits_[k * nodes_ + l];
  return c;
}

Adjacency threshold_adjacency(const SimilarityMatrix& sim, double t)
{
  if (!(t > 0.0 && t < 1.0))
    fail(ErrorKind::argument, "threshold " + format_real(t) + " outside (0, 1)");
  Adjacency adj(sim.size());
  for (std::size_t k = 0; k < sim.size(); ++k)
    for (std::size_t l = k + 1; l < sim.size(); ++l)
      if (sim(k, l) > t)
        adj.connect(k, l);
  return adj;
}

PathLengthSummary average_path_length(const Adjacency& adj)
{
  const auto m = adj.size();
  std::size_t pairs = 0;
  std::size_t total = 0;
  std::vector<std::size_t> dist(m);
  constexpr auto unseen = static_cast<std::size_t>(-1);
  for (std::size_t src = 0; src < m; ++src) {
    std::fill(dist.begin(), dist.end(), unseen);
    dist[src] = 0;
    std::queue<std::size_t> frontier;
    frontier.push(src);
    while (!frontier.empty()) {
      const auto v = frontier.front();
      frontier.pop();
      for (std::size_t w = 0; w < m; ++w)
        if (adj.edge(v, w) && dist[w] == unseen) {
          dist[w] = dist[v] + 1;
          frontier.push(w);
        }
    }
    for (std::size_t dst = src + 1; dst < m; ++dst)
      if (dist[dst] != unseen) {
        ++pairs;
        total += dist[dst];
      }
  }
  PathLengthSummary s;
  s.connected_pairs = pairs;
  s.apl = pairs > 0 ? static_cast<double>(total) / static_cast<double>(pairs) : 0.0;
  return s;
}

std::vector<double> default_thresholds()
{
  std::vector<double> t;
  for (int k = 1; k <= 99; ++k)
    t.push_back(k / 100.0);
  return t;
}

APLCurve apl_curve(const SimilarityMatrix& sim, const std::vector<double>& thresholds)
{
  for (std::size_t k = 1; k < thresholds.size(); ++k)
    if (!(thresholds[k] > thresholds[k - 1]))
      fail(ErrorKind::argument, "thresholds must be strictly increasing");
  APLCurve curve;
  curve.thresholds = thresholds;
  for (double t : thresholds) {
    const auto s = average_path_length(threshold_adjacency(sim, t));
    curve.apl.push_back(s.apl);
    curve.connected_pairs.push_back(s.connected_pairs);
  }
  return curve;
}

Eigen::VectorXd smooth_curve(const Eigen::VectorXd& values, const Grid& grid, double h)
{
  if (static_cast<std::size_t>(values.size()) != grid.size())
    fail(ErrorKind::dimension, "curve length does not match the grid");
  CrossMoments cm;
  cm.mx = Eigen::MatrixXd::Ones(1, 1);
  cm.my = values;
  cm.n = 1;
  return lle_curve(cm, grid, h, 1e-10).beta.col(0);
}

RoiTable load_roi_table(const std::string& path)
{
  const auto table = csv::read(path);
  if (table.header.size() < 3 || table.header[0] != "id")
    fail(ErrorKind::parse, path + ": expected header 'id,roi_1,...' with at least 2 ROIs");
  const auto m = static_cast<Eigen::Index>(table.header.size() - 1);
  RoiTable out;
  out.values.resize(static_cast<Eigen::Index>(table.rows.size()), m);
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const auto& row = table.rows[i];
    const auto where = path + ":" + std::to_string(table.line_numbers[i]);
    out.ids.push_back(row[0]);
    for (Eigen::Index c = 0; c < m; ++c)
      out.values(static_cast<Eigen::Index>(i), c) =
        csv::parse_real(row[static_cast<std::size_t>(c) + 1], where);
  }
  if (out.ids.empty())
    fail(ErrorKind::parse, path + ": no subjects");
  return out;
}

namespace {

std::string threshold_text(double t)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", t);
  return buf;
}

std::ofstream open_for_write(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::io, "cannot write '" + path + "'");
  return out;
}

void check_curves(const std::vector<std::string>& ids, const std::vector<APLCurve>& curves)
{
  if (ids.size() != curves.size())
    fail(ErrorKind::dimension, "one curve per subject id is required");
  for (const auto& c : curves)
    if (c.thresholds != curves.front().thresholds)
      fail(ErrorKind::dimension, "curves use different threshold sweeps");
}

} // namespace

void write_apl_curves(const std::string& path,
                      const std::vector<std::string>& ids,
                      const std::vector<APLCurve>& curves)
{
  check_curves(ids, curves);
  auto out = open_for_write(path);
  out << "id,t,apl,connected_pairs\n";
  for (std::size_t i = 0; i < ids.size(); ++i)
    for (std::size_t k = 0; k < curves[i].thresholds.size(); ++k)
      out << ids[i] << ',' << threshold_text(curves[i].thresholds[k]) << ','
          << format_real(curves[i].apl[k]) << ',' << curves[i].connected_pairs[k] << '\n';
  if (!out)
    fail(ErrorKind::io, "failed writing '" + path + "'");
}

void write_apl_responses(const std::string& path,
                         const std::vector<std::string>& ids,
                         const std::vector<APLCurve>& curves)
{
  check_curves(ids, curves);
  auto out = open_for_write(path);
  out << "id";
  if (!curves.empty())
    for (double t : curves.front().thresholds)
      out << ',' << threshold_text(t);
  out << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (double a : curves[i].apl)
      out << ',' << format_real(a);
    out << '\n';
  }
  if (!out)
    fail(ErrorKind::io, "failed writing '" + path + "'");
}

} // namespace vcgmm
