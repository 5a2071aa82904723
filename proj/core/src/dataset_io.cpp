#include "csv.hpp"
#include "vcgmm/core.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace vcgmm {

namespace csv {

namespace {

std::string trim(const std::string& s)
{
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos)
    return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split(const std::string& line)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string::npos)
      break;
    start = comma + 1;
  }
  return out;
}

} // namespace

Table read(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    fail(ErrorKind::io, "cannot open '" + path + "'");
  Table table;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty())
      continue;
    auto fields = split(line);
    if (table.header.empty()) {
      table.header = std::move(fields);
      continue;
    }
    if (fields.size() != table.header.size())
      fail(ErrorKind::parse,
           path + ":" + std::to_string(line_no) + ": expected " +
             std::to_string(table.header.size()) + " fields, found " +
             std::to_string(fields.size()));
    table.rows.push_back(std::move(fields));
    table.line_numbers.push_back(line_no);
  }
  if (table.header.empty())
    fail(ErrorKind::parse, path + ": missing header");
  return table;
}

double parse_real(const std::string& text, const std::string& where)
{
  double value = 0.0;
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && *first == '+')
    ++first;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || text.empty())
    fail(ErrorKind::parse, where + ": cannot parse '" + text + "' as a number");
  if (!std::isfinite(value))
    fail(ErrorKind::parse, where + ": non-finite value '" + text + "'");
  return value;
}

} // namespace csv

namespace {

void require_id_column(const csv::Table& t, const std::string& path)
{
  if (t.header.front() != "id")
    fail(ErrorKind::parse, path + ": first column must be 'id'");
  if (t.header.size() < 2)
    fail(ErrorKind::parse, path + ": no data columns");
}

std::ofstream open_out(const std::string& path)
{
  std::ofstream out(path);
  if (!out)
    fail(ErrorKind::io, "cannot write '" + path + "'");
  return out;
}

void check_written(std::ofstream& out, const std::string& path)
{
  out.flush();
  if (!out)
    fail(ErrorKind::io, "write failed for '" + path + "'");
}

} // namespace

FunctionalDataset load_dataset(const std::string& covariates_path,
                               const std::string& responses_path)
{
  const auto cov = csv::read(covariates_path);
  const auto resp = csv::read(responses_path);
  require_id_column(cov, covariates_path);
  require_id_column(resp, responses_path);

  std::vector<double> pts;
  for (std::size_t c = 1; c < resp.header.size(); ++c) {
    const double s = csv::parse_real(resp.header[c], responses_path + ": header");
    if (!pts.empty() && !(s > pts.back()))
      fail(ErrorKind::parse,
           responses_path + ": grid in header is not strictly increasing at column " +
             std::to_string(c + 1) + " ('" + resp.header[c] + "')");
    pts.push_back(s);
  }
  Grid grid = [&] {
    try {
      return Grid(pts);
    } catch (const Error& e) {
      fail(ErrorKind::parse, responses_path + ": invalid grid: " + e.what());
    }
  }();

  const auto p = static_cast<Eigen::Index>(cov.header.size() - 1);
  std::unordered_map<std::string, std::size_t> cov_row;
  for (std::size_t k = 0; k < cov.rows.size(); ++k) {
    const auto& id = cov.rows[k][0];
    if (id.empty())
      fail(ErrorKind::parse, covariates_path + ":" + std::to_string(cov.line_numbers[k]) + ": empty id");
    if (!cov_row.emplace(id, k).second)
      fail(ErrorKind::parse, covariates_path + ": duplicate id '" + id + "'");
  }

  const auto n = static_cast<Eigen::Index>(resp.rows.size());
  if (static_cast<std::size_t>(n) != cov.rows.size())
    fail(ErrorKind::parse,
         "subject counts differ: " + std::to_string(n) + " response rows vs " +
           std::to_string(cov.rows.size()) + " covariate rows");
  Eigen::MatrixXd y(n, static_cast<Eigen::Index>(grid.size()));
  Eigen::MatrixXd x(n, p);
  std::vector<std::string> ids;
  std::unordered_map<std::string, bool> seen;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = resp.rows[static_cast<std::size_t>(i)];
    const auto where = responses_path + ":" + std::to_string(resp.line_numbers[static_cast<std::size_t>(i)]);
    const auto& id = row[0];
    if (!seen.emplace(id, true).second)
      fail(ErrorKind::parse, where + ": duplicate id '" + id + "'");
    const auto it = cov_row.find(id);
    if (it == cov_row.end())
      fail(ErrorKind::parse, where + ": id '" + id + "' has no covariate row");
    for (std::size_t c = 1; c < row.size(); ++c)
      y(i, static_cast<Eigen::Index>(c - 1)) = csv::parse_real(row[c], where);
    const auto& crow = cov.rows[it->second];
    const auto cwhere = covariates_path + ":" + std::to_string(cov.line_numbers[it->second]);
    for (Eigen::Index c = 0; c < p; ++c)
      x(i, c) = csv::parse_real(crow[static_cast<std::size_t>(c + 1)], cwhere);
    ids.push_back(id);
  }
  return FunctionalDataset(std::move(grid), std::move(y), std::move(x), std::move(ids));
}

void write_dataset(const FunctionalDataset& data,
                   const std::string& covariates_path,
                   const std::string& responses_path)
{
  {
    auto out = open_out(covariates_path);
    out << "id";
    for (std::size_t c = 0; c < data.p(); ++c)
      out << ",x" << (c + 1);
    out << '\n';
    for (std::size_t i = 0; i < data.n(); ++i) {
      out << data.ids()[i];
      for (std::size_t c = 0; c < data.p(); ++c)
        out << ',' << format_real(data.covariates()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
      out << '\n';
    }
    check_written(out, covariates_path);
  }
  auto out = open_out(responses_path);
  out << "id";
  for (std::size_t j = 0; j < data.r(); ++j)
    out << ',' << format_real(data.grid()[j]);
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    out << data.ids()[i];
    for (std::size_t j = 0; j < data.r(); ++j)
      out << ',' << format_real(data.responses()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
    out << '\n';
  }
  check_written(out, responses_path);
}

void write_estimate(const CoefficientEstimate& est, const std::string& path)
{
  est.validate();
  auto out = open_out(path);
  const auto p = est.beta.cols();
  out << 's';
  for (Eigen::Index c = 0; c < p; ++c)
    out << ",beta_" << (c + 1);
  for (Eigen::Index c = 0; c < p; ++c)
    out << ",dbeta_" << (c + 1);
  out << '\n';
  for (std::size_t j = 0; j < est.grid.size(); ++j) {
    const auto jj = static_cast<Eigen::Index>(j);
    out << format_real(est.grid[j]);
    for (Eigen::Index c = 0; c < p; ++c)
      out << ',' << format_real(est.beta(jj, c));
    for (Eigen::Index c = 0; c < p; ++c)
      out << ',' << format_real(est.dbeta_scaled(jj, c));
    out << '\n';
  }
  check_written(out, path);
}

CoefficientEstimate read_estimate(const std::string& path)
{
  const auto t = csv::read(path);
  const auto cols = t.header.size();
  if (t.header.front() != "s" || cols < 3 || (cols - 1) % 2 != 0)
    fail(ErrorKind::parse, path + ": expected header s,beta_1..beta_p,dbeta_1..dbeta_p");
  const auto p = static_cast<Eigen::Index>((cols - 1) / 2);
  for (Eigen::Index c = 0; c < p; ++c) {
    if (t.header[static_cast<std::size_t>(1 + c)] != "beta_" + std::to_string(c + 1) ||
        t.header[static_cast<std::size_t>(1 + p + c)] != "dbeta_" + std::to_string(c + 1))
      fail(ErrorKind::parse, path + ": unexpected column names in header");
  }
  const auto r = static_cast<Eigen::Index>(t.rows.size());
  std::vector<double> pts;
  Eigen::MatrixXd beta(r, p), dbeta(r, p);
  for (Eigen::Index j = 0; j < r; ++j) {
    const auto& row = t.rows[static_cast<std::size_t>(j)];
    const auto where = path + ":" + std::to_string(t.line_numbers[static_cast<std::size_t>(j)]);
    pts.push_back(csv::parse_real(row[0], where));
    for (Eigen::Index c = 0; c < p; ++c) {
      beta(j, c) = csv::parse_real(row[static_cast<std::size_t>(1 + c)], where);
      dbeta(j, c) = csv::parse_real(row[static_cast<std::size_t>(1 + p + c)], where);
    }
  }
  // The file does not carry the bandwidth.
  return CoefficientEstimate{Grid(std::move(pts)), std::move(beta), std::move(dbeta),
                             std::numeric_limits<double>::quiet_NaN()};
}

void write_truth(const Grid& grid, const Eigen::MatrixXd& truth, const std::string& path)
{
  if (truth.rows() != static_cast<Eigen::Index>(grid.size()))
    fail(ErrorKind::dimension, "truth rows do not match the grid");
  auto out = open_out(path);
  out << 's';
  for (Eigen::Index c = 0; c < truth.cols(); ++c)
    out << ",beta_" << (c + 1);
  out << '\n';
  for (std::size_t j = 0; j < grid.size(); ++j) {
    out << format_real(grid[j]);
    for (Eigen::Index c = 0; c < truth.cols(); ++c)
      out << ',' << format_real(truth(static_cast<Eigen::Index>(j), c));
    out << '\n';
  }
  check_written(out, path);
}

Eigen::MatrixXd read_truth(const std::string& path, Grid* grid)
{
  const auto t = csv::read(path);
  if (t.header.front() != "s" || t.header.size() < 2)
    fail(ErrorKind::parse, path + ": expected header s,beta_1..beta_p");
  const auto r = static_cast<Eigen::Index>(t.rows.size());
  const auto p = static_cast<Eigen::Index>(t.header.size() - 1);
  std::vector<double> pts;
  Eigen::MatrixXd truth(r, p);
  for (Eigen::Index j = 0; j < r; ++j) {
    const auto& row = t.rows[static_cast<std::size_t>(j)];
    const auto where = path + ":" + std::to_string(t.line_numbers[static_cast<std::size_t>(j)]);
    pts.push_back(csv::parse_real(row[0], where));
    for (Eigen::Index c = 0; c < p; ++c)
      truth(j, c) = csv::parse_real(row[static_cast<std::size_t>(1 + c)], where);
  }
  if (grid != nullptr)
    *grid = Grid(std::move(pts));
  return truth;
}

} // namespace vcgmm
