#include "support.hpp"

#include <doctest.h>

#include <fstream>

using namespace vcgmm;
using namespace vcgmm::testing;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text)
{
  std::ofstream(path) << text;
}

ErrorKind kind_of_load(const std::filesystem::path& cov, const std::filesystem::path& resp)
{
  try {
    load_dataset(cov.string(), resp.string());
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("load_dataset accepted invalid input");
  return ErrorKind::argument;
}

} // namespace

TEST_SUITE("core")
{
  TEST_CASE("midpoint grid spacings sum to the last point")
  {
    const Grid g = Grid::midpoint(200);
    CHECK(g.size() == 200);
    CHECK(g.spacings()(0) == doctest::Approx(g[0]).epsilon(1e-15));
    CHECK(g.spacings().sum() == doctest::Approx(1.0 - 0.5 / 200).epsilon(1e-13));
    CHECK(g.quadrature_weights().sum() == doctest::Approx(g[199]).epsilon(1e-13));
  }

  TEST_CASE("grid validation")
  {
    CHECK_THROWS_AS(Grid({0.5}), Error);
    CHECK_THROWS_AS(Grid({0.3, 0.1, 0.2}), Error);
    CHECK_THROWS_AS(Grid({0.1, 0.1, 0.2}), Error);
    CHECK_THROWS_AS(Grid({0.1, 1.2}), Error);
    CHECK_THROWS_AS(Grid({0.0, 0.5}), Error);
    CHECK_NOTHROW(Grid({0.25, 0.5, 1.0}));
  }

  TEST_CASE("trapezoid examples")
  {
    const Grid unit({0.1, 0.35, 0.6, 1.0});
    const std::vector<double> ones(4, 1.0);
    CHECK(trapezoid_integrate(std::span<const double>(ones), unit) == doctest::Approx(1.0).epsilon(1e-15));

    const Grid g = Grid::midpoint(200);
    // The grid stops at 0.9975, so the quadrature of s is 0.9975^2/2 plus the leading panel.
    const double s1 = g[0], sr = g[199];
    CHECK(std::abs(trapezoid_integrate(g.points(), g) - (0.5 * (sr * sr - s1 * s1) + s1 * s1)) < 1e-12);

    Eigen::VectorXd sine = (2 * M_PI * g.points().array()).sin();
    CHECK(std::abs(trapezoid_integrate(sine, g)) < 1e-2);

    CHECK_THROWS_AS(trapezoid_integrate(Eigen::VectorXd::Ones(3), g), Error);
  }

  TEST_CASE("trapezoid linearity and positivity")
  {
    const Grid g({0.05, 0.2, 0.27, 0.5, 0.81, 0.9});
    const Eigen::VectorXd f = random_matrix(6, 1, 3);
    const Eigen::VectorXd h = random_matrix(6, 1, 4);
    const double a = 1.7, b = -0.4;
    const Eigen::VectorXd combo = a * f + b * h;
    CHECK(std::abs(trapezoid_integrate(combo, g) -
                   (a * trapezoid_integrate(f, g) + b * trapezoid_integrate(h, g))) < 1e-12);

    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const Eigen::VectorXd v = random_matrix(6, 1, seed).array().abs();
      CHECK(trapezoid_integrate(v, g) >= 0.0);
    }
  }

  TEST_CASE("load toy dataset matched by id")
  {
    const auto dir = scratch_dir("core_toy");
    write_text(dir / "cov.csv", "id,x1\nb,2.5\na,1\n");
    write_text(dir / "resp.csv", "id,0.1,0.2,0.3\na,1,2,3\nb,4,5,6\n");
    const auto data = load_dataset((dir / "cov.csv").string(), (dir / "resp.csv").string());
    CHECK(data.n() == 2);
    CHECK(data.r() == 3);
    CHECK(data.p() == 1);
    CHECK(data.ids()[0] == "a");
    CHECK(data.covariates()(0, 0) == 1.0);
    CHECK(data.covariates()(1, 0) == 2.5);
    CHECK(data.responses()(1, 2) == 6.0);
    CHECK(data.grid()[1] == 0.2);
  }

  TEST_CASE("load errors")
  {
    const auto dir = scratch_dir("core_errors");
    const auto cov = dir / "cov.csv", resp = dir / "resp.csv";

    write_text(cov, "id,x1\na,1\nb,2\n");
    write_text(resp, "id,0.3,0.1,0.2\na,1,2,3\nb,4,5,6\n");
    CHECK(kind_of_load(cov, resp) == ErrorKind::parse);

    write_text(cov, "id,x1\na,NaN\nb,2\n");
    write_text(resp, "id,0.1,0.2,0.3\na,1,2,3\nb,4,5,6\n");
    CHECK(kind_of_load(cov, resp) == ErrorKind::parse);

    write_text(cov, "id,x1\na,1\nc,2\n");
    CHECK(kind_of_load(cov, resp) == ErrorKind::parse);

    write_text(cov, "id,x1\na,1\nb,2\n");
    write_text(resp, "id,0.1,0.2,0.3\na,1,2\nb,4,5,6\n");
    CHECK(kind_of_load(cov, resp) == ErrorKind::parse);

    CHECK(kind_of_load(dir / "missing.csv", resp) == ErrorKind::io);
  }

  TEST_CASE("dataset round trip")
  {
    const Grid g({0.1, 0.3, 0.55, 0.9});
    const FunctionalDataset data(g, random_matrix(5, 4, 9), random_matrix(5, 2, 10));
    const auto dir = scratch_dir("core_roundtrip");
    write_dataset(data, (dir / "c.csv").string(), (dir / "r.csv").string());
    const auto back = load_dataset((dir / "c.csv").string(), (dir / "r.csv").string());
    CHECK(back.grid() == g);
    CHECK((back.responses() - data.responses()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.covariates() - data.covariates()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(back.ids() == data.ids());
  }

  TEST_CASE("estimate round trip and header")
  {
    const Grid g({0.2, 0.4, 0.6, 0.8});
    CoefficientEstimate est{g, random_matrix(4, 2, 1), random_matrix(4, 2, 2), 0.15};
    const auto dir = scratch_dir("core_estimate");
    const auto path = (dir / "est.csv").string();
    write_estimate(est, path);

    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header == "s,beta_1,beta_2,dbeta_1,dbeta_2");

    const auto back = read_estimate(path);
    CHECK(back.grid == g);
    CHECK((back.beta - est.beta).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((back.dbeta_scaled - est.dbeta_scaled).cwiseAbs().maxCoeff() <= 1e-12);
  }

  TEST_CASE("invalid estimate is rejected before writing")
  {
    const Grid g({0.2, 0.4, 0.6});
    CoefficientEstimate est{g, Eigen::MatrixXd(0, 1), Eigen::MatrixXd(0, 1), 0.1};
    const auto dir = scratch_dir("core_invalid");
    CHECK_THROWS_AS(write_estimate(est, (dir / "e.csv").string()), Error);
    CHECK_FALSE(std::filesystem::exists(dir / "e.csv"));
  }

  TEST_CASE("dataset invariants")
  {
    const Grid g({0.2, 0.4, 0.6});
    CHECK_THROWS_AS(FunctionalDataset(g, Eigen::MatrixXd::Zero(1, 3), Eigen::MatrixXd::Ones(1, 1)), Error);
    CHECK_THROWS_AS(FunctionalDataset(g, Eigen::MatrixXd::Zero(2, 3), Eigen::MatrixXd::Ones(3, 1)), Error);
    Eigen::MatrixXd y = Eigen::MatrixXd::Zero(2, 3);
    y(1, 1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(FunctionalDataset(g, y, Eigen::MatrixXd::Ones(2, 1)), Error);
  }

  TEST_CASE("config validation")
  {
    EstimatorConfig c;
    CHECK_NOTHROW(c.validate(10));
    c.cv_folds = 11;
    CHECK_THROWS_AS(c.validate(10), Error);
    c.cv_folds = 1;
    CHECK_THROWS_AS(c.validate(10), Error);
    c = EstimatorConfig{};
    c.bandwidth_grid = {0.1, -0.2};
    CHECK_THROWS_AS(c.validate(10), Error);
  }

  TEST_CASE("default bandwidth grid")
  {
    const Grid g = Grid::midpoint(200);
    const auto hs = default_bandwidth_grid(g);
    REQUIRE(hs.size() == 12);
    CHECK(hs.front() == doctest::Approx(2 * g.max_spacing()));
    CHECK(hs.back() == doctest::Approx(0.5));
    for (std::size_t k = 1; k < hs.size(); ++k)
      CHECK(hs[k] / hs[k - 1] == doctest::Approx(hs[1] / hs[0]));
  }
}
