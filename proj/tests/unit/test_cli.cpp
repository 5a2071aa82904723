#include "support.hpp"

#include "cli.hpp"
#include "vcgmm/netfeat.hpp"
#include "vcgmm/simulate.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

using namespace vcgmm;
using namespace vcgmm::testing;
namespace fs = std::filesystem;

namespace {

struct Run
{
  int code;
  std::string out;
  std::string err;
};

Run run_cli(std::vector<std::string> args)
{
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& path)
{
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& path)
{
  const auto text = slurp(path);
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

} // namespace

TEST_SUITE("cli")
{
  TEST_CASE("usage errors")
  {
    CHECK(run_cli({}).code == cli::exit_usage);
    CHECK(run_cli({"simulate", "--n", "20"}).code == cli::exit_usage);
    CHECK(run_cli({"simulate", "--scenario", "S9"}).code == cli::exit_usage);
    CHECK(run_cli({"simulate", "--scenario", "S0", "--table", "1"}).code == cli::exit_usage);
    CHECK(run_cli({"simulate", "--scenario", "S0", "--bogus", "1"}).code == cli::exit_usage);
    CHECK(run_cli({"bogus"}).code == cli::exit_usage);
    const auto r = run_cli({"simulate"});
    CHECK(r.code == cli::exit_usage);
    CHECK_FALSE(r.err.empty());
    CHECK(r.out.empty());
  }

  TEST_CASE("simulate cell is deterministic across worker counts")
  {
    const auto dir = scratch_dir("cli_sim");
    const auto a = dir / "a", b = dir / "b";
    const std::vector<std::string> base{"simulate", "--scenario", "S0", "--n", "20", "--snr", "0.5",
                                        "--replicates", "3", "--seed", "7"};
    auto args = base;
    args.insert(args.end(), {"--out", a.string(), "--workers", "1"});
    CHECK(run_cli(args).code == cli::exit_ok);
    args = base;
    args.insert(args.end(), {"--out", b.string(), "--workers", "2"});
    const auto second = run_cli(args);
    CHECK(second.code == cli::exit_ok);
    CHECK(second.out.empty());
    const auto name = "S0_n20_snr0.5.json";
    REQUIRE(fs::exists(a / name));
    CHECK(slurp(a / name) == slurp(b / name));
    const auto doc = nlohmann::json::parse(slurp(a / name));
    CHECK(doc.at("scenario").at("replicates") == 3);
    CHECK(doc.at("failures") == 0);
    CHECK(doc.at("per_replicate").size() == 3);
  }

  TEST_CASE("config file sits below flags")
  {
    const auto dir = scratch_dir("cli_config");
    std::ofstream(dir / "run.cfg") << "# cell\nscenario = S1\nn = 15\nreplicates = 2\nseed = 3\nout = "
                                   << (dir / "cfg").string() << "\n";
    CHECK(run_cli({"simulate", "--config", (dir / "run.cfg").string()}).code == cli::exit_ok);
    CHECK(fs::exists(dir / "cfg" / "S1_n15_snr0.5.json"));

    CHECK(run_cli({"simulate", "--config", (dir / "run.cfg").string(), "--n", "12"}).code == cli::exit_ok);
    CHECK(fs::exists(dir / "cfg" / "S1_n12_snr0.5.json"));

    std::ofstream(dir / "bad.cfg") << "scenario = S1\ncolour = blue\n";
    CHECK(run_cli({"simulate", "--config", (dir / "bad.cfg").string()}).code == cli::exit_usage);
  }

  TEST_CASE("export and estimate")
  {
    const auto dir = scratch_dir("cli_estimate");
    CHECK(run_cli({"simulate", "--scenario", "S2", "--n", "200", "--snr", "1", "--seed", "1",
                   "--export", "0", "--out", (dir / "data").string()})
            .code == cli::exit_ok);
    REQUIRE(fs::exists(dir / "data" / "truth.csv"));

    const auto res = run_cli({"estimate", "--covariates", (dir / "data" / "covariates.csv").string(),
                              "--responses", (dir / "data" / "responses.csv").string(), "--fve", "0.99",
                              "--out", (dir / "fit").string()});
    REQUIRE(res.code == cli::exit_ok);
    const auto diag = nlohmann::json::parse(slurp(dir / "fit" / "diagnostics.json"));
    CHECK(diag.at("fve").get<double>() == 0.99);
    CHECK(diag.at("kappa0").get<std::size_t>() >= 1);

    const auto lle = read_estimate((dir / "fit" / "estimates_lle.csv").string());
    const auto gmm = read_estimate((dir / "fit" / "estimates_llgmm.csv").string());
    const auto truth = read_truth((dir / "data" / "truth.csv").string());
    CHECK(line_count(dir / "fit" / "estimates_lle.csv") == 201);
    CHECK(imse(gmm, truth).sum() < imse(lle, truth).sum());
  }

  TEST_CASE("estimate echoes fve and rejects bad input")
  {
    const auto dir = scratch_dir("cli_estimate_small");
    CHECK(run_cli({"simulate", "--scenario", "S0", "--n", "30", "--export", "2", "--out", dir.string()}).code ==
          cli::exit_ok);
    const auto cov = (dir / "covariates.csv").string(), resp = (dir / "responses.csv").string();
    CHECK(run_cli({"estimate", "--covariates", cov, "--responses", resp, "--fve", "0.9", "--out",
                   (dir / "fit").string()})
            .code == cli::exit_ok);
    CHECK(nlohmann::json::parse(slurp(dir / "fit" / "diagnostics.json")).at("fve").get<double>() == 0.9);

    CHECK(run_cli({"estimate", "--covariates", (dir / "none.csv").string(), "--responses", resp}).code ==
          cli::exit_usage);
    std::ofstream(dir / "broken.csv") << "id,0.3,0.1\na,1,2\n";
    CHECK(run_cli({"estimate", "--covariates", cov, "--responses", (dir / "broken.csv").string()}).code ==
          cli::exit_usage);
    CHECK(run_cli({"estimate", "--covariates", cov, "--responses", resp, "--folds", "31", "--out",
                   (dir / "fit2").string()})
            .code == cli::exit_failure);
  }

  TEST_CASE("netfeat pipeline")
  {
    const auto dir = scratch_dir("cli_netfeat");
    std::ofstream(dir / "roi.csv") << "id,roi_1,roi_2,roi_3,roi_4,roi_5\n"
                                      "a,0.1,0.4,0.2,0.9,0.5\n"
                                      "b,1,2,3,4,5\n"
                                      "c,3,1,4,1,5\n";
    REQUIRE(run_cli({"netfeat", "--roi", (dir / "roi.csv").string(), "--out", (dir / "out").string()}).code ==
            cli::exit_ok);
    CHECK(line_count(dir / "out" / "apl_curves.csv") == 1 + 3 * 99);

    std::ofstream(dir / "cov.csv") << "id,x1\na,1\nb,0\nc,2\n";
    const auto data = load_dataset((dir / "cov.csv").string(), (dir / "out" / "responses.csv").string());
    CHECK(data.r() == 99);

    const std::vector<double> c{3, 1, 4, 1, 5};
    const auto direct = apl_curve(similarity_from_measurements(c), default_thresholds());
    for (std::size_t k = 0; k < 99; ++k)
      CHECK(data.responses()(2, static_cast<Eigen::Index>(k)) == doctest::Approx(direct.apl[k]).epsilon(1e-15));

    CHECK(run_cli({"netfeat", "--roi", (dir / "missing.csv").string()}).code == cli::exit_usage);
  }
}
