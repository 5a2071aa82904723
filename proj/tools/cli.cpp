#include "cli.hpp"

#include "vcgmm/netfeat.hpp"
#include "vcgmm/parallel.hpp"
#include "vcgmm/simulate.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>

namespace fs = std::filesystem;

namespace vcgmm::cli {

namespace {

struct EstimatorFlags
{
  double fve = 0.99;
  double shrink = 0.75;
  std::size_t folds = 5;
  std::size_t workers = 0;  // 0: available parallelism
  std::uint64_t cv_seed = EstimatorConfig{}.seed;

  void attach(CLI::App& app)
  {
    app.add_option("--fve", fve, "fraction of variance explained for kappa0")
      ->check(CLI::Range(1e-6, 1.0))
      ->capture_default_str();
    app.add_option("--shrink", shrink, "factor applied to the CV bandwidth of the GMM fit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
    app.add_option("--folds", folds, "cross-validation folds")->check(CLI::Range(2, 1000))->capture_default_str();
    app.add_option("--workers", workers, "worker threads (default: available parallelism)");
    app.add_option("--cv-seed", cv_seed, "seed of the fold assignment")->capture_default_str();
  }

  EstimatorConfig config() const
  {
    EstimatorConfig c;
    c.fve = fve;
    c.bandwidth_shrink = shrink;
    c.cv_folds = folds;
    c.seed = cv_seed;
    c.workers = workers == 0 ? default_workers() : workers;
    return c;
  }
};

struct SimulateArgs
{
  std::string scenario;
  int table = 0;
  std::size_t n = 50;
  double snr = 0.5;
  std::size_t replicates = 500;
  std::uint64_t seed = 1;
  std::string out = ".";
  bool verbose = false;
  bool timing = false;
  std::optional<std::size_t> export_index;
  EstimatorFlags est;
};

struct EstimateArgs
{
  std::string covariates;
  std::string responses;
  std::string out = ".";
  bool verbose = false;
  EstimatorFlags est;
};

struct NetfeatArgs
{
  std::string roi;
  std::string out = ".";
  double smooth = 0.0;
  bool verbose = false;
};

void ensure_dir(const std::string& dir)
{
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec)
    fail(ErrorKind::io, "cannot create output directory '" + dir + "': " + ec.message());
}

void write_text(const fs::path& path, const std::string& text)
{
  std::ofstream f(path);
  f << text;
  if (!f)
    fail(ErrorKind::io, "failed writing '" + path.string() + "'");
}

constexpr double max_failure_rate = 0.01;

int cmd_simulate(const SimulateArgs& a, std::ostream& out, std::ostream& err)
{
  if (a.scenario.empty() == (a.table == 0)) {
    err << "simulate: give exactly one of --scenario or --table\n";
    return exit_usage;
  }
  ensure_dir(a.out);
  auto config = a.est.config();
  const auto workers = config.workers;

  std::vector<Scenario> cells;
  if (!a.scenario.empty()) {
    const auto profile = parse_variance_profile(a.scenario);
    if (!profile) {
      err << "simulate: unknown scenario '" << a.scenario << "' (expected S0..S4)\n";
      return exit_usage;
    }
    cells.push_back(Scenario{*profile, a.snr, a.n, 200, a.replicates, a.seed});
  } else {
    const double snr = a.table == 1 ? 0.5 : 1.0;
    for (auto p : {VarianceProfile::s0, VarianceProfile::s1, VarianceProfile::s2, VarianceProfile::s3,
                   VarianceProfile::s4})
      for (std::size_t n : {50, 100, 200, 500})
        cells.push_back(Scenario{p, snr, n, 200, a.replicates, a.seed});
  }
  for (const auto& c : cells)
    c.validate();

  if (a.export_index) {
    if (cells.size() != 1) {
      err << "simulate: --export needs --scenario\n";
      return exit_usage;
    }
    const auto rep = generate(cells.front(), *a.export_index);
    const fs::path dir(a.out);
    write_dataset(rep.data, (dir / "covariates.csv").string(), (dir / "responses.csv").string());
    write_truth(rep.data.grid(), rep.truth, (dir / "truth.csv").string());
    if (a.verbose)
      out << "exported replicate " << *a.export_index << " of " << cells.front().label() << '\n';
    return exit_ok;
  }

  std::vector<MonteCarloReport> reports;
  bool breach = false;
  for (const auto& cell : cells) {
    if (a.verbose)
      out << "running " << cell.label() << " (" << cell.replicates << " replicates)" << std::endl;
    auto report = run_cell(cell, config, workers);
    const auto path = fs::path(a.out) / (cell.label() + ".json");
    write_text(path, report_to_json(report, a.timing).dump(2) + "\n");
    if (report.failures > 0)
      err << cell.label() << ": " << report.failures << " of " << cell.replicates
          << " replicates failed; first: " << [&] {
               for (const auto& r : report.replicates)
                 if (!r.ok)
                   return r.failure;
               return std::string();
             }() << '\n';
    if (report.failure_rate() > max_failure_rate) {
      err << cell.label() << ": failure rate " << report.failure_rate() << " exceeds "
          << max_failure_rate << '\n';
      breach = true;
    }
    if (a.verbose)
      out << "  LLE IMSE " << report.lle.mean_imse << "  LLGMM IMSE " << report.llgmm.mean_imse << std::endl;
    reports.push_back(std::move(report));
  }
  if (a.table != 0)
    write_text(fs::path(a.out) / ("table" + std::to_string(a.table) + ".csv"), table_csv(reports));
  return breach ? exit_failure : exit_ok;
}

int cmd_estimate(const EstimateArgs& a, std::ostream& out, std::ostream& err)
{
  FunctionalDataset data = [&] {
    try {
      return load_dataset(a.covariates, a.responses);
    } catch (const Error& e) {
      throw StageError("input", e);
    }
  }();
  ensure_dir(a.out);
  const auto config = a.est.config();
  if (a.verbose)
    out << "loaded n = " << data.n() << ", r = " << data.r() << ", p = " << data.p() << std::endl;
  EstimationResult result = [&] {
    try {
      return estimate_full(data, config);
    } catch (const Error& e) {
      err << "estimation failed: " << e.what() << '\n';
      throw;
    }
  }();
  const fs::path dir(a.out);
  write_estimate(result.lle, (dir / "estimates_lle.csv").string());
  write_estimate(result.llgmm, (dir / "estimates_llgmm.csv").string());
  write_text(dir / "diagnostics.json", to_json(result.diagnostics).dump(2) + "\n");
  if (a.verbose)
    out << "bandwidths: init " << result.diagnostics.bandwidth_init << ", gmm "
        << result.diagnostics.bandwidth_gmm << "; kappa0 " << result.diagnostics.kappa0 << std::endl;
  return exit_ok;
}

int cmd_netfeat(const NetfeatArgs& a, std::ostream& out, std::ostream&)
{
  const auto table = [&] {
    try {
      return load_roi_table(a.roi);
    } catch (const Error& e) {
      throw StageError("input", e);
    }
  }();
  ensure_dir(a.out);
  const auto thresholds = default_thresholds();
  std::vector<APLCurve> curves;
  for (Eigen::Index i = 0; i < table.values.rows(); ++i) {
    const Eigen::VectorXd row = table.values.row(i).transpose();
    auto curve = apl_curve(similarity_from_measurements({row.data(), static_cast<std::size_t>(row.size())}),
                           thresholds);
    if (a.smooth > 0.0) {
      const Grid grid(thresholds);
      const Eigen::VectorXd raw = Eigen::Map<const Eigen::VectorXd>(curve.apl.data(),
                                                                    static_cast<Eigen::Index>(curve.apl.size()));
      const Eigen::VectorXd sm = smooth_curve(raw, grid, a.smooth);
      curve.apl.assign(sm.data(), sm.data() + sm.size());
    }
    curves.push_back(std::move(curve));
  }
  const fs::path dir(a.out);
  write_apl_curves((dir / "apl_curves.csv").string(), table.ids, curves);
  write_apl_responses((dir / "responses.csv").string(), table.ids, curves);
  if (a.verbose)
    out << "wrote " << curves.size() << " curves x " << thresholds.size() << " thresholds" << std::endl;
  return exit_ok;
}

// Splices `--config FILE` entries in front of the explicit flags so the
// latter win (options take the last value given).
std::vector<std::string> expand_config(CLI::App& app, const std::vector<std::string>& args)
{
  if (args.empty())
    return args;
  auto* sub = app.get_subcommand_no_throw(args.front());
  if (!sub)
    return args;
  std::vector<std::string> rest;
  std::string path;
  for (std::size_t k = 1; k < args.size(); ++k) {
    if (args[k] == "--config" && k + 1 < args.size()) {
      path = args[++k];
    } else if (args[k].rfind("--config=", 0) == 0) {
      path = args[k].substr(9);
    } else {
      rest.push_back(args[k]);
    }
  }
  std::vector<std::string> out{args.front()};
  if (!path.empty()) {
    std::ifstream in(path);
    if (!in)
      fail(ErrorKind::io, "cannot open config file '" + path + "'");
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos)
        line.erase(hash);
      const auto eq = line.find('=');
      auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        const auto b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      if (trim(line).empty())
        continue;
      const std::string where = path + ":" + std::to_string(lineno);
      if (eq == std::string::npos)
        fail(ErrorKind::parse, where + ": expected key=value");
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      const auto* opt = key == "config" ? nullptr : sub->get_option_no_throw("--" + key);
      if (!opt)
        fail(ErrorKind::parse, where + ": unknown key '" + key + "' for " + args.front());
      if (opt->get_type_size() == 0) {
        if (value == "true" || value == "1")
          out.push_back("--" + key);
        else if (value != "false" && value != "0")
          fail(ErrorKind::parse, where + ": flag '" + key + "' takes true or false");
      } else {
        out.push_back("--" + key);
        out.push_back(value);
      }
    }
  }
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Local-linear GMM estimation of varying-coefficient models", "vcgmm"};
  app.require_subcommand(1);
  std::string config_path;  // consumed by expand_config before parsing

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo cells or full tables");
  simulate->add_option("--config", config_path, "key=value file; flags override it");
  simulate->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  simulate->add_option("--scenario", sim.scenario, "variance profile S0..S4");
  simulate->add_option("--table", sim.table, "full sweep: 1 (SNR 0.5) or 2 (SNR 1)")->check(CLI::IsMember({1, 2}));
  simulate->add_option("--n", sim.n, "subjects per replicate")->check(CLI::Range(2, 1000000))->capture_default_str();
  simulate->add_option("--snr", sim.snr, "noise calibration ratio")->check(CLI::PositiveNumber)->capture_default_str();
  simulate->add_option("--replicates", sim.replicates)->check(CLI::Range(1, 10000000))->capture_default_str();
  simulate->add_option("--seed", sim.seed, "master seed")->capture_default_str();
  simulate->add_option("--out", sim.out, "output directory")->capture_default_str();
  simulate->add_option("--export", sim.export_index, "write replicate INDEX as CSV instead of running the cell");
  simulate->add_flag("--timing", sim.timing, "include wall time in the report");
  simulate->add_flag("--verbose", sim.verbose);
  sim.est.attach(*simulate);

  EstimateArgs est;
  auto* estimate = app.add_subcommand("estimate", "fit LLE and LLGMM to CSV data");
  estimate->add_option("--config", config_path, "key=value file; flags override it");
  estimate->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  estimate->add_option("--covariates", est.covariates)->required();
  estimate->add_option("--responses", est.responses)->required();
  estimate->add_option("--out", est.out)->capture_default_str();
  estimate->add_flag("--verbose", est.verbose);
  est.est.attach(*estimate);

  NetfeatArgs net;
  auto* netfeat = app.add_subcommand("netfeat", "APL curves from per-subject ROI measurements");
  netfeat->add_option("--config", config_path, "key=value file; flags override it");
  netfeat->option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  netfeat->add_option("--roi", net.roi, "CSV with header id,roi_1,...")->required();
  netfeat->add_option("--out", net.out)->capture_default_str();
  netfeat->add_option("--smooth", net.smooth, "presmoother bandwidth over thresholds (0: raw)")
    ->check(CLI::NonNegativeNumber);
  netfeat->add_flag("--verbose", net.verbose);

  std::vector<std::string> expanded;
  try {
    expanded = expand_config(app, args);
  } catch (const Error& e) {
    err << e.what() << '\n';
    return exit_usage;
  }
  std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, err, err);
    return exit_usage;
  }

  try {
    if (simulate->parsed())
      return cmd_simulate(sim, out, err);
    if (estimate->parsed())
      return cmd_estimate(est, out, err);
    return cmd_netfeat(net, out, err);
  } catch (const StageError& e) {
    const bool input = e.stage() == "input";
    if (input)
      err << e.what() << '\n';
    return input ? exit_usage : exit_failure;
  } catch (const Error& e) {
    err << e.what() << '\n';
    return e.kind() == ErrorKind::argument || e.kind() == ErrorKind::parse ? exit_usage : exit_failure;
  }
}

} // namespace vcgmm::cli
