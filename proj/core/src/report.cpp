#include "vcgmm/simulate.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace vcgmm {

namespace {

nlohmann::json summary_json(const MethodSummary& s)
{
  return {{"mean_imse", s.mean_imse}, {"se_imse", s.se_imse},
          {"mean_imae", s.mean_imae}, {"se_imae", s.se_imae}};
}

std::string cell(double v)
{
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

} // namespace

nlohmann::json report_to_json(const MonteCarloReport& report, bool include_timing)
{
  const auto& sc = report.scenario;
  nlohmann::json reps = nlohmann::json::array();
  for (const auto& r : report.replicates) {
    nlohmann::json row{{"index", r.index}, {"ok", r.ok}};
    if (r.ok) {
      row["lle"] = {{"imse", r.lle_imse}, {"imae", r.lle_imae}};
      row["llgmm"] = {{"imse", r.llgmm_imse}, {"imae", r.llgmm_imae}};
    } else {
      row["failure"] = r.failure;
    }
    reps.push_back(std::move(row));
  }
  nlohmann::json doc{
    {"scenario", {{"profile", to_string(sc.profile)},
                  {"snr", sc.snr},
                  {"n", sc.n},
                  {"r", sc.r},
                  {"replicates", sc.replicates},
                  {"seed", sc.seed},
                  {"label", sc.label()}}},
    {"failures", report.failures},
    {"failure_rate", report.failure_rate()},
    {"lle", summary_json(report.lle)},
    {"llgmm", summary_json(report.llgmm)},
    {"per_replicate", std::move(reps)},
  };
  if (include_timing)
    doc["wall_seconds"] = report.wall_seconds;
  return doc;
}

std::string table_csv(const std::vector<MonteCarloReport>& reports)
{
  using Key = std::tuple<VarianceProfile, double>;
  std::set<std::size_t> ns;
  std::set<Key> rows;
  std::map<std::tuple<VarianceProfile, double, std::size_t>, const MonteCarloReport*> cells;
  for (const auto& rep : reports) {
    ns.insert(rep.scenario.n);
    rows.insert({rep.scenario.profile, rep.scenario.snr});
    cells[{rep.scenario.profile, rep.scenario.snr, rep.scenario.n}] = &rep;
  }
  std::ostringstream out;
  out << "scenario,snr,method";
  for (auto n : ns)
    out << ",n" << n << "_imse,n" << n << "_imae";
  out << '\n';
  for (const auto& [profile, snr] : rows) {
    for (bool gmm : {false, true}) {
      out << to_string(profile) << ',' << cell(snr) << ',' << (gmm ? "LLGMM" : "LLE");
      for (auto n : ns) {
        const auto it = cells.find({profile, snr, n});
        if (it == cells.end()) {
          out << ",,";
          continue;
        }
        const auto& s = gmm ? it->second->llgmm : it->second->lle;
        out << ',' << cell(s.mean_imse) << ',' << cell(s.mean_imae);
      }
      out << '\n';
    }
  }
  return out.str();
}

} // namespace vcgmm
