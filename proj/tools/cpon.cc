// cpon: analysis and simulation front end.
//
//   cpon analyze  --scenario s.txt             closed-form results per grid point
//   cpon simulate --scenario s.txt -r 10       analysis plus replications
//   cpon table    [--scenario s.txt] -r 10     blocking table over chi x C_c
//   cpon sweep    --scenario s.txt --out dir   full grid, requested outputs
//
// Exit status: 0 ok, 1 usage or parse error, 2 infeasible configuration,
// 3 internal error.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cpon/error.h"
#include "cpon/experiment.h"
#include "cpon/scenario_io.h"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kInfeasible = 2;
constexpr int kInternal = 3;

struct Flags {
  std::string scenario;
  std::optional<uint64_t> seed;
  std::optional<int> replications;
  std::string out = ".";
  std::optional<double> duration;
  std::optional<double> warmup;
  std::optional<bool> low_traffic_polling;
  unsigned threads = 0;
};

void AddCommon(CLI::App* cmd, Flags& f) {
  cmd->add_option("--scenario", f.scenario, "scenario file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("-r,--replications", f.replications, "simulation replications per point")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", f.out, "output directory for CSV files");
  cmd->add_option("--duration", f.duration, "simulated seconds per replication")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--warmup", f.warmup, "warm-up seconds excluded from metrics")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option_function<std::string>(
         "--low-traffic-polling",
         [&f](const std::string& v) { f.low_traffic_polling = (v == "on"); },
         "extra polling rounds at low load")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--threads", f.threads, "worker threads (0: all cores)");
}

cpon::ExperimentSpec BuildSpec(const Flags& f) {
  cpon::ExperimentSpec spec =
      f.scenario.empty() ? cpon::ExperimentSpec{} : cpon::LoadScenario(f.scenario);
  if (f.seed) spec.seed = *f.seed;
  if (f.replications) spec.replications = *f.replications;
  if (f.duration) spec.duration = *f.duration;
  if (f.warmup) spec.warmup = *f.warmup;
  if (f.low_traffic_polling) spec.base.low_traffic_polling = *f.low_traffic_polling;
  spec.Validate();
  return spec;
}

void PrintSummary(const cpon::ExperimentResult& result) {
  using cpon::FormatSig4;
  std::printf("%-8s %-8s %-8s %-9s %-9s %-9s %-9s %-9s %s\n", "chi", "pi", "C_c", "1/mu",
              "Bbar[%]", "beta[G]", "Gp[ms]", "pi_max", "D[ms]");
  for (const cpon::PointResult& r : result.points) {
    const cpon::ScenarioConfig& c = r.point.cfg;
    std::printf("%-8.4g %-8.4g %-8.4g %-9.4g ", c.circuit_load(), c.packet_load(),
                c.circuit_limit / 1e9, c.mean_holding_time());
    if (!r.analysis) {
      std::printf("infeasible: %s\n", r.analysis_error.c_str());
      continue;
    }
    const cpon::AnalysisResult& a = *r.analysis;
    std::printf("%-9s %-9s %-9s %-9s %s", FormatSig4(a.blocking.average * 100).c_str(),
                FormatSig4(a.beta_bar / 1e9).c_str(), FormatSig4(a.gp_bar * 1e3).c_str(),
                FormatSig4(a.pi_max).c_str(), a.d ? FormatSig4(*a.d * 1e3).c_str() : "unstable");
    if (r.simulation && !r.simulation->runs.empty()) {
      double b = 0.0, d = 0.0;
      for (double x : r.simulation->blocking_average) b += x;
      for (double x : r.simulation->delay_mean) d += x;
      const double n = static_cast<double>(r.simulation->runs.size());
      std::printf("   sim: Bbar %s%%, D %s ms%s", FormatSig4(b / n * 100).c_str(),
                  FormatSig4(d / n * 1e3).c_str(),
                  r.simulation->unstable_runs ? " (unstable)" : "");
    }
    if (!r.simulation_error.empty()) std::printf("   sim error: %s", r.simulation_error.c_str());
    std::printf("\n");
  }
}

int Execute(cpon::ExperimentSpec spec, const Flags& f, bool write) {
  const cpon::ExperimentResult result = cpon::RunExperiment(spec, f.threads);
  if (write) {
    cpon::WriteOutputs(result, f.out);
    for (const auto& [o, text] : result.csv) {
      std::fprintf(stderr, "wrote %s\n", (std::filesystem::path(f.out) / cpon::OutputFileName(o)).c_str());
    }
  }
  PrintSummary(result);
  return result.any_infeasible() ? kInfeasible : kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Circuit/packet PON upstream analysis and simulation"};
  app.require_subcommand(1);
  Flags f;
  bool write_analysis = false;

  CLI::App* analyze = app.add_subcommand("analyze", "closed-form results for every grid point");
  AddCommon(analyze, f);
  analyze->add_flag("--csv", write_analysis, "also write the CSV outputs to --out");
  CLI::App* simulate = app.add_subcommand("simulate", "analysis plus simulation replications");
  AddCommon(simulate, f);
  CLI::App* table = app.add_subcommand("table", "blocking table over chi and C_c");
  AddCommon(table, f);
  CLI::App* sweep = app.add_subcommand("sweep", "run the scenario grid and write its outputs");
  AddCommon(sweep, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    cpon::ExperimentSpec spec = BuildSpec(f);
    if (analyze->parsed()) {
      spec.replications = 0;
      return Execute(spec, f, write_analysis);
    }
    if (simulate->parsed()) {
      if (spec.replications == 0) spec.replications = 1;
      return Execute(spec, f, true);
    }
    if (table->parsed()) {
      if (spec.sweeps.empty()) {
        spec.sweeps = {{cpon::SweepParam::kCircuitLoad, {0.1, 0.4, 0.7}},
                       {cpon::SweepParam::kCircuitLimit, {4e9, 2e9}}};
      }
      spec.outputs = {cpon::Output::kBlockingTable};
      return Execute(spec, f, true);
    }
    return Execute(spec, f, true);
  } catch (const cpon::ParseError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const cpon::InvalidArgument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kUsage;
  } catch (const cpon::InfeasibleCycle& e) {
    std::fprintf(stderr, "infeasible: %s\n", e.what());
    return kInfeasible;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return kInternal;
  }
}
