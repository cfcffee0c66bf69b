#ifndef CPON_EXPERIMENT_H_
#define CPON_EXPERIMENT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cpon/analysis.h"
#include "cpon/scenario.h"
#include "cpon/simulator.h"

namespace cpon {

enum class SweepParam { kPacketLoad, kCircuitLoad, kCircuitLimit, kHoldingTime, kLowTrafficPolling };

// Scenario-file names: pi, chi, C_c, holding, low_traffic_polling.
std::string SweepParamName(SweepParam p);
std::optional<SweepParam> ParseSweepParam(const std::string& name);

// Values are in base units: bit/s for C_c, seconds for holding, 0/1 for
// low_traffic_polling.
struct Sweep {
  SweepParam param = SweepParam::kPacketLoad;
  std::vector<double> values;
  bool operator==(const Sweep&) const = default;
};

enum class Output { kBlockingTable, kDelayCurve, kJitterReport, kStabilityReport };

std::string OutputName(Output o);  // e.g. "blocking-table"
std::optional<Output> ParseOutput(const std::string& name);
std::string OutputFileName(Output o);  // e.g. "blocking-table.csv"

struct ExperimentSpec {
  ScenarioConfig base;
  std::vector<Sweep> sweeps;  // first sweep varies slowest
  int replications = 0;
  uint64_t seed = 1;
  double duration = 10.0;  // simulated seconds per replication
  double warmup = -1.0;    // negative: 10 % of duration
  EtaPolicy eta = EtaPolicy::Zero();
  std::vector<Output> outputs;  // empty: all four

  // Throws InvalidArgument naming the violated invariant.
  void Validate() const;
  bool operator==(const ExperimentSpec&) const = default;
};

// One grid point: the swept coordinates and the resulting configuration.
struct GridPoint {
  std::vector<std::pair<SweepParam, double>> coordinates;
  ScenarioConfig cfg;
};

// Cartesian product of the sweeps applied to base. Loads are re-derived from
// chi and pi after every coordinate is set, so lambda_c = chi mu C / b_bar
// and lambda_p = pi C / P_bar hold at each point.
std::vector<GridPoint> ExpandGrid(const ExperimentSpec& spec);

// Aggregated replications of one grid point.
struct SimulationSummary {
  std::vector<SimMetrics> runs;
  std::vector<double> blocking_average;  // per run
  std::vector<double> delay_mean;        // per run, seconds
  int unstable_runs = 0;
};

struct PointResult {
  GridPoint point;
  std::optional<AnalysisResult> analysis;  // empty when infeasible
  std::string analysis_error;
  std::optional<SimulationSummary> simulation;
  std::string simulation_error;
  bool infeasible() const { return !analysis.has_value(); }
};

struct ExperimentResult {
  std::vector<PointResult> points;
  std::map<Output, std::string> csv;  // file contents per requested output
  bool any_infeasible() const;
};

// Evaluates every grid point and renders the requested CSVs. Replications of
// all points run concurrently on up to `threads` workers (0: hardware
// concurrency); results and files are ordered by grid point and replication
// index only.
ExperimentResult RunExperiment(const ExperimentSpec& spec, unsigned threads = 0);

// Writes result.csv into dir, creating it if needed.
void WriteOutputs(const ExperimentResult& result, const std::filesystem::path& dir);

// Pinned CSV headers for K circuit classes.
std::string BlockingTableHeader(int classes);
std::string DelayCurveHeader();
std::string JitterReportHeader();
std::string StabilityReportHeader();

// Four significant digits, as used throughout the CSVs.
std::string FormatSig4(double x);

}  // namespace cpon

#endif  // CPON_EXPERIMENT_H_
