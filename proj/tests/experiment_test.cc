#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cpon/experiment.h"
#include "cpon/scenario_io.h"
#include "doctest.h"

using namespace cpon;

namespace {

std::vector<std::string> Lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> Cells(const std::string& line) {
  std::vector<std::string> out;
  std::istringstream in(line);
  for (std::string cell; std::getline(in, cell, ',');) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

TEST_CASE("pinned CSV headers") {
  CHECK(BlockingTableHeader(3) ==
        "chi,pi,C_c_Gbps,holding_s,low_traffic_polling,B1_A_pct,B2_A_pct,B3_A_pct,Bbar_A_pct,"
        "beta_bar_A_Gbps,Gp_A_ms,pi_max_A,replications,B1_S_pct,B2_S_pct,B3_S_pct,Bbar_S_pct,"
        "Bbar_S_ci_pct,beta_bar_S_Gbps");
  CHECK(DelayCurveHeader() ==
        "chi,pi,C_c_Gbps,holding_s,low_traffic_polling,total_load,pi_max_A,D_A_ms,replications,"
        "D_S_ms,D_S_ci_ms,D_S_sd_ms,pi_S");
  CHECK(JitterReportHeader() ==
        "chi,pi,C_c_Gbps,holding_s,low_traffic_polling,class,b_Mbps,circuit_delay_A_ms,"
        "jitter_bound_A_ms,replications,chunk_delay_S_min_ms,chunk_delay_S_max_ms,"
        "grant_jitter_S_max_ms,payload_jitter_S_max_ms,windows_S,circuits_S");
  CHECK(StabilityReportHeader() ==
        "chi,pi,C_c_Gbps,holding_s,low_traffic_polling,pi_max_A,analysis,replications,"
        "unstable_runs_S,final_backlog_S_max,backlog_limit_S,status");
}

TEST_CASE("four significant digits") {
  CHECK(FormatSig4(0.296) == "0.296");
  CHECK(FormatSig4(29.6123) == "29.61");
  CHECK(FormatSig4(2.10649) == "2.106");
  CHECK(FormatSig4(0.0000851) == "8.51e-05");
}

TEST_CASE("blocking table over the published grid") {
  const ExperimentSpec s = ParseScenario(
      "sweep.chi = 0.1, 0.4, 0.7\nsweep.C_c = 4 Gb/s, 2 Gb/s\noutputs = blocking-table\n");
  const ExperimentResult r = RunExperiment(s);
  REQUIRE(r.csv.count(Output::kBlockingTable) == 1);
  const auto lines = Lines(r.csv.at(Output::kBlockingTable));
  REQUIRE(lines.size() == 7);
  CHECK(lines[0] == BlockingTableHeader(3));
  const auto header = Cells(lines[0]);
  for (size_t i = 1; i < lines.size(); ++i) CHECK(Cells(lines[i]).size() == header.size());
  const auto row = Cells(lines[4]);  // chi = 0.4, C_c = 2
  CHECK(row[0] == "0.4");
  CHECK(row[2] == "2");
  CHECK(std::stod(row[8]) == doctest::Approx(29.06).epsilon(0.01));
  CHECK(row[12] == "0");
  CHECK(row[16].empty());
}

TEST_CASE("single point yields a single row per output") {
  ExperimentSpec s;
  s.base.SetLoads(0.4, 0.3);
  const ExperimentResult r = RunExperiment(s);
  CHECK(r.csv.size() == 4);
  CHECK(Lines(r.csv.at(Output::kBlockingTable)).size() == 2);
  CHECK(Lines(r.csv.at(Output::kDelayCurve)).size() == 2);
  CHECK(Lines(r.csv.at(Output::kStabilityReport)).size() == 2);
  CHECK(Lines(r.csv.at(Output::kJitterReport)).size() == 4);  // one row per class
}

TEST_CASE("delay curve is monotone and marks instability") {
  const ExperimentSpec s = ParseScenario(
      "chi = 0.4\nsweep.pi = 0.1, 0.2, 0.3, 0.4, 0.5, 0.55, 0.7, 0.75, 0.85\noutputs = delay-curve\n");
  const auto lines = Lines(RunExperiment(s).csv.at(Output::kDelayCurve));
  double prev = 0.0;
  bool saw_unstable = false;
  for (size_t i = 1; i < lines.size(); ++i) {
    const std::string d = Cells(lines[i])[7];
    if (d == "unstable") {
      saw_unstable = true;
      continue;
    }
    CHECK_FALSE(saw_unstable);
    CHECK(std::stod(d) >= prev);  // 4 significant digits can tie
    prev = std::stod(d);
  }
  CHECK(saw_unstable);
}

TEST_CASE("infeasible points become tagged rows") {
  const ExperimentSpec s = ParseScenario("sweep.C_c = 2 Gb/s\nGamma = 0.3 ms\nreplications = 2\nduration = 0.1 s\n");
  const ExperimentResult r = RunExperiment(s);
  CHECK(r.any_infeasible());
  const auto row = Cells(Lines(r.csv.at(Output::kBlockingTable))[1]);
  CHECK(row[5] == "infeasible");
  const auto stab = Cells(Lines(r.csv.at(Output::kStabilityReport))[1]);
  CHECK(stab.back() == "infeasible");
}

TEST_CASE("simulation columns and byte-identical reruns") {
  const ExperimentSpec s = ParseScenario(
      "chi = 0.4\nholding = 0.05 s\nsweep.pi = 0.3, 1.5\nreplications = 3\nduration = 1 s\nseed = 9\n");
  const ExperimentResult a = RunExperiment(s, 1);
  const ExperimentResult b = RunExperiment(s, 3);
  CHECK(a.csv == b.csv);
  const auto delay = Lines(a.csv.at(Output::kDelayCurve));
  REQUIRE(delay.size() == 3);
  const auto stable_row = Cells(delay[1]);
  CHECK(stable_row[8] == "3");
  CHECK_FALSE(stable_row[9].empty());
  CHECK_FALSE(stable_row[10].empty());
  CHECK(Cells(delay[2])[7] == "unstable");
  CHECK(Cells(delay[2])[9] == "unstable");
  const auto stab = Lines(a.csv.at(Output::kStabilityReport));
  CHECK(Cells(stab[1]).back() == "stable");
  CHECK(Cells(stab[2]).back() == "unstable");

  ExperimentSpec other = s;
  other.seed = 10;
  CHECK(RunExperiment(other).csv != a.csv);
}

TEST_CASE("outputs are written to disk") {
  const auto dir = std::filesystem::temp_directory_path() / "cpon_experiment_test";
  std::filesystem::remove_all(dir);
  ExperimentSpec s;
  s.outputs = {Output::kBlockingTable};
  const ExperimentResult r = RunExperiment(s);
  WriteOutputs(r, dir);
  std::ifstream in(dir / "blocking-table.csv");
  std::stringstream text;
  text << in.rdbuf();
  CHECK(text.str() == r.csv.at(Output::kBlockingTable));
  CHECK_FALSE(std::filesystem::exists(dir / "delay-curve.csv"));
  std::filesystem::remove_all(dir);
}
