#include "cpon/experiment.h"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "cpon/error.h"
#include "cpon/stats.h"
#include "cpon/traffic.h"

namespace cpon {

std::string SweepParamName(SweepParam p) {
  switch (p) {
    case SweepParam::kPacketLoad: return "pi";
    case SweepParam::kCircuitLoad: return "chi";
    case SweepParam::kCircuitLimit: return "C_c";
    case SweepParam::kHoldingTime: return "holding";
    case SweepParam::kLowTrafficPolling: return "low_traffic_polling";
  }
  return "?";
}

std::optional<SweepParam> ParseSweepParam(const std::string& name) {
  for (SweepParam p : {SweepParam::kPacketLoad, SweepParam::kCircuitLoad, SweepParam::kCircuitLimit,
                       SweepParam::kHoldingTime, SweepParam::kLowTrafficPolling}) {
    if (SweepParamName(p) == name) return p;
  }
  return std::nullopt;
}

std::string OutputName(Output o) {
  switch (o) {
    case Output::kBlockingTable: return "blocking-table";
    case Output::kDelayCurve: return "delay-curve";
    case Output::kJitterReport: return "jitter-report";
    case Output::kStabilityReport: return "stability-report";
  }
  return "?";
}

std::optional<Output> ParseOutput(const std::string& name) {
  for (Output o : {Output::kBlockingTable, Output::kDelayCurve, Output::kJitterReport,
                   Output::kStabilityReport}) {
    if (OutputName(o) == name) return o;
  }
  return std::nullopt;
}

std::string OutputFileName(Output o) { return OutputName(o) + ".csv"; }

void ExperimentSpec::Validate() const {
  base.Validate();
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(replications >= 0, "replications must be non-negative");
  require(duration > 0.0, "duration must be positive");
  require(warmup < duration, "warm-up must be shorter than the duration");
  std::vector<SweepParam> seen;
  for (const Sweep& s : sweeps) {
    const std::string name = "sweep." + SweepParamName(s.param);
    require(!s.values.empty(), name + " has no values");
    require(std::find(seen.begin(), seen.end(), s.param) == seen.end(), name + " given twice");
    seen.push_back(s.param);
    for (double v : s.values) {
      switch (s.param) {
        case SweepParam::kPacketLoad:
        case SweepParam::kCircuitLoad:
          require(v >= 0.0, name + " values must be non-negative");
          break;
        case SweepParam::kCircuitLimit:
          require(v > 0.0 && v <= base.channel_rate, name + " values must satisfy 0 < C_c <= C");
          for (double b : base.classes.rates()) {
            require(b <= v, name + " value is below a circuit class rate");
          }
          break;
        case SweepParam::kHoldingTime:
          require(v > 0.0, name + " values must be positive");
          break;
        case SweepParam::kLowTrafficPolling:
          require(v == 0.0 || v == 1.0, name + " values must be on or off");
          break;
      }
    }
  }
}

std::vector<GridPoint> ExpandGrid(const ExperimentSpec& spec) {
  std::vector<GridPoint> grid;
  std::vector<size_t> index(spec.sweeps.size(), 0);
  while (true) {
    GridPoint g;
    g.cfg = spec.base;
    double chi = spec.base.circuit_load();
    double pi = spec.base.packet_load();
    for (size_t i = 0; i < spec.sweeps.size(); ++i) {
      const SweepParam param = spec.sweeps[i].param;
      const double v = spec.sweeps[i].values[index[i]];
      g.coordinates.emplace_back(param, v);
      switch (param) {
        case SweepParam::kPacketLoad: pi = v; break;
        case SweepParam::kCircuitLoad: chi = v; break;
        case SweepParam::kCircuitLimit: g.cfg.circuit_limit = v; break;
        case SweepParam::kHoldingTime: g.cfg.departure_rate = 1.0 / v; break;
        case SweepParam::kLowTrafficPolling: g.cfg.low_traffic_polling = v != 0.0; break;
      }
    }
    g.cfg.SetLoads(chi, pi);
    grid.push_back(std::move(g));

    size_t i = spec.sweeps.size();
    while (i > 0) {
      --i;
      if (++index[i] < spec.sweeps[i].values.size()) break;
      index[i] = 0;
      if (i == 0) return grid;
    }
    if (spec.sweeps.empty()) return grid;
  }
}

bool ExperimentResult::any_infeasible() const {
  return std::any_of(points.begin(), points.end(),
                     [](const PointResult& p) { return p.infeasible(); });
}

std::string FormatSig4(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", x);
  return buf;
}

namespace {

std::string Coord(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", x);
  return buf;
}

constexpr const char* kCoordinates = "chi,pi,C_c_Gbps,holding_s,low_traffic_polling";

std::string CoordinateCells(const ScenarioConfig& c) {
  return Coord(c.circuit_load()) + "," + Coord(c.packet_load()) + "," +
         Coord(c.circuit_limit / 1e9) + "," + Coord(c.mean_holding_time()) + "," +
         (c.low_traffic_polling ? "on" : "off");
}

double Mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

// CI halfwidth cell; empty with fewer than two replications.
std::string HalfwidthCell(const std::vector<double>& samples, double scale) {
  if (samples.size() < 2) return "";
  return FormatSig4(ConfidenceInterval(samples).halfwidth * scale);
}

void BlockingRow(std::ostream& out, const PointResult& r, int classes) {
  out << CoordinateCells(r.point.cfg);
  if (r.analysis) {
    const AnalysisResult& a = *r.analysis;
    for (int k = 0; k < classes; ++k) out << "," << FormatSig4(a.blocking.per_class[k] * 100);
    out << "," << FormatSig4(a.blocking.average * 100) << "," << FormatSig4(a.beta_bar / 1e9) << ","
        << FormatSig4(a.gp_bar * 1e3) << "," << FormatSig4(a.pi_max);
  } else {
    for (int k = 0; k < classes + 4; ++k) out << ",infeasible";
  }
  const auto& s = r.simulation;
  out << "," << (s ? s->runs.size() : 0);
  if (s && !s->runs.empty()) {
    for (int k = 0; k < classes; ++k) {
      std::vector<double> bk;
      for (const SimMetrics& m : s->runs) bk.push_back(m.blocking[k]);
      out << "," << FormatSig4(Mean(bk) * 100);
    }
    std::vector<double> beta;
    for (const SimMetrics& m : s->runs) beta.push_back(m.beta_bar);
    out << "," << FormatSig4(Mean(s->blocking_average) * 100) << ","
        << HalfwidthCell(s->blocking_average, 100) << "," << FormatSig4(Mean(beta) / 1e9);
  } else {
    for (int k = 0; k < classes + 3; ++k) out << ",";
  }
  out << "\n";
}

void DelayRow(std::ostream& out, const PointResult& r) {
  const ScenarioConfig& c = r.point.cfg;
  out << CoordinateCells(c) << "," << Coord(c.circuit_load() + c.packet_load());
  if (r.analysis) {
    out << "," << FormatSig4(r.analysis->pi_max) << ","
        << (r.analysis->d ? FormatSig4(*r.analysis->d * 1e3) : "unstable");
  } else {
    out << ",infeasible,infeasible";
  }
  const auto& s = r.simulation;
  out << "," << (s ? s->runs.size() : 0);
  if (s && !s->runs.empty()) {
    std::vector<double> sd, load;
    bool any_samples = false;
    for (const SimMetrics& m : s->runs) {
      sd.push_back(m.delay.stddev());
      load.push_back(m.offered_packet_load);
      any_samples = any_samples || m.delay.count() > 0;
    }
    if (s->unstable_runs > 0) {
      out << ",unstable,,";
    } else if (!any_samples) {
      out << ",,,";
    } else {
      out << "," << FormatSig4(Mean(s->delay_mean) * 1e3) << ","
          << HalfwidthCell(s->delay_mean, 1e3) << "," << FormatSig4(Mean(sd) * 1e3);
    }
    out << "," << FormatSig4(Mean(load));
  } else {
    out << ",,,,";
  }
  out << "\n";
}

void JitterRows(std::ostream& out, const PointResult& r) {
  const ScenarioConfig& c = r.point.cfg;
  for (int k = 0; k < c.classes.size(); ++k) {
    const double b = c.classes.rate(k);
    out << CoordinateCells(c) << "," << (k + 1) << "," << Coord(b / 1e6) << ","
        << FormatSig4(CircuitDelay(b, c) * 1e3) << "," << FormatSig4(JitterBound(b, c) * 1e3);
    const auto& s = r.simulation;
    out << "," << (s ? s->runs.size() : 0);
    int64_t windows = 0;
    int64_t circuits = 0;
    double lo = 0.0, hi = 0.0, jit = 0.0, payload = 0.0;
    if (s) {
      for (const SimMetrics& m : s->runs) {
        if (m.chunk_windows[k] > 0) {
          lo = windows == 0 ? m.chunk_delay_min[k] : std::min(lo, m.chunk_delay_min[k]);
          hi = windows == 0 ? m.chunk_delay_max[k] : std::max(hi, m.chunk_delay_max[k]);
          windows += m.chunk_windows[k];
        }
        jit = std::max(jit, m.max_jitter[k]);
        payload = std::max(payload, m.max_payload_jitter[k]);
        circuits += m.jitter_circuits[k];
      }
    }
    if (windows > 0) {
      out << "," << FormatSig4(lo * 1e3) << "," << FormatSig4(hi * 1e3);
    } else {
      out << ",,";
    }
    if (circuits > 0) {
      out << "," << FormatSig4(jit * 1e3) << "," << FormatSig4(payload * 1e3);
    } else {
      out << ",,";
    }
    out << "," << windows << "," << circuits << "\n";
  }
}

void StabilityRow(std::ostream& out, const PointResult& r) {
  out << CoordinateCells(r.point.cfg);
  if (!r.analysis) {
    out << ",infeasible,infeasible,0,,,,infeasible\n";
    return;
  }
  const bool stable_a = r.analysis->stable();
  out << "," << FormatSig4(r.analysis->pi_max) << "," << (stable_a ? "stable" : "unstable");
  const auto& s = r.simulation;
  const size_t n = s ? s->runs.size() : 0;
  out << "," << n;
  std::string status = stable_a ? "stable" : "unstable";
  if (n > 0) {
    int64_t backlog = 0;
    double limit = 0.0;
    for (const SimMetrics& m : s->runs) {
      backlog = std::max(backlog, m.final_backlog_packets);
      limit = std::max(limit, m.backlog_limit);
    }
    out << "," << s->unstable_runs << "," << backlog << "," << FormatSig4(limit);
    status = s->unstable_runs > 0 ? "unstable" : "stable";
  } else {
    out << ",,,";
  }
  out << "," << status << "\n";
}

std::string Render(Output o, const std::vector<PointResult>& points, int classes) {
  std::ostringstream out;
  switch (o) {
    case Output::kBlockingTable:
      out << BlockingTableHeader(classes) << "\n";
      for (const PointResult& r : points) BlockingRow(out, r, classes);
      break;
    case Output::kDelayCurve:
      out << DelayCurveHeader() << "\n";
      for (const PointResult& r : points) DelayRow(out, r);
      break;
    case Output::kJitterReport:
      out << JitterReportHeader() << "\n";
      for (const PointResult& r : points) JitterRows(out, r);
      break;
    case Output::kStabilityReport:
      out << StabilityReportHeader() << "\n";
      for (const PointResult& r : points) StabilityRow(out, r);
      break;
  }
  return out.str();
}

}  // namespace

std::string BlockingTableHeader(int classes) {
  std::string h = kCoordinates;
  for (int k = 1; k <= classes; ++k) h += ",B" + std::to_string(k) + "_A_pct";
  h += ",Bbar_A_pct,beta_bar_A_Gbps,Gp_A_ms,pi_max_A,replications";
  for (int k = 1; k <= classes; ++k) h += ",B" + std::to_string(k) + "_S_pct";
  h += ",Bbar_S_pct,Bbar_S_ci_pct,beta_bar_S_Gbps";
  return h;
}

std::string DelayCurveHeader() {
  return std::string(kCoordinates) +
         ",total_load,pi_max_A,D_A_ms,replications,D_S_ms,D_S_ci_ms,D_S_sd_ms,pi_S";
}

std::string JitterReportHeader() {
  return std::string(kCoordinates) +
         ",class,b_Mbps,circuit_delay_A_ms,jitter_bound_A_ms,replications,chunk_delay_S_min_ms,"
         "chunk_delay_S_max_ms,grant_jitter_S_max_ms,payload_jitter_S_max_ms,windows_S,circuits_S";
}

std::string StabilityReportHeader() {
  return std::string(kCoordinates) +
         ",pi_max_A,analysis,replications,unstable_runs_S,final_backlog_S_max,backlog_limit_S,"
         "status";
}

ExperimentResult RunExperiment(const ExperimentSpec& spec, unsigned threads) {
  spec.Validate();
  ExperimentResult result;
  for (GridPoint& g : ExpandGrid(spec)) {
    PointResult r;
    r.point = std::move(g);
    try {
      r.analysis = Analyze(r.point.cfg, spec.eta);
    } catch (const InfeasibleCycle& e) {
      r.analysis_error = e.what();
    }
    result.points.push_back(std::move(r));
  }

  // Replication jobs, in grid-point then replication order.
  struct Job {
    size_t point;
    int replication;
  };
  std::vector<Job> jobs;
  if (spec.replications > 0) {
    for (size_t i = 0; i < result.points.size(); ++i) {
      if (result.points[i].infeasible()) continue;
      for (int j = 0; j < spec.replications; ++j) jobs.push_back({i, j});
    }
  }
  std::vector<std::optional<SimMetrics>> runs(jobs.size());
  std::vector<std::string> errors(jobs.size());
  SimOptions options;
  options.duration = spec.duration;
  options.warmup = spec.warmup;

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next++; i < jobs.size(); i = next++) {
      const Job& job = jobs[i];
      try {
        runs[i] = Run(result.points[job.point].point.cfg,
                      ReplicationSeed(spec.seed, job.point, static_cast<uint64_t>(job.replication)),
                      options);
      } catch (const std::exception& e) {
        errors[i] = e.what();
      }
    }
  };
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<size_t>(threads, std::max<size_t>(jobs.size(), 1)));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::future<void>> pool;
    for (unsigned t = 0; t < threads; ++t) pool.push_back(std::async(std::launch::async, worker));
    for (auto& f : pool) f.get();
  }

  for (size_t i = 0; i < jobs.size(); ++i) {
    PointResult& r = result.points[jobs[i].point];
    if (!r.simulation) r.simulation.emplace();
    if (!errors[i].empty()) {
      if (r.simulation_error.empty()) r.simulation_error = errors[i];
      continue;
    }
    SimulationSummary& s = *r.simulation;
    const SimMetrics& m = *runs[i];
    s.blocking_average.push_back(m.blocking_average);
    s.delay_mean.push_back(m.delay.mean());
    if (m.unstable) ++s.unstable_runs;
    s.runs.push_back(m);
  }

  std::vector<Output> outputs = spec.outputs;
  if (outputs.empty()) {
    outputs = {Output::kBlockingTable, Output::kDelayCurve, Output::kJitterReport,
               Output::kStabilityReport};
  }
  for (Output o : outputs) result.csv[o] = Render(o, result.points, spec.base.classes.size());
  return result;
}

void WriteOutputs(const ExperimentResult& result, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (const auto& [output, text] : result.csv) {
    const auto path = dir / OutputFileName(output);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
  }
}

}  // namespace cpon
