#include "cpon/analysis.h"

#include <algorithm>
#include <cstdio>
#include <cstdlib>

#include "cpon/error.h"

namespace cpon {

EtaPolicy EtaPolicy::Parse(const std::string& text) {
  if (text == "zero") return Zero();
  if (text == "expected") return Expected();
  if (text == "all") return All();
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (end == text.c_str() || *end != '\0' || !(v >= 0.0)) {
    throw InvalidArgument("eta must be zero, expected, all or a non-negative number, got '" +
                          text + "'");
  }
  return Fixed(v);
}

std::string EtaPolicy::ToString() const {
  switch (kind) {
    case Kind::kZero: return "zero";
    case Kind::kExpected: return "expected";
    case Kind::kAll: return "all";
    case Kind::kFixed: break;
  }
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

double OverheadPerCycle(double eta, const ScenarioConfig& cfg) {
  return eta * cfg.guard_time + cfg.onus * (cfg.report_time() + cfg.guard_time);
}

double UnusedSlotRemainder(const ScenarioConfig& cfg) {
  return cfg.onus * cfg.packet_sizes.mean() / (2.0 * cfg.channel_rate);
}

double MeanCircuitOrRoundTrip(const OccupancyDistribution& q, const ScenarioConfig& cfg) {
  const double round_trip = 2.0 * cfg.propagation_delay;
  return Expect(q, [&](double beta) {
    return std::max(round_trip, beta * cfg.cycle / cfg.channel_rate);
  });
}

double PacketPartitionMean(const OccupancyDistribution& q, const ScenarioConfig& cfg, double eta) {
  const double gp = cfg.cycle - MeanCircuitOrRoundTrip(q, cfg) - OverheadPerCycle(eta, cfg);
  if (gp < cfg.onus * cfg.report_time()) {
    throw InfeasibleCycle("mean packet partition cannot carry the ONU reports");
  }
  return gp;
}

StabilityLimit ComputeStabilityLimit(const OccupancyDistribution& q, const ScenarioConfig& cfg,
                                     double eta) {
  const double raw = 1.0 - MeanCircuitOrRoundTrip(q, cfg) / cfg.cycle -
                     (OverheadPerCycle(eta, cfg) + UnusedSlotRemainder(cfg)) / cfg.cycle;
  if (raw < 0.0) return {0.0, true};
  return {std::min(raw, 1.0), false};
}

double CircuitDelay(double rate_bps, const ScenarioConfig& cfg) {
  return cfg.cycle * (1.0 + rate_bps / cfg.channel_rate) + cfg.propagation_delay;
}

double JitterBound(double rate_bps, const ScenarioConfig& cfg) {
  return cfg.cycle * (cfg.circuit_limit - rate_bps) / cfg.channel_rate;
}

PacketDelay MeanPacketDelay(const OccupancyDistribution& q, const ScenarioConfig& cfg, double eta) {
  PacketDelay out;
  const double omega_o = OverheadPerCycle(eta, cfg);
  out.report_to_partition = 0.5 * (cfg.cycle + MeanCircuitOrRoundTrip(q, cfg) - omega_o);
  const StabilityLimit limit = ComputeStabilityLimit(q, cfg, eta);
  out.pi_max = limit.value;
  const double pi = cfg.packet_load();
  if (limit.no_packet_capacity || pi >= limit.value) return out;

  const PacketMoments m = ComputePacketMoments(cfg.packet_sizes);
  const double service = m.mean_bits / cfg.channel_rate;
  const double pi_eff = pi / limit.value;
  out.pi_eff = pi_eff;
  out.queueing = pi_eff * service * (1.0 + m.normalized_variance) / (2.0 * (1.0 - pi_eff));
  out.total = cfg.cycle / 2.0 + out.report_to_partition + *out.queueing + service +
              cfg.propagation_delay;
  return out;
}

PacketMoments ComputePacketMoments(const PacketSizeDistribution& sizes) {
  PacketMoments m;
  m.mean_bits = sizes.mean();
  m.variance_bits2 = sizes.variance();
  m.normalized_variance = m.variance_bits2 / (m.mean_bits * m.mean_bits);
  return m;
}

NormalizedKnapsack KnapsackFor(const ScenarioConfig& cfg) {
  return Normalize(cfg.classes, cfg.circuit_limit, cfg.circuit_request_rate, cfg.departure_rate);
}

double ResolveEta(const EtaPolicy& policy, const NormalizedKnapsack& knapsack,
                  const BlockingResult& blocking, const ScenarioConfig& cfg) {
  switch (policy.kind) {
    case EtaPolicy::Kind::kZero: return 0.0;
    case EtaPolicy::Kind::kExpected:
      return std::min<double>(cfg.onus, ExpectedActiveCircuits(knapsack, blocking));
    case EtaPolicy::Kind::kAll: return cfg.onus;
    case EtaPolicy::Kind::kFixed: return std::min<double>(cfg.onus, policy.value);
  }
  return 0.0;
}

namespace {

AnalysisResult Finish(const OccupancyDistribution& q, const ScenarioConfig& cfg, double eta,
                      BlockingResult blocking) {
  AnalysisResult r;
  r.blocking = std::move(blocking);
  r.beta_bar = Expect(q, [](double beta) { return beta; });
  r.xi_bar = r.beta_bar * cfg.cycle / cfg.channel_rate;
  r.eta = eta;
  r.omega_o = OverheadPerCycle(eta, cfg);
  r.omega_u = UnusedSlotRemainder(cfg);
  r.gp_bar = PacketPartitionMean(q, cfg, eta);
  r.pi = cfg.packet_load();
  const StabilityLimit limit = ComputeStabilityLimit(q, cfg, eta);
  r.pi_max = limit.value;
  r.no_packet_capacity = limit.no_packet_capacity;
  const PacketDelay delay = MeanPacketDelay(q, cfg, eta);
  r.pi_eff = delay.pi_eff;
  r.d_rp = delay.report_to_partition;
  r.d_q = delay.queueing;
  r.d = delay.total;
  return r;
}

}  // namespace

AnalysisResult Analyze(const ScenarioConfig& cfg, const EtaPolicy& eta) {
  cfg.Validate();
  const NormalizedKnapsack knapsack = KnapsackFor(cfg);
  const OccupancyDistribution q = KaufmanRoberts(knapsack);
  BlockingResult blocking = Blocking(q, knapsack, cfg.classes);
  const double resolved = ResolveEta(eta, knapsack, blocking, cfg);
  return Finish(q, cfg, resolved, std::move(blocking));
}

AnalysisResult AnalyzeSaturated(const ScenarioConfig& cfg, const EtaPolicy& eta) {
  cfg.Validate();
  BlockingResult blocking;
  blocking.per_class.assign(cfg.classes.size(), 1.0);
  blocking.average = 1.0;
  double resolved = 0.0;
  switch (eta.kind) {
    case EtaPolicy::Kind::kZero: break;
    // C_c filled with circuits of the mean offered rate.
    case EtaPolicy::Kind::kExpected:
      resolved = std::min<double>(cfg.onus, cfg.circuit_limit / cfg.classes.mean_rate());
      break;
    case EtaPolicy::Kind::kAll: resolved = cfg.onus; break;
    case EtaPolicy::Kind::kFixed: resolved = std::min<double>(cfg.onus, eta.value); break;
  }
  return Finish(OccupancyDistribution::PointMass(cfg.circuit_limit), cfg, resolved,
                std::move(blocking));
}

}  // namespace cpon
