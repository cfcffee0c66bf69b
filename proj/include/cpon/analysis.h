#ifndef CPON_ANALYSIS_H_
#define CPON_ANALYSIS_H_

// Closed-form circuit-level and approximate packet-level performance of the
// fixed-cycle circuit/packet PON upstream channel.

#include <optional>
#include <string>

#include "cpon/knapsack.h"
#include "cpon/scenario.h"

namespace cpon {

// How the analysis counts eta, the ONUs holding circuits, in the overhead
// omega_o = eta t_g + J (t_R + t_g).
struct EtaPolicy {
  enum class Kind {
    kZero,      // circuit guard times are not charged
    kExpected,  // min(J, E[active circuits])
    kAll,       // eta = J, worst case
    kFixed,     // eta = value
  };
  Kind kind = Kind::kZero;
  double value = 0.0;

  static EtaPolicy Zero() { return {Kind::kZero, 0.0}; }
  static EtaPolicy Expected() { return {Kind::kExpected, 0.0}; }
  static EtaPolicy All() { return {Kind::kAll, 0.0}; }
  static EtaPolicy Fixed(double eta) { return {Kind::kFixed, eta}; }

  // "zero", "expected", "all" or a number.
  static EtaPolicy Parse(const std::string& text);
  std::string ToString() const;

  bool operator==(const EtaPolicy&) const = default;
};

struct PacketMoments {
  double mean_bits = 0.0;
  double variance_bits2 = 0.0;
  double normalized_variance = 0.0;  // sigma_p^2 / P_bar^2
};

struct StabilityLimit {
  double value = 0.0;               // pi_max, clamped to [0, 1]
  bool no_packet_capacity = false;  // the unclamped expression was negative
};

struct PacketDelay {
  double report_to_partition = 0.0;   // D_r-p
  double pi_max = 0.0;
  std::optional<double> pi_eff;       // pi / pi_max, when stable
  std::optional<double> queueing;     // D_q
  std::optional<double> total;        // D
  bool stable() const { return total.has_value(); }
};

struct AnalysisResult {
  BlockingResult blocking;
  double beta_bar = 0.0;         // bit/s
  double xi_bar = 0.0;           // s
  double eta = 0.0;
  double omega_o = 0.0;          // s
  double omega_u = 0.0;          // s
  double gp_bar = 0.0;           // s
  double pi = 0.0;
  double pi_max = 0.0;
  bool no_packet_capacity = false;
  std::optional<double> pi_eff;
  double d_rp = 0.0;             // s
  std::optional<double> d_q;     // s; empty when unstable
  std::optional<double> d;       // s; empty when unstable
  bool stable() const { return d.has_value(); }
};

// omega_o = eta t_g + J (t_R + t_g)
double OverheadPerCycle(double eta, const ScenarioConfig& cfg);

// omega_u = J P_bar / (2 C)
double UnusedSlotRemainder(const ScenarioConfig& cfg);

// E_beta[max{2 tau, beta Gamma / C}]
double MeanCircuitOrRoundTrip(const OccupancyDistribution& q, const ScenarioConfig& cfg);

// G_p_bar = Gamma - E_beta[max{2 tau, beta Gamma / C}] - omega_o. Throws
// InfeasibleCycle if the result cannot fit the J mandatory reports.
double PacketPartitionMean(const OccupancyDistribution& q, const ScenarioConfig& cfg, double eta);

// pi_max = 1 - E_beta[max{2 tau / Gamma, beta / C}] - (omega_o + omega_u) / Gamma
StabilityLimit ComputeStabilityLimit(const OccupancyDistribution& q, const ScenarioConfig& cfg,
                                     double eta);

// Gamma (1 + b / C) + tau
double CircuitDelay(double rate_bps, const ScenarioConfig& cfg);

// Gamma (C_c - b) / C
double JitterBound(double rate_bps, const ScenarioConfig& cfg);

// M/G/1-based mean packet delay. Unstable (no total) when pi >= pi_max.
PacketDelay MeanPacketDelay(const OccupancyDistribution& q, const ScenarioConfig& cfg, double eta);

PacketMoments ComputePacketMoments(const PacketSizeDistribution& sizes);

// Builds the knapsack for cfg.
NormalizedKnapsack KnapsackFor(const ScenarioConfig& cfg);

// Resolves eta for the given occupancy.
double ResolveEta(const EtaPolicy& policy, const NormalizedKnapsack& knapsack,
                  const BlockingResult& blocking, const ScenarioConfig& cfg);

// Knapsack plus packet analysis for one scenario.
AnalysisResult Analyze(const ScenarioConfig& cfg, const EtaPolicy& eta = EtaPolicy::Zero());

// The chi -> infinity limit: beta sits at C_c in every cycle and every
// request is blocked.
AnalysisResult AnalyzeSaturated(const ScenarioConfig& cfg, const EtaPolicy& eta = EtaPolicy::Zero());

}  // namespace cpon

#endif  // CPON_ANALYSIS_H_
