#ifndef CPON_SCENARIO_H_
#define CPON_SCENARIO_H_

#include <utility>
#include <vector>

#include "cpon/knapsack.h"

namespace cpon {

// Discrete packet size distribution. Sizes are in bits.
class PacketSizeDistribution {
 public:
  struct Entry {
    double size_bits;
    double probability;
    bool operator==(const Entry&) const = default;
  };

  // Throws InvalidArgument on empty input, non-positive sizes, negative
  // probabilities or probabilities not summing to 1 within 1e-9.
  explicit PacketSizeDistribution(std::vector<Entry> entries);

  const std::vector<Entry>& entries() const { return entries_; }
  double mean() const { return mean_; }          // P_bar [bit]
  double variance() const { return variance_; }  // sigma_p^2 [bit^2]

  bool operator==(const PacketSizeDistribution&) const = default;

 private:
  std::vector<Entry> entries_;
  double mean_ = 0.0;
  double variance_ = 0.0;
};

// Circuit classes of 52, 156 and 624 Mb/s. The published request mix
// (53.56 %, 28.88 %, 15.56 %) sums to 98 %; it is rescaled to sum to one.
CircuitClassSet DefaultCircuitClasses();

// 64 B @ 60 %, 300 B @ 4 %, 580 B @ 11 %, 1518 B @ 25 %; mean 493.7 B.
PacketSizeDistribution DefaultPacketSizes();

// Every network, traffic and protocol parameter of one experiment. Rates in
// bit/s, durations in seconds.
struct ScenarioConfig {
  double channel_rate = 10e9;        // C
  double circuit_limit = 2e9;        // C_c
  int onus = 32;                     // J
  double propagation_delay = 96e-6;  // tau, one way
  double cycle = 2e-3;               // Gamma
  double guard_time = 5e-6;          // t_g
  double report_bits = 64 * 8;       // report message size; t_R = report_bits / C
  double circuit_request_rate = 0;   // lambda_c [requests/s]
  double departure_rate = 2.0;       // mu = 1 / mean holding time
  double packet_rate = 0;            // lambda_p [packets/s], all ONUs together
  CircuitClassSet classes = DefaultCircuitClasses();
  PacketSizeDistribution packet_sizes = DefaultPacketSizes();
  bool low_traffic_polling = false;
  double excess_bound_factor = 2.0;  // per-ONU grant cap in units of G_max

  double report_time() const { return report_bits / channel_rate; }
  // chi = lambda_c b_bar / (mu C)
  double circuit_load() const;
  // pi = lambda_p P_bar / C
  double packet_load() const;
  double mean_holding_time() const { return 1.0 / departure_rate; }

  // Sets lambda_c and lambda_p so that chi and pi take the given values at
  // the current mu.
  void SetLoads(double chi, double pi);
  void SetCircuitLoad(double chi);
  void SetPacketLoad(double pi);
  // Changes 1/mu keeping chi fixed.
  void SetMeanHoldingTime(double seconds);

  // Throws InvalidArgument on a violated invariant
  // (0 < C_c <= C, J >= 1, Gamma > 0, tau, t_g, t_R >= 0, ...).
  void Validate() const;

  bool operator==(const ScenarioConfig&) const = default;
};

}  // namespace cpon

#endif  // CPON_SCENARIO_H_
