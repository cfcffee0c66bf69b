#ifndef CPON_PROTOCOL_H_
#define CPON_PROTOCOL_H_

// Medium-access mechanics of the fixed-cycle circuit/packet PON: admission
// control over the knapsack state, circuit partition layout, Limited grant
// sizing with excess distribution, and cycle assembly.

#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include "cpon/scenario.h"

namespace cpon {

struct CircuitRecord {
  uint64_t id = 0;
  int onu = 0;
  int cls = 0;            // class index, 0-based
  double rate = 0.0;      // bit/s
  int64_t start_cycle = 0;  // first cycle whose circuit partition carries it
  double expiry_time = 0.0;
};

enum class AdmissionDecision { kAdmitted, kBlocked };

// The OLT's view of admitted circuits: per-class counts n, aggregate beta and
// the circuits held by each ONU in admission order.
class AdmissionState {
 public:
  AdmissionState(const CircuitClassSet& classes, double circuit_limit);

  const std::vector<int>& counts() const { return counts_; }
  double beta() const { return beta_; }
  double circuit_limit() const { return limit_; }
  // Number of ONUs holding at least one circuit.
  int eta() const { return static_cast<int>(per_onu_.size()); }
  const std::map<int, std::vector<CircuitRecord>>& per_onu() const { return per_onu_; }
  int total_circuits() const;

  // Admits iff beta + b_k <= C_c. The record's rate is taken from its class.
  AdmissionDecision Admit(CircuitRecord record);
  // Removes the circuit; returns false if it is not held.
  bool Release(int onu, uint64_t id);

 private:
  std::vector<double> rates_;
  double limit_;
  std::vector<int> counts_;
  double beta_ = 0.0;
  std::map<int, std::vector<CircuitRecord>> per_onu_;
};

struct Grant {
  int onu = 0;
  double start = 0.0;     // offset from cycle start, OLT arrival frame
  double duration = 0.0;
  bool operator==(const Grant&) const = default;
};

struct CircuitWindow {
  uint64_t circuit_id = 0;
  int onu = 0;
  int cls = 0;
  double rate = 0.0;
  double start = 0.0;
  double duration = 0.0;
  bool operator==(const CircuitWindow&) const = default;
};

struct CircuitPartition {
  double xi = 0.0;                     // beta Gamma / C of the transmitting circuits
  int eta = 0;                         // ONUs with a circuit grant
  std::vector<Grant> grants;           // one per ONU, each followed by t_g
  std::vector<CircuitWindow> windows;  // per-circuit positions inside the grants
};

struct CycleSchedule {
  int64_t index = 0;
  double xi = 0.0;
  int eta = 0;
  std::vector<Grant> circuit_grants;
  std::vector<CircuitWindow> circuit_windows;
  double packet_partition_start = 0.0;
  std::vector<Grant> packet_grants;
  double gp = 0.0;
  double g_max = 0.0;
  double omega_o = 0.0;
  bool operator==(const CycleSchedule&) const = default;
};

AdmissionDecision AdmitCircuit(AdmissionState& state, const CircuitRecord& record);

// Lays out the circuits whose start_cycle <= cycle (all of them by
// default): ONUs by id, each ONU's circuits contiguous in admission order.
CircuitPartition BuildCircuitPartition(const AdmissionState& state, const ScenarioConfig& cfg,
                                       int64_t cycle = INT64_MAX);

// Limited grant sizing with excess distribution. `requests` are the
// requested windows (including the report) per ONU. Throws InfeasibleCycle
// if gp < J t_R.
std::vector<double> SizePacketGrants(std::span<const double> requests, double gp,
                                     const ScenarioConfig& cfg);

// Full schedule of one cycle. Throws InfeasibleCycle if the packet partition
// cannot carry the reports.
CycleSchedule AssembleCycle(const AdmissionState& state, std::span<const double> requests,
                            const ScenarioConfig& cfg, int64_t cycle = 0);

// Whether the OLT may launch another polling round at `now`: true iff more
// than J (t_R + t_g) + 2 tau remains before the next circuit partition
// arrives.
bool LowTrafficPollCheck(double now, double next_circuit_partition_arrival,
                         const ScenarioConfig& cfg);

}  // namespace cpon

#endif  // CPON_PROTOCOL_H_
