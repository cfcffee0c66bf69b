#ifndef CPON_SIMULATOR_H_
#define CPON_SIMULATOR_H_

// Discrete-event simulation of the ONU/OLT polling loop.
//
// Time is global; cycle n spans [n Gamma, (n + 1) Gamma) in the OLT arrival
// frame. An upstream burst that arrives at the OLT at offset o of cycle n
// leaves its ONU at n Gamma + o - tau. Reports carried in cycle n - 1 are
// processed at n Gamma: departures first, then circuit requests in request
// order (admitted circuits transmit from cycle n + 1), then the packet
// grants of cycle n are sized from the latest reports.

#include <cstdint>
#include <deque>
#include <vector>

#include "cpon/protocol.h"
#include "cpon/scenario.h"
#include "cpon/stats.h"

namespace cpon {

struct QueuedPacket {
  double arrival = 0.0;
  double size_bits = 0.0;
  bool measured = false;  // arrived after warm-up
};

struct CircuitRequest {
  double time = 0.0;
  int onu = 0;
  int cls = 0;
  double holding = 0.0;
  uint64_t seq = 0;
};

struct OnuState {
  std::deque<QueuedPacket> queue;
  double queued_bits = 0.0;
  // Backlog carried by the most recent report: what the queue held at the
  // report instant beyond the packets sent in that same burst.
  double reported_backlog = 0.0;
  std::vector<CircuitRequest> pending_requests;
  int64_t arrived = 0;
  int64_t delivered = 0;
};

struct CompletedPacket {
  double arrival = 0.0;
  double delivery = 0.0;  // last bit received at the OLT
  double size_bits = 0.0;
  bool measured = false;
};

// Serves one packet grant starting at `now` (ONU time): the report takes the
// first t_R, then whole packets leave FIFO at rate C while they fit; nothing
// is fragmented. Updates the queue and the ONU's reported backlog.
std::vector<CompletedPacket> ServePacketGrant(OnuState& onu, double grant, double now,
                                              const ScenarioConfig& cfg);

struct SimOptions {
  double duration = 10.0;
  double warmup = -1.0;  // negative: 10 % of duration
  double unstable_backlog_factor = 100.0;
  bool record_xi_trace = false;
};

struct SimMetrics {
  std::vector<int64_t> offered;
  std::vector<int64_t> admitted;
  std::vector<int64_t> blocked;
  std::vector<double> blocking;  // per class, blocked / offered
  double blocking_average = 0.0; // all blocked / all offered
  RunningStats delay;            // packet delay [s]
  double beta_bar = 0.0;         // mean transmitting circuit bandwidth [bit/s]
  double knapsack_beta_bar = 0.0;  // mean admitted (incl. not yet started) [bit/s]
  std::vector<double> xi_trace;  // per cycle, when requested
  double warmup = 0.0;
  int64_t cycles = 0;            // cycles after warm-up
  int64_t low_traffic_rounds = 0;
  double offered_packet_load = 0.0;  // measured pi after warm-up

  std::vector<int64_t> onu_arrived;
  std::vector<int64_t> onu_delivered;
  std::vector<int64_t> onu_queued;
  int64_t final_backlog_packets = 0;
  double backlog_limit = 0.0;
  bool unstable = false;

  // Circuit realization, per class: range of the delay from a chunk's first
  // generated bit to its complete arrival at the OLT, and the worst
  // grant-start variation across the cycles one circuit was observed.
  std::vector<double> chunk_delay_min;
  std::vector<double> chunk_delay_max;
  std::vector<int64_t> chunk_windows;
  std::vector<double> max_jitter;
  std::vector<double> max_payload_jitter;  // grant start minus preceding guard times
  std::vector<int64_t> jitter_circuits;
};

// Runs one replication. Throws InfeasibleCycle if the empty-state cycle
// cannot be assembled, InvalidArgument if duration <= warmup.
SimMetrics Run(const ScenarioConfig& cfg, uint64_t seed, const SimOptions& options);
SimMetrics Run(const ScenarioConfig& cfg, uint64_t seed, double duration, double warmup = -1.0);

}  // namespace cpon

#endif  // CPON_SIMULATOR_H_
