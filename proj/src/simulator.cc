#include "cpon/simulator.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <unordered_map>

#include "cpon/error.h"
#include "cpon/event_queue.h"
#include "cpon/traffic.h"

namespace cpon {

std::vector<CompletedPacket> ServePacketGrant(OnuState& onu, double grant, double now,
                                              const ScenarioConfig& cfg) {
  std::vector<CompletedPacket> done;
  const double payload = grant - cfg.report_time();
  const double first_bit_at_olt = now + cfg.propagation_delay + cfg.report_time();
  double used = 0.0;
  // Relative slack so a grant sized exactly for k packets carries all k.
  const double slack = 1e-9 * cfg.cycle;
  while (!onu.queue.empty()) {
    const QueuedPacket& head = onu.queue.front();
    if (head.arrival > now) break;
    const double tx = head.size_bits / cfg.channel_rate;
    if (used + tx > payload + slack) break;
    used += tx;
    done.push_back({head.arrival, first_bit_at_olt + used, head.size_bits, head.measured});
    onu.queued_bits -= head.size_bits;
    onu.queue.pop_front();
  }
  if (onu.queue.empty()) onu.queued_bits = 0.0;
  onu.delivered += static_cast<int64_t>(done.size());
  onu.reported_backlog = onu.queued_bits;
  return done;
}

namespace {

struct Report {
  double backlog_bits = 0.0;
  std::vector<CircuitRequest> requests;
};

struct CircuitTrack {
  int cls = 0;
  double min_start = std::numeric_limits<double>::infinity();
  double max_start = -std::numeric_limits<double>::infinity();
  double min_payload = std::numeric_limits<double>::infinity();
  double max_payload = -std::numeric_limits<double>::infinity();
  int64_t cycles = 0;
};

class Simulation {
 public:
  Simulation(const ScenarioConfig& cfg, uint64_t seed, const SimOptions& options)
      : cfg_(cfg),
        opt_(options),
        warmup_(options.warmup < 0.0 ? 0.1 * options.duration : options.warmup),
        state_(cfg.classes, cfg.circuit_limit),
        onus_(cfg.onus),
        in_flight_(cfg.onus),
        latest_backlog_(cfg.onus, 0.0) {
    if (cfg.circuit_request_rate > 0.0) circuits_.emplace(cfg, seed);
    if (cfg.packet_rate > 0.0) packets_.emplace(cfg, seed);
    const int k = cfg.classes.size();
    m_.offered.assign(k, 0);
    m_.admitted.assign(k, 0);
    m_.blocked.assign(k, 0);
    m_.max_jitter.assign(k, 0.0);
    m_.max_payload_jitter.assign(k, 0.0);
    m_.jitter_circuits.assign(k, 0);
    m_.chunk_delay_min.assign(k, 0.0);
    m_.chunk_delay_max.assign(k, 0.0);
    m_.chunk_windows.assign(k, 0);
    m_.warmup = warmup_;
  }

  SimMetrics Execute() {
    queue_.Push({.time = 0.0, .kind = EventKind::kCycleStart, .cycle = 0});
    if (circuits_) ScheduleNextRequest(0.0);
    if (packets_) DrawNextPacket(0.0);

    for (;;) {
      const bool packet_first =
          packets_ && (queue_.empty() || next_packet_.time < queue_.top().time ||
                       (next_packet_.time == queue_.top().time &&
                        EventKind::kPacketArrival < queue_.top().kind));
      const double t = packet_first ? next_packet_.time
                                    : (queue_.empty() ? std::numeric_limits<double>::infinity()
                                                      : queue_.top().time);
      if (t >= opt_.duration) break;
      if (packet_first) {
        OnPacketArrival();
        continue;
      }
      const Event e = queue_.Pop();
      switch (e.kind) {
        case EventKind::kCircuitExpiry: OnCircuitExpiry(e); break;
        case EventKind::kReportArrivalAtOlt: OnReportArrival(e); break;
        case EventKind::kUpstreamTransmissionEnd: OnTransmissionEnd(e); break;
        case EventKind::kLowTrafficPollRound: OnLowTrafficRound(e); break;
        case EventKind::kCircuitRequestArrival: OnCircuitRequest(e); break;
        case EventKind::kPacketArrival: break;  // packets come from the merged source
        case EventKind::kCycleStart: OnCycleStart(e); break;
        case EventKind::kGrantStart: OnGrantStart(e); break;
      }
    }
    return Finish();
  }

 private:
  // --- traffic sources ---

  void ScheduleNextRequest(double now) {
    const CircuitRequestDraw d = circuits_->Next();
    pending_draw_ = d;
    queue_.Push({.time = now + d.interarrival, .kind = EventKind::kCircuitRequestArrival});
  }

  void DrawNextPacket(double now) {
    const PacketDraw d = packets_->Next();
    next_packet_ = {now + d.interarrival, d.size_bits, d.onu};
  }

  void OnPacketArrival() {
    const double now = next_packet_.time;
    OnuState& onu = onus_[next_packet_.onu];
    const bool measured = now >= warmup_;
    onu.queue.push_back({now, next_packet_.size_bits, measured});
    onu.queued_bits += next_packet_.size_bits;
    ++onu.arrived;
    if (measured) arrived_bits_ += next_packet_.size_bits;
    DrawNextPacket(now);
  }

  void OnCircuitRequest(const Event& e) {
    const CircuitRequestDraw d = pending_draw_;
    onus_[d.onu].pending_requests.push_back({e.time, d.onu, d.cls, d.holding, request_seq_++});
    ScheduleNextRequest(e.time);
  }

  // --- OLT side ---

  void OnCircuitExpiry(const Event& e) {
    FoldTrack(e.id);
    state_.Release(e.onu, e.id);
  }

  void OnReportArrival(const Event& e) {
    Report& r = in_flight_[e.onu];
    latest_backlog_[e.onu] = r.backlog_bits;
    for (CircuitRequest& c : r.requests) olt_requests_.push_back(c);
    r.requests.clear();
  }

  void OnCycleStart(const Event& e) {
    const int64_t n = e.cycle;
    const double cycle_start = e.time;
    const bool measured = cycle_start >= warmup_;

    AdmitPending(n);

    std::vector<double> requests(cfg_.onus);
    for (int j = 0; j < cfg_.onus; ++j) {
      requests[j] = cfg_.report_time() + latest_backlog_[j] / cfg_.channel_rate;
    }
    const CycleSchedule s = AssembleCycle(state_, requests, cfg_, n);

    if (measured) {
      ++m_.cycles;
      beta_sum_ += s.xi * cfg_.channel_rate / cfg_.cycle;
      knapsack_beta_sum_ += state_.beta();
      if (opt_.record_xi_trace) m_.xi_trace.push_back(s.xi);
      ObserveCircuits(s, cycle_start);
    }

    const double round_end = PlaceGrants(s.packet_grants, cycle_start, n);
    if (cfg_.low_traffic_polling) {
      queue_.Push({.time = round_end, .kind = EventKind::kUpstreamTransmissionEnd, .cycle = n});
    }
    queue_.Push({.time = static_cast<double>(n + 1) * cfg_.cycle, .kind = EventKind::kCycleStart, .cycle = n + 1});
  }

  void AdmitPending(int64_t n) {
    std::stable_sort(olt_requests_.begin(), olt_requests_.end(),
                     [](const CircuitRequest& a, const CircuitRequest& b) {
                       return a.time != b.time ? a.time < b.time : a.seq < b.seq;
                     });
    const double start_time = static_cast<double>(n + 1) * cfg_.cycle;
    for (const CircuitRequest& r : olt_requests_) {
      const bool counted = r.time >= warmup_;
      if (counted) ++m_.offered[r.cls];
      CircuitRecord rec;
      rec.id = next_circuit_id_++;
      rec.onu = r.onu;
      rec.cls = r.cls;
      rec.start_cycle = n + 1;
      rec.expiry_time = start_time + r.holding;
      if (state_.Admit(rec) == AdmissionDecision::kBlocked) {
        if (counted) ++m_.blocked[r.cls];
        continue;
      }
      if (counted) ++m_.admitted[r.cls];
      // Released at the end of the cycle in which the holding time elapses.
      const auto last_cycle = static_cast<int64_t>(std::floor(rec.expiry_time / cfg_.cycle));
      queue_.Push({.time = static_cast<double>(last_cycle + 1) * cfg_.cycle,
                   .kind = EventKind::kCircuitExpiry,
                   .onu = rec.onu,
                   .id = rec.id});
    }
    olt_requests_.clear();
  }

  // Schedules the ONU bursts of one packet round; returns the OLT time at
  // which the last burst has fully arrived.
  double PlaceGrants(const std::vector<Grant>& grants, double cycle_start, int64_t n) {
    double end = cycle_start;
    for (const Grant& g : grants) {
      const double arrive = cycle_start + g.start;
      queue_.Push({.time = arrive - cfg_.propagation_delay,
                   .kind = EventKind::kGrantStart,
                   .onu = g.onu,
                   .cycle = n,
                   .value = g.duration});
      end = std::max(end, arrive + g.duration);
    }
    return end;
  }

  void OnTransmissionEnd(const Event& e) {
    const double next_partition = static_cast<double>(e.cycle + 1) * cfg_.cycle;
    if (LowTrafficPollCheck(e.time, next_partition, cfg_)) {
      queue_.Push({.time = e.time, .kind = EventKind::kLowTrafficPollRound, .cycle = e.cycle});
    }
  }

  void OnLowTrafficRound(const Event& e) {
    // Gate leaves now; the first burst reaches the OLT one round trip later.
    const double cycle_start = static_cast<double>(e.cycle) * cfg_.cycle;
    const double first_arrival = e.time + 2.0 * cfg_.propagation_delay;
    const double next_partition = cycle_start + cfg_.cycle;
    const double gp = next_partition - first_arrival - cfg_.onus * cfg_.guard_time;
    std::vector<double> requests(cfg_.onus);
    for (int j = 0; j < cfg_.onus; ++j) {
      requests[j] = cfg_.report_time() + latest_backlog_[j] / cfg_.channel_rate;
    }
    const std::vector<double> sizes = SizePacketGrants(requests, gp, cfg_);
    std::vector<Grant> grants;
    double offset = first_arrival - cycle_start;
    for (int j = 0; j < cfg_.onus; ++j) {
      grants.push_back({j, offset, sizes[j]});
      offset += sizes[j] + cfg_.guard_time;
    }
    if (e.time >= warmup_) ++m_.low_traffic_rounds;
    const double round_end = PlaceGrants(grants, cycle_start, e.cycle);
    queue_.Push({.time = round_end, .kind = EventKind::kUpstreamTransmissionEnd, .cycle = e.cycle});
  }

  // --- ONU side ---

  void OnGrantStart(const Event& e) {
    OnuState& onu = onus_[e.onu];
    for (const CompletedPacket& p : ServePacketGrant(onu, e.value, e.time, cfg_)) {
      if (p.measured) m_.delay.Add(p.delivery - p.arrival);
    }
    Report& r = in_flight_[e.onu];
    r.backlog_bits = onu.reported_backlog;
    r.requests.insert(r.requests.end(), onu.pending_requests.begin(), onu.pending_requests.end());
    onu.pending_requests.clear();
    queue_.Push({.time = e.time + cfg_.propagation_delay + cfg_.report_time(),
                 .kind = EventKind::kReportArrivalAtOlt,
                 .onu = e.onu});
  }

  // --- circuit realization ---

  void ObserveCircuits(const CycleSchedule& s, double cycle_start) {
    int preceding_grants = 0;
    int last_onu = -1;
    for (const CircuitWindow& w : s.circuit_windows) {
      if (w.onu != last_onu) {
        if (last_onu >= 0) ++preceding_grants;
        last_onu = w.onu;
      }
      const double tx_at_onu = cycle_start + w.start - cfg_.propagation_delay;
      const double first_bit = tx_at_onu - cfg_.cycle;
      const double chunk_received = tx_at_onu + cfg_.propagation_delay + w.duration;
      const double delay = chunk_received - first_bit;
      if (m_.chunk_windows[w.cls] == 0) {
        m_.chunk_delay_min[w.cls] = m_.chunk_delay_max[w.cls] = delay;
      } else {
        m_.chunk_delay_min[w.cls] = std::min(m_.chunk_delay_min[w.cls], delay);
        m_.chunk_delay_max[w.cls] = std::max(m_.chunk_delay_max[w.cls], delay);
      }
      ++m_.chunk_windows[w.cls];

      CircuitTrack& t = tracks_[w.circuit_id];
      t.cls = w.cls;
      const double payload = w.start - preceding_grants * cfg_.guard_time;
      t.min_start = std::min(t.min_start, w.start);
      t.max_start = std::max(t.max_start, w.start);
      t.min_payload = std::min(t.min_payload, payload);
      t.max_payload = std::max(t.max_payload, payload);
      ++t.cycles;
    }
  }

  void FoldTrack(uint64_t id) {
    auto it = tracks_.find(id);
    if (it == tracks_.end()) return;
    const CircuitTrack& t = it->second;
    if (t.cycles >= 2) {
      m_.max_jitter[t.cls] = std::max(m_.max_jitter[t.cls], t.max_start - t.min_start);
      m_.max_payload_jitter[t.cls] =
          std::max(m_.max_payload_jitter[t.cls], t.max_payload - t.min_payload);
      ++m_.jitter_circuits[t.cls];
    }
    tracks_.erase(it);
  }

  SimMetrics Finish() {
    std::vector<uint64_t> ids;
    for (const auto& [id, t] : tracks_) ids.push_back(id);
    std::sort(ids.begin(), ids.end());
    for (uint64_t id : ids) FoldTrack(id);

    int64_t offered = 0;
    int64_t blocked = 0;
    for (int k = 0; k < cfg_.classes.size(); ++k) {
      m_.blocking.push_back(m_.offered[k] > 0 ? static_cast<double>(m_.blocked[k]) / m_.offered[k]
                                              : 0.0);
      offered += m_.offered[k];
      blocked += m_.blocked[k];
    }
    m_.blocking_average = offered > 0 ? static_cast<double>(blocked) / offered : 0.0;
    if (m_.cycles > 0) {
      m_.beta_bar = beta_sum_ / m_.cycles;
      m_.knapsack_beta_bar = knapsack_beta_sum_ / m_.cycles;
    }
    m_.offered_packet_load = arrived_bits_ / (cfg_.channel_rate * (opt_.duration - warmup_));

    for (const OnuState& o : onus_) {
      m_.onu_arrived.push_back(o.arrived);
      m_.onu_delivered.push_back(o.delivered);
      m_.onu_queued.push_back(static_cast<int64_t>(o.queue.size()));
      m_.final_backlog_packets += static_cast<int64_t>(o.queue.size());
    }
    m_.backlog_limit = opt_.unstable_backlog_factor * cfg_.packet_rate * cfg_.cycle;
    m_.unstable = cfg_.packet_rate > 0.0 && m_.final_backlog_packets > m_.backlog_limit;
    return std::move(m_);
  }

  struct NextPacket {
    double time = 0.0;
    double size_bits = 0.0;
    int onu = 0;
  };

  const ScenarioConfig& cfg_;
  SimOptions opt_;
  double warmup_;
  EventQueue queue_;
  AdmissionState state_;
  std::vector<OnuState> onus_;
  std::vector<Report> in_flight_;
  std::vector<double> latest_backlog_;
  std::vector<CircuitRequest> olt_requests_;
  std::optional<CircuitRequestGenerator> circuits_;
  std::optional<PacketGenerator> packets_;
  CircuitRequestDraw pending_draw_;
  NextPacket next_packet_;
  uint64_t request_seq_ = 0;
  uint64_t next_circuit_id_ = 1;
  std::unordered_map<uint64_t, CircuitTrack> tracks_;
  double beta_sum_ = 0.0;
  double knapsack_beta_sum_ = 0.0;
  double arrived_bits_ = 0.0;
  SimMetrics m_;
};

}  // namespace

SimMetrics Run(const ScenarioConfig& cfg, uint64_t seed, const SimOptions& options) {
  cfg.Validate();
  const double warmup = options.warmup < 0.0 ? 0.1 * options.duration : options.warmup;
  if (!(options.duration > warmup)) {
    throw InvalidArgument("simulated duration must exceed the warm-up period");
  }
  // Surfaces an infeasible configuration before any event runs.
  AdmissionState empty(cfg.classes, cfg.circuit_limit);
  AssembleCycle(empty, std::vector<double>(cfg.onus, 0.0), cfg, 0);
  return Simulation(cfg, seed, options).Execute();
}

SimMetrics Run(const ScenarioConfig& cfg, uint64_t seed, double duration, double warmup) {
  SimOptions options;
  options.duration = duration;
  options.warmup = warmup;
  return Run(cfg, seed, options);
}

}  // namespace cpon
