#include "cpon/protocol.h"

#include <algorithm>
#include <numeric>
#include <string>

#include "cpon/analysis.h"
#include "cpon/error.h"

namespace cpon {

AdmissionState::AdmissionState(const CircuitClassSet& classes, double circuit_limit)
    : rates_(classes.rates()), limit_(circuit_limit), counts_(classes.size(), 0) {}

int AdmissionState::total_circuits() const {
  return std::accumulate(counts_.begin(), counts_.end(), 0);
}

AdmissionDecision AdmissionState::Admit(CircuitRecord record) {
  if (record.cls < 0 || record.cls >= static_cast<int>(rates_.size())) {
    throw InvalidArgument("unknown circuit class");
  }
  record.rate = rates_[record.cls];
  // Rates are whole bit/s values, so the sum is exact in double; the slack
  // only absorbs inputs given as non-integral bit/s.
  if (beta_ + record.rate > limit_ * (1.0 + 1e-12)) return AdmissionDecision::kBlocked;
  beta_ += record.rate;
  ++counts_[record.cls];
  per_onu_[record.onu].push_back(record);
  return AdmissionDecision::kAdmitted;
}

bool AdmissionState::Release(int onu, uint64_t id) {
  auto it = per_onu_.find(onu);
  if (it == per_onu_.end()) return false;
  auto& list = it->second;
  auto pos = std::find_if(list.begin(), list.end(),
                          [id](const CircuitRecord& c) { return c.id == id; });
  if (pos == list.end()) return false;
  beta_ -= pos->rate;
  --counts_[pos->cls];
  list.erase(pos);
  if (list.empty()) per_onu_.erase(it);
  if (total_circuits() == 0) beta_ = 0.0;
  return true;
}

AdmissionDecision AdmitCircuit(AdmissionState& state, const CircuitRecord& record) {
  return state.Admit(record);
}

CircuitPartition BuildCircuitPartition(const AdmissionState& state, const ScenarioConfig& cfg,
                                       int64_t cycle) {
  CircuitPartition out;
  const double per_bit_rate = cfg.cycle / cfg.channel_rate;
  double beta = 0.0;
  double offset = 0.0;
  for (const auto& [onu, circuits] : state.per_onu()) {
    const double grant_start = offset;
    for (const CircuitRecord& c : circuits) {
      if (c.start_cycle > cycle) continue;
      const double window = c.rate * per_bit_rate;
      out.windows.push_back({c.id, onu, c.cls, c.rate, offset, window});
      offset += window;
      beta += c.rate;
    }
    if (offset > grant_start) {
      out.grants.push_back({onu, grant_start, offset - grant_start});
      offset += cfg.guard_time;
    }
  }
  out.xi = beta * per_bit_rate;
  out.eta = static_cast<int>(out.grants.size());
  return out;
}

std::vector<double> SizePacketGrants(std::span<const double> requests, double gp,
                                     const ScenarioConfig& cfg) {
  const int onus = static_cast<int>(requests.size());
  const double t_r = cfg.report_time();
  if (onus == 0) return {};
  if (gp < onus * t_r) throw InfeasibleCycle("packet partition cannot carry the ONU reports");

  const double g_max = gp / onus;
  const double extra_cap = (cfg.excess_bound_factor - 1.0) * g_max;
  std::vector<double> grants(onus);
  double excess = 0.0;
  double unmet_total = 0.0;
  for (int j = 0; j < onus; ++j) {
    grants[j] = std::min(std::max(requests[j], t_r), g_max);
    excess += g_max - grants[j];
    if (requests[j] > g_max) unmet_total += requests[j] - g_max;
  }
  if (excess <= 0.0 || unmet_total <= 0.0) return grants;

  // One pass, proportional to unmet demand; whatever the caps refuse stays
  // unallocated.
  for (int j = 0; j < onus; ++j) {
    if (requests[j] <= g_max) continue;
    const double unmet = requests[j] - g_max;
    const double share = excess * unmet / unmet_total;
    grants[j] += std::min({share, unmet, extra_cap});
  }
  return grants;
}

CycleSchedule AssembleCycle(const AdmissionState& state, std::span<const double> requests,
                            const ScenarioConfig& cfg, int64_t cycle) {
  if (static_cast<int>(requests.size()) != cfg.onus) {
    throw InvalidArgument("one packet request per ONU is required");
  }
  CircuitPartition circuits = BuildCircuitPartition(state, cfg, cycle);
  CycleSchedule s;
  s.index = cycle;
  s.xi = circuits.xi;
  s.eta = circuits.eta;
  s.circuit_grants = std::move(circuits.grants);
  s.circuit_windows = std::move(circuits.windows);
  s.omega_o = OverheadPerCycle(s.eta, cfg);
  const double round_trip = 2.0 * cfg.propagation_delay;
  s.gp = cfg.cycle - std::max(round_trip, s.xi) - s.omega_o;
  if (s.gp < cfg.onus * cfg.report_time()) {
    throw InfeasibleCycle("cycle " + std::to_string(cycle) +
                          ": packet partition cannot carry the ONU reports");
  }
  s.g_max = s.gp / cfg.onus;
  s.packet_partition_start = std::max(round_trip, s.xi + s.eta * cfg.guard_time);

  const std::vector<double> sizes = SizePacketGrants(requests, s.gp, cfg);
  double offset = s.packet_partition_start;
  for (int j = 0; j < static_cast<int>(sizes.size()); ++j) {
    s.packet_grants.push_back({j, offset, sizes[j]});
    offset += sizes[j] + cfg.guard_time;
  }
  return s;
}

bool LowTrafficPollCheck(double now, double next_circuit_partition_arrival,
                         const ScenarioConfig& cfg) {
  const double needed =
      cfg.onus * (cfg.report_time() + cfg.guard_time) + 2.0 * cfg.propagation_delay;
  return next_circuit_partition_arrival - now > needed;
}

}  // namespace cpon
