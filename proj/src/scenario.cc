#include "cpon/scenario.h"

#include <cmath>
#include <string>

#include "cpon/error.h"

namespace cpon {

PacketSizeDistribution::PacketSizeDistribution(std::vector<Entry> entries)
    : entries_(std::move(entries)) {
  if (entries_.empty()) throw InvalidArgument("packet size distribution is empty");
  double total = 0.0;
  double second = 0.0;
  for (const Entry& e : entries_) {
    if (!(e.size_bits > 0.0)) throw InvalidArgument("packet sizes must be positive");
    if (!(e.probability >= 0.0)) throw InvalidArgument("packet size probabilities must be non-negative");
    total += e.probability;
    mean_ += e.probability * e.size_bits;
    second += e.probability * e.size_bits * e.size_bits;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("packet size probabilities sum to " + std::to_string(total) + ", not 1");
  }
  variance_ = std::max(0.0, second - mean_ * mean_);
}

CircuitClassSet DefaultCircuitClasses() {
  const std::vector<double> published = {0.5356, 0.2888, 0.1556};
  double total = 0.0;
  for (double p : published) total += p;
  std::vector<double> probs;
  for (double p : published) probs.push_back(p / total);
  return CircuitClassSet({52e6, 156e6, 624e6}, probs);
}

PacketSizeDistribution DefaultPacketSizes() {
  return PacketSizeDistribution(
      {{64 * 8, 0.60}, {300 * 8, 0.04}, {580 * 8, 0.11}, {1518 * 8, 0.25}});
}

double ScenarioConfig::circuit_load() const {
  return circuit_request_rate * classes.mean_rate() / (departure_rate * channel_rate);
}

double ScenarioConfig::packet_load() const {
  return packet_rate * packet_sizes.mean() / channel_rate;
}

void ScenarioConfig::SetLoads(double chi, double pi) {
  SetCircuitLoad(chi);
  SetPacketLoad(pi);
}

void ScenarioConfig::SetCircuitLoad(double chi) {
  circuit_request_rate = chi * departure_rate * channel_rate / classes.mean_rate();
}

void ScenarioConfig::SetPacketLoad(double pi) {
  packet_rate = pi * channel_rate / packet_sizes.mean();
}

void ScenarioConfig::SetMeanHoldingTime(double seconds) {
  if (!(seconds > 0.0)) throw InvalidArgument("mean holding time must be positive");
  const double chi = circuit_load();
  departure_rate = 1.0 / seconds;
  SetCircuitLoad(chi);
}

void ScenarioConfig::Validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw InvalidArgument(what);
  };
  require(channel_rate > 0.0, "channel rate C must be positive");
  require(circuit_limit > 0.0 && circuit_limit <= channel_rate, "require 0 < C_c <= C");
  require(onus >= 1, "require J >= 1");
  require(cycle > 0.0, "cycle duration Gamma must be positive");
  require(propagation_delay >= 0.0, "propagation delay tau must be non-negative");
  require(guard_time >= 0.0, "guard time t_g must be non-negative");
  require(report_bits >= 0.0, "report size must be non-negative");
  require(circuit_request_rate >= 0.0, "circuit request rate must be non-negative");
  require(departure_rate > 0.0, "departure rate mu must be positive");
  require(packet_rate >= 0.0, "packet rate must be non-negative");
  require(excess_bound_factor >= 1.0, "excess bound factor must be at least 1");
  for (double b : classes.rates()) {
    require(b <= circuit_limit, "a circuit class exceeds the circuit limit C_c");
  }
}

}  // namespace cpon
