#include "cpon/traffic.h"

#include <algorithm>
#include <cmath>

#include "cpon/error.h"

namespace cpon {

uint64_t MixSeed(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

uint64_t ReplicationSeed(uint64_t master, uint64_t point, uint64_t index) {
  return MixSeed(MixSeed(MixSeed(master) ^ point) ^ index);
}

RngStream::RngStream(uint64_t seed, Stream stream)
    : engine_(MixSeed(seed ^ MixSeed(static_cast<uint64_t>(stream)))) {}

double RngStream::Exponential(double rate) { return -std::log1p(-Uniform()) / rate; }

int RngStream::Pick(const std::vector<double>& cumulative) {
  const double u = Uniform();
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it == cumulative.end()) --it;
  return static_cast<int>(it - cumulative.begin());
}

int RngStream::UniformIndex(int n) {
  return std::min(n - 1, static_cast<int>(Uniform() * n));
}

std::vector<double> Cumulative(const std::vector<double>& probabilities) {
  std::vector<double> cdf;
  double acc = 0.0;
  for (double p : probabilities) cdf.push_back(acc += p);
  return cdf;
}

CircuitRequestGenerator::CircuitRequestGenerator(const ScenarioConfig& cfg, uint64_t seed)
    : rate_(cfg.circuit_request_rate),
      departure_rate_(cfg.departure_rate),
      onus_(cfg.onus),
      class_cdf_(Cumulative(cfg.classes.probabilities())),
      arrivals_(seed, Stream::kCircuitArrivals),
      classes_(seed, Stream::kCircuitClass),
      holding_(seed, Stream::kHoldingTime),
      onus_rng_(seed, Stream::kCircuitOnu) {
  if (!(rate_ > 0.0)) throw InvalidArgument("circuit request generator needs lambda_c > 0");
}

CircuitRequestDraw CircuitRequestGenerator::Next() {
  CircuitRequestDraw d;
  d.interarrival = arrivals_.Exponential(rate_);
  d.cls = classes_.Pick(class_cdf_);
  d.holding = holding_.Exponential(departure_rate_);
  d.onu = onus_rng_.UniformIndex(onus_);
  return d;
}

PacketGenerator::PacketGenerator(const ScenarioConfig& cfg, uint64_t seed)
    : rate_(cfg.packet_rate),
      onus_(cfg.onus),
      arrivals_(seed, Stream::kPacketArrivals),
      size_rng_(seed, Stream::kPacketSize),
      onus_rng_(seed, Stream::kPacketOnu) {
  if (!(rate_ > 0.0)) throw InvalidArgument("packet generator needs lambda_p > 0");
  std::vector<double> probs;
  for (const auto& e : cfg.packet_sizes.entries()) {
    sizes_.push_back(e.size_bits);
    probs.push_back(e.probability);
  }
  size_cdf_ = Cumulative(probs);
}

PacketDraw PacketGenerator::Next() {
  PacketDraw d;
  d.interarrival = arrivals_.Exponential(rate_);
  d.size_bits = sizes_[size_rng_.Pick(size_cdf_)];
  d.onu = onus_rng_.UniformIndex(onus_);
  return d;
}

}  // namespace cpon
