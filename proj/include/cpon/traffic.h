#ifndef CPON_TRAFFIC_H_
#define CPON_TRAFFIC_H_

// Poisson circuit requests with exponential holding times and Poisson packet
// arrivals with an empirical size mix, each drawn from its own deterministic
// random stream.

#include <cstdint>
#include <random>
#include <vector>

#include "cpon/scenario.h"

namespace cpon {

// Independent sources inside one run.
enum class Stream : uint64_t {
  kCircuitArrivals = 1,
  kCircuitClass,
  kHoldingTime,
  kCircuitOnu,
  kPacketArrivals,
  kPacketSize,
  kPacketOnu,
};

// SplitMix64 finalizer, used to derive seeds.
uint64_t MixSeed(uint64_t x);

// Seed of replication `index` of grid point `point` under `master`.
uint64_t ReplicationSeed(uint64_t master, uint64_t point, uint64_t index);

// A reproducible uniform/exponential stream. Draws are computed from the raw
// 64-bit engine output so the sequence does not depend on the standard
// library's distribution implementations.
class RngStream {
 public:
  RngStream(uint64_t seed, Stream stream);

  // Uniform on [0, 1).
  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double Exponential(double rate);
  // Index drawn from a cumulative probability table.
  int Pick(const std::vector<double>& cumulative);
  int UniformIndex(int n);

 private:
  std::mt19937_64 engine_;
};

std::vector<double> Cumulative(const std::vector<double>& probabilities);

struct CircuitRequestDraw {
  double interarrival = 0.0;
  int cls = 0;
  double holding = 0.0;
  int onu = 0;
};

class CircuitRequestGenerator {
 public:
  CircuitRequestGenerator(const ScenarioConfig& cfg, uint64_t seed);
  CircuitRequestDraw Next();

 private:
  double rate_;
  double departure_rate_;
  int onus_;
  std::vector<double> class_cdf_;
  RngStream arrivals_;
  RngStream classes_;
  RngStream holding_;
  RngStream onus_rng_;
};

struct PacketDraw {
  double interarrival = 0.0;
  double size_bits = 0.0;
  int onu = 0;
};

class PacketGenerator {
 public:
  PacketGenerator(const ScenarioConfig& cfg, uint64_t seed);
  PacketDraw Next();

 private:
  double rate_;
  int onus_;
  std::vector<double> sizes_;
  std::vector<double> size_cdf_;
  RngStream arrivals_;
  RngStream size_rng_;
  RngStream onus_rng_;
};

}  // namespace cpon

#endif  // CPON_TRAFFIC_H_
