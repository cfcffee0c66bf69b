#include "cpon/knapsack.h"

#include <cmath>
#include <numeric>
#include <string>

#include "cpon/error.h"

namespace cpon {

namespace {

constexpr double kMbps = 1e6;

// Rate in whole Mb/s; throws if the rate is not representable at that
// resolution.
int64_t ToWholeMbps(double rate_bps) {
  const double mbps = rate_bps / kMbps;
  const double rounded = std::round(mbps);
  if (std::abs(mbps - rounded) > 1e-6 * std::max(1.0, rounded)) {
    throw InvalidArgument("circuit rate " + std::to_string(rate_bps) +
                          " bit/s is not a whole number of Mb/s");
  }
  return static_cast<int64_t>(rounded);
}

}  // namespace

CircuitClassSet::CircuitClassSet(std::vector<double> rates_bps, std::vector<double> probabilities)
    : rates_(std::move(rates_bps)), probs_(std::move(probabilities)) {
  if (rates_.empty()) throw InvalidArgument("at least one circuit class is required");
  if (rates_.size() != probs_.size()) {
    throw InvalidArgument("circuit rates and request probabilities differ in length");
  }
  double total = 0.0;
  for (size_t k = 0; k < rates_.size(); ++k) {
    if (!(rates_[k] > 0.0)) throw InvalidArgument("circuit rates must be positive");
    if (!(probs_[k] >= 0.0)) throw InvalidArgument("request probabilities must be non-negative");
    total += probs_[k];
    mean_rate_ += probs_[k] * rates_[k];
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw InvalidArgument("request probabilities sum to " + std::to_string(total) + ", not 1");
  }
}

OccupancyDistribution OccupancyDistribution::PointMass(double bandwidth_bps) {
  if (bandwidth_bps <= 0.0) return {1.0, 0, {1.0}};
  return {bandwidth_bps, 1, {0.0, 1.0}};
}

NormalizedKnapsack Normalize(const CircuitClassSet& classes, double circuit_limit_bps,
                             double request_rate, double departure_rate) {
  if (!(circuit_limit_bps > 0.0)) throw InvalidArgument("circuit limit C_c must be positive");
  if (!(request_rate >= 0.0)) throw InvalidArgument("circuit request rate must be non-negative");
  if (!(departure_rate > 0.0)) throw InvalidArgument("departure rate mu must be positive");

  std::vector<int64_t> mbps;
  int64_t quantum = 0;
  for (double b : classes.rates()) {
    mbps.push_back(ToWholeMbps(b));
    quantum = std::gcd(quantum, mbps.back());
  }
  // Floor C_c to whole Mb/s, tolerating representation noise just below an
  // integer.
  const auto limit_mbps = static_cast<int64_t>(std::floor(circuit_limit_bps / kMbps + 1e-9));

  NormalizedKnapsack out;
  out.unit_bps = static_cast<double>(quantum) * kMbps;
  out.capacity = static_cast<int>(limit_mbps / quantum);
  for (int k = 0; k < classes.size(); ++k) {
    const int size = static_cast<int>(mbps[k] / quantum);
    if (size > out.capacity) {
      throw InvalidArgument("circuit class " + std::to_string(k + 1) +
                            " exceeds the circuit limit and could never be admitted");
    }
    out.sizes.push_back(size);
    out.loads.push_back(classes.probability(k) * request_rate / departure_rate);
  }
  return out;
}

OccupancyDistribution KaufmanRoberts(const NormalizedKnapsack& knapsack) {
  const int cap = knapsack.capacity;
  std::vector<double> g(cap + 1, 0.0);
  g[0] = 1.0;
  for (int beta = 1; beta <= cap; ++beta) {
    double acc = 0.0;
    for (size_t k = 0; k < knapsack.sizes.size(); ++k) {
      const int prev = beta - knapsack.sizes[k];
      if (prev >= 0) acc += knapsack.sizes[k] * knapsack.loads[k] * g[prev];
    }
    g[beta] = acc / beta;
    // g grows like rho^beta / beta!; the recursion is linear, so rescaling
    // everything computed so far keeps it finite without changing q.
    if (g[beta] > 1e250) {
      for (int i = 0; i <= beta; ++i) g[i] *= 1e-250;
    }
  }
  const double total = std::accumulate(g.begin(), g.end(), 0.0);
  for (double& v : g) v /= total;
  return {knapsack.unit_bps, cap, std::move(g)};
}

BlockingResult Blocking(const OccupancyDistribution& occupancy, const NormalizedKnapsack& knapsack,
                        const CircuitClassSet& classes) {
  BlockingResult out;
  const int cap = occupancy.capacity;
  for (size_t k = 0; k < knapsack.sizes.size(); ++k) {
    double b = 0.0;
    for (int beta = std::max(0, cap - knapsack.sizes[k] + 1); beta <= cap; ++beta) {
      b += occupancy.q[beta];
    }
    out.per_class.push_back(b);
    out.average += classes.probability(static_cast<int>(k)) * b;
  }
  return out;
}

double Expect(const OccupancyDistribution& occupancy, const std::function<double(double)>& f) {
  double acc = 0.0;
  for (int beta = 0; beta <= occupancy.capacity; ++beta) {
    if (occupancy.q[beta] != 0.0) acc += f(beta * occupancy.unit_bps) * occupancy.q[beta];
  }
  return acc;
}

double ExpectedActiveCircuits(const NormalizedKnapsack& knapsack, const BlockingResult& blocking) {
  double n = 0.0;
  for (size_t k = 0; k < knapsack.loads.size(); ++k) {
    n += knapsack.loads[k] * (1.0 - blocking.per_class[k]);
  }
  return n;
}

}  // namespace cpon
