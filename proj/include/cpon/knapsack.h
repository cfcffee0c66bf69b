#ifndef CPON_KNAPSACK_H_
#define CPON_KNAPSACK_H_

// Equilibrium analysis of the multi-class circuit traffic as a stochastic
// knapsack: circuits of class k occupy b_k of the circuit limit C_c for an
// exponential holding time and are blocked when they do not fit.

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace cpon {

// Circuit classes offered to the PON: bit rates and request probabilities.
class CircuitClassSet {
 public:
  // Throws InvalidArgument unless K >= 1, every rate > 0, every probability
  // >= 0 and the probabilities sum to 1 within 1e-9.
  CircuitClassSet(std::vector<double> rates_bps, std::vector<double> probabilities);

  int size() const { return static_cast<int>(rates_.size()); }
  const std::vector<double>& rates() const { return rates_; }
  const std::vector<double>& probabilities() const { return probs_; }
  double rate(int k) const { return rates_[k]; }
  double probability(int k) const { return probs_[k]; }
  // Mean offered circuit bit rate, sum_k p_k b_k.
  double mean_rate() const { return mean_rate_; }

  bool operator==(const CircuitClassSet&) const = default;

 private:
  std::vector<double> rates_;
  std::vector<double> probs_;
  double mean_rate_ = 0.0;
};

// The knapsack expressed in integer bandwidth quanta.
struct NormalizedKnapsack {
  double unit_bps = 0.0;         // bandwidth quantum
  std::vector<int> sizes;        // b_k / unit, each in [1, capacity]
  int capacity = 0;              // floor(C_c / unit)
  std::vector<double> loads;     // rho_k = p_k lambda_c / mu
};

// Equilibrium probabilities q(beta) of the aggregate occupied bandwidth
// beta * unit, beta = 0..capacity.
struct OccupancyDistribution {
  double unit_bps = 0.0;
  int capacity = 0;
  std::vector<double> q;

  // Point mass at `bandwidth_bps`, used for the saturated (chi -> inf)
  // limit where beta sits at the circuit limit exactly.
  static OccupancyDistribution PointMass(double bandwidth_bps);
};

struct BlockingResult {
  std::vector<double> per_class;  // B_k
  double average = 0.0;           // sum_k p_k B_k
};

// Expresses rates at 1 Mb/s resolution, takes their greatest common quantum
// and floors C_c onto it. Throws InvalidArgument for rates that are not a
// whole number of Mb/s, for C_c <= 0, lambda_c < 0, mu <= 0, or for a class
// larger than the normalized capacity.
NormalizedKnapsack Normalize(const CircuitClassSet& classes, double circuit_limit_bps,
                             double request_rate, double departure_rate);

// Kaufman-Roberts recursion. O(capacity * K) time, O(capacity + K) memory.
OccupancyDistribution KaufmanRoberts(const NormalizedKnapsack& knapsack);

// B_k = sum of q(beta) over beta in (capacity - size_k, capacity].
BlockingResult Blocking(const OccupancyDistribution& occupancy, const NormalizedKnapsack& knapsack,
                        const CircuitClassSet& classes);

// E_beta[f(beta)] with f evaluated on the bandwidth beta * unit in bit/s.
double Expect(const OccupancyDistribution& occupancy, const std::function<double(double)>& f);

// Mean number of circuits in service, sum_k rho_k (1 - B_k) (Little's law).
double ExpectedActiveCircuits(const NormalizedKnapsack& knapsack, const BlockingResult& blocking);

}  // namespace cpon

#endif  // CPON_KNAPSACK_H_
