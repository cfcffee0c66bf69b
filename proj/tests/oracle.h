#ifndef CPON_TESTS_ORACLE_H_
#define CPON_TESTS_ORACLE_H_

// Reference computations that share no code with the library.

#include <Eigen/Dense>
#include <cmath>
#include <vector>

namespace oracle {

// Erlang-B blocking from the closed form rho^m/m! / sum_i rho^i/i!, summed
// in long double with terms built directly from powers and factorials.
inline double ErlangB(int servers, double load) {
  long double num = 0.0L;
  long double den = 0.0L;
  for (int i = 0; i <= servers; ++i) {
    const long double term = std::pow(static_cast<long double>(load), i) / std::tgamma(i + 1.0L);
    den += term;
    if (i == servers) num = term;
  }
  return static_cast<double>(num / den);
}

// Stationary distribution of the multi-class loss system, aggregated by
// occupied capacity, from the global balance equations of the full CTMC
// over states n with sum_k n_k s_k <= capacity. Arrivals of class k occur
// at rate rho_k (unit service rate), each circuit departs at rate 1.
inline std::vector<double> CtmcOccupancy(const std::vector<int>& sizes, int capacity,
                                         const std::vector<double>& loads) {
  const int k = static_cast<int>(sizes.size());
  std::vector<std::vector<int>> states;
  std::vector<int> n(k, 0);
  auto occupancy = [&](const std::vector<int>& s) {
    int total = 0;
    for (int i = 0; i < k; ++i) total += s[i] * sizes[i];
    return total;
  };
  // Enumerate the state space as a mixed-radix counter.
  while (true) {
    if (occupancy(n) <= capacity) states.push_back(n);
    int i = 0;
    while (i < k) {
      if (++n[i] * sizes[i] <= capacity) break;
      n[i] = 0;
      ++i;
    }
    if (i == k) break;
  }
  const int m = static_cast<int>(states.size());
  auto index_of = [&](const std::vector<int>& s) {
    for (int i = 0; i < m; ++i) {
      if (states[i] == s) return i;
    }
    return -1;
  };
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(m, m);
  for (int i = 0; i < m; ++i) {
    for (int c = 0; c < k; ++c) {
      std::vector<int> up = states[i];
      ++up[c];
      if (occupancy(up) <= capacity && loads[c] > 0) {
        q(i, index_of(up)) += loads[c];
      }
      if (states[i][c] > 0) {
        std::vector<int> down = states[i];
        --down[c];
        q(i, index_of(down)) += states[i][c];
      }
    }
    q(i, i) = -q.row(i).sum();
  }
  // Solve pi Q = 0 with sum(pi) = 1: transpose and replace one equation.
  Eigen::MatrixXd a = q.transpose();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m);
  a.row(m - 1).setOnes();
  rhs(m - 1) = 1.0;
  const Eigen::VectorXd pi = a.fullPivLu().solve(rhs);
  std::vector<double> out(capacity + 1, 0.0);
  for (int i = 0; i < m; ++i) out[occupancy(states[i])] += pi(i);
  return out;
}

}  // namespace oracle

#endif  // CPON_TESTS_ORACLE_H_
