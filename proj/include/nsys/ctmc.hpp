#pragma once

#include <cstddef>
#include <vector>

#include "nsys/model.hpp"

namespace nsys {

// Small-system oracle: enumerates the full continuous-time Markov chain over
// collapsed FCFS-ALIS states and solves pi Q = 0 directly, with no use of
// the product form. The state keeps the busy servers in line order with
// their attached waiting counts plus the idle order, which is enough because
// uninspected waiting customers stay i.i.d. c1 with probability alpha.
struct CtmcResult {
  double mean_i1, mean_i2;
  double var_i1, var_i2;
  double p_i1_zero;
  std::vector<double> k_pmf;  // trailing-s2 count, k = 0..n2
  double truncation_mass;     // stationary mass of the saturated states
  std::size_t state_count;
};

// qmax caps the total number of waiting customers; arrivals that would
// exceed it are dropped, which biases results on the order of the reported
// truncation_mass. The state space grows combinatorially, so n1 + n2 <= 4
// and 1 <= qmax <= 50 are enforced (std::invalid_argument otherwise).
CtmcResult ctmc_solve(const SystemParams& p, int qmax);

}  // namespace nsys
