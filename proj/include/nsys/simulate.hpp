#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "nsys/model.hpp"

namespace nsys {

struct SimConfig {
  double horizon = 1e5;          // simulated time per replication
  double warmup_fraction = 0.2;  // leading fraction discarded, in [0, 0.5]
  std::uint64_t seed = 1;
  int replications = 1;
  int batch_count = 20;          // batch-means batches, >= 10
  bool allow_unstable = false;   // permit rho >= 1 or delta >= 1 runs
  bool check_invariants = false; // verify ALIS state properties every event
  std::string trace_path;        // per-event CSV (replication 0), "" = off
};

struct ErrorBand {
  double se = 0.0;
  double ci_halfwidth = 0.0;  // 1.96 * se
};

struct SimStats {
  double mean_i1 = 0, mean_i2 = 0;  // time-averaged idle counts
  double var_i1 = 0, var_i2 = 0;    // time-averaged central second moments
  std::vector<double> k_pmf_hat;    // time-averaged law of K, k = 0..n2
  // Fraction of completed services by (customer type, server pool);
  // r_hat[1][1] is structurally zero (s2 cannot serve c2).
  std::array<std::array<double, 2>, 2> r_hat{};
  double beta_hat = 0;     // fraction of services done by the s1 pool
  double throughput = 0;   // completions per unit time
  ErrorBand mean_i1_err, mean_i2_err, beta_hat_err, throughput_err;
  long long events = 0;          // all events across replications
  double time_simulated = 0;     // post-warmup measured time, summed
};

// Discrete-event FCFS-ALIS run: competing exponential clocks, one waiting
// FIFO in arrival order, idle list with the longest-idle server at the
// front. K is the trailing s2 run of the permutation (busy servers by
// served customer's arrival, then idle servers newest first), measured
// time-weighted after warmup. Replications use seeds split from
// config.seed; identical inputs give bit-identical stats.
// Throws std::invalid_argument for a non-positive horizon or out-of-range
// config fields, std::domain_error for unstable params without
// allow_unstable, std::logic_error if check_invariants catches a violation.
SimStats simulate(const SystemParams& p, const SimConfig& config);

}  // namespace nsys
