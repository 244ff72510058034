#pragma once

#include <cstdint>
#include <deque>
#include <random>
#include <vector>

namespace nsys {

// Infinite bipartite FCFS matching of an i.i.d. server line (s1 w.p. beta)
// against an i.i.d. customer stream (c1 w.p. alpha). A c1 matches the front
// server; a c2 matches the first s1, leaving earlier s2 entries in place.
// K is the leading-s2 run of the unmatched line. Servers are revealed
// lazily, so the window only ever holds the inspected prefix.
class MatchChain {
 public:
  // Requires alpha in (0, 1], beta in [0, 1] (std::invalid_argument) and
  // alpha + beta > 1 (std::domain_error: otherwise K is transient).
  MatchChain(double alpha, double beta, std::uint64_t seed);

  // Consumes one customer and returns the K value after the match.
  int step();

  int k_current() const { return k_; }

 private:
  void reveal_through(std::size_t i);
  int leading_s2_run();

  double alpha_, beta_;
  std::mt19937_64 rng_;
  std::deque<bool> window_;  // true = s1
  int k_ = 0;
};

struct MatchRunResult {
  std::vector<double> k_pmf;  // empirical law over recorded K values
  long long steps;
};

// Runs the chain for `steps` matches (steps >= 1) and tallies K after each.
MatchRunResult match_run(double alpha, double beta, long long steps, std::uint64_t seed);

}  // namespace nsys
