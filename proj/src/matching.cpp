#include "nsys/matching.hpp"

#include <stdexcept>

namespace nsys {

namespace {
// Uniform in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}
}  // namespace

MatchChain::MatchChain(double alpha, double beta, std::uint64_t seed)
    : alpha_(alpha), beta_(beta), rng_(seed) {
  if (!(alpha > 0 && alpha <= 1))
    throw std::invalid_argument("MatchChain: alpha must be in (0, 1]");
  if (!(beta >= 0 && beta <= 1))
    throw std::invalid_argument("MatchChain: beta must be in [0, 1]");
  if (!(alpha + beta > 1))
    throw std::domain_error("MatchChain: alpha + beta <= 1, K drifts to infinity");
}

void MatchChain::reveal_through(std::size_t i) {
  while (window_.size() <= i) window_.push_back(uniform01(rng_) < beta_);
}

int MatchChain::leading_s2_run() {
  std::size_t j = 0;
  for (;; ++j) {
    reveal_through(j);
    if (window_[j]) return static_cast<int>(j);
  }
}

int MatchChain::step() {
  if (uniform01(rng_) < alpha_) {  // c1 takes the front server
    reveal_through(0);
    window_.pop_front();
  } else {  // c2 removes the first s1
    const std::size_t j = static_cast<std::size_t>(leading_s2_run());
    window_.erase(window_.begin() + static_cast<std::ptrdiff_t>(j));
  }
  k_ = leading_s2_run();
  return k_;
}

MatchRunResult match_run(double alpha, double beta, long long steps, std::uint64_t seed) {
  if (steps < 1) throw std::invalid_argument("match_run: steps must be >= 1");
  MatchChain chain(alpha, beta, seed);
  std::vector<long long> counts;
  for (long long t = 0; t < steps; ++t) {
    const int k = chain.step();
    if (k >= static_cast<int>(counts.size())) counts.resize(k + 1, 0);
    ++counts[static_cast<std::size_t>(k)];
  }
  MatchRunResult r;
  r.steps = steps;
  r.k_pmf.resize(counts.size());
  for (std::size_t k = 0; k < counts.size(); ++k)
    r.k_pmf[k] = static_cast<double>(counts[k]) / static_cast<double>(steps);
  return r;
}

}  // namespace nsys
