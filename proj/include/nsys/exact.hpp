#pragma once

#include <cstdint>
#include <iosfwd>
#include <limits>
#include <vector>

#include "nsys/model.hpp"

namespace nsys {

// Index into the aggregated stationary law of (K, I1, I2): k is the count of
// s2 servers trailing the last s1 server in the ALIS permutation, i1/i2 the
// idle counts per pool. The support is the union of three regions:
//   { i1 >= 1, k <= i2 <= n2, 0 <= k <= n2 }
//   { i1 = 0,  1 <= i2 <= k <= n2 }
//   { i1 = i2 = 0, 0 <= k <= n2 }
struct CellIndex {
  int k;
  int i1;
  int i2;
};

bool on_support(const SystemParams& p, CellIndex c);

// Log of the unnormalized stationary weight of one cell (the bracketed
// product-form expression excluding the normalizing constant); -infinity off
// support. All factorials and binomials go through log-gamma.
double log_weight_cell(const SystemParams& p, CellIndex c);

// Fully evaluated aggregated law: every on-support log weight plus the log
// normalizer. Immutable after construction; safe to share across threads.
class StationaryTable {
 public:
  const SystemParams& params() const { return params_; }
  int n1() const { return params_.n1; }
  int n2() const { return params_.n2; }
  double logZ() const { return logZ_; }

  // -infinity off support.
  double log_w(CellIndex c) const;
  double log_prob(CellIndex c) const { return log_w(c) - logZ_; }

  // Visits every on-support cell once, outer loop over k.
  template <typename F>
  void for_each(F&& f) const {
    const int N1 = params_.n1, N2 = params_.n2;
    std::size_t b1 = 0, b2 = 0, b3 = 0;
    for (int k = 0; k <= N2; ++k) {
      for (int i1 = 1; i1 <= N1; ++i1)
        for (int i2 = k; i2 <= N2; ++i2) f(CellIndex{k, i1, i2}, branch1_[b1++]);
      for (int i2 = 1; i2 <= k; ++i2) f(CellIndex{k, 0, i2}, branch2_[b2++]);
      f(CellIndex{k, 0, 0}, branch3_[b3++]);
    }
  }

  std::size_t cell_count() const { return branch1_.size() + branch2_.size() + branch3_.size(); }

 private:
  friend StationaryTable build_table(const SystemParams&);
  SystemParams params_{};
  double logZ_ = -std::numeric_limits<double>::infinity();
  // Flat per-branch storage in the for_each iteration order.
  std::vector<double> branch1_;  // (k, i1 >= 1, i2 >= k)
  std::vector<double> branch2_;  // (k, i1 = 0, 1 <= i2 <= k)
  std::vector<double> branch3_;  // (k, 0, 0)
};

// Populates all support cells and the log normalizer. Throws
// std::domain_error for unstable parameters.
StationaryTable build_table(const SystemParams& p);

// Exact moments of the aggregated law.
struct Moments {
  double mean_i1, mean_i2;
  double var_i1, var_i2;
  double cov;
  double p_i1_zero;
  std::vector<double> k_pmf;   // k = 0..n2
  std::vector<double> i1_pmf;  // i1 = 0..n1
  std::vector<double> i2_pmf;  // i2 = 0..n2
};

Moments moments(const StationaryTable& table);

// Closed forms for the two i1 = 0 region masses, relative to the normalizing
// constant and in log space: P(I1=0, I2=0) and P(I1=0, I2>0). The Poisson
// tail ratio P(X < n2)/P(X = n2) is accumulated through the stable factorial
// recurrence in j, stopping once terms are below 1e-18 of the running sum.
struct ZeroFlexibleIdle {
  double log_rel_00;
  double log_rel_0pos;
};

ZeroFlexibleIdle p_i1_zero_closed_form(const SystemParams& p);

// One detailed ALIS state. perm lists all n servers: first the idle_cut busy
// ones in the arrival order of the customers they serve, then the idle ones
// newest-idle first, so the longest-idle server is the final entry. queues
// holds the waiting count attached to each busy position.
enum class ServerClass : std::uint8_t { s1, s2 };

struct DetailedState {
  std::vector<ServerClass> perm;
  int idle_cut;
  std::vector<int> queues;
};

// Log of the per-state product-form weight (excluding the normalizer).
// Throws std::invalid_argument when the state is malformed: wrong counts per
// class, queue list size != idle_cut, a positive queue at a position from
// which a later server could have served the waiting customer, waiting
// customers while an s1 server idles, or a c1-capable queue while any server
// idles.
double log_pi_state(const SystemParams& p, const DetailedState& s);

// Sum over all permutations of a of prod_l (sum_{j<=l} a_perm[j])^-1, by
// explicit enumeration. Equals 1/prod(a) (the inclusion identity used by the
// product form); kept as a test utility. Lengths above 8 are rejected.
double perm_sum_bruteforce(const std::vector<double>& a);

// CSV export of the normalized law: header "k,i1,i2,prob", one row per
// on-support cell.
void write_table_csv(const StationaryTable& table, std::ostream& os);

}  // namespace nsys
