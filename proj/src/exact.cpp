#include "nsys/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <stdexcept>

namespace nsys {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log k! for k = 0..nmax.
std::vector<double> log_factorials(int nmax) {
  std::vector<double> lf(nmax + 1, 0.0);
  for (int k = 1; k <= nmax; ++k) lf[k] = lf[k - 1] + std::log(static_cast<double>(k));
  return lf;
}

// Compensated running sum.
struct KahanSum {
  double sum = 0.0, carry = 0.0;
  void add(double x) {
    const double y = x - carry;
    const double t = sum + y;
    carry = (t - sum) - y;
    sum = t;
  }
};

// Shared precomputation for the three weight branches.
struct WeightContext {
  SystemParams p;
  double lam, log_lam, log_lam1, log_mu1, log_mu2;
  std::vector<double> lf;      // log factorials up to n
  std::vector<double> dpre;    // dpre[a] = sum_{t<a} log(mu1*n1 + mu2*t - lambda2)
  double log_drain;            // log(mu1*n1 + mu2*n2 - lambda)

  explicit WeightContext(const SystemParams& params) : p(params) {
    const DerivedRatios d = derive(p);
    if (!(d.rho < 1.0 && d.delta < 1.0))
      throw std::domain_error("exact: parameters are unstable (need rho < 1 and delta < 1)");
    if (!(p.lambda1 > 0))
      throw std::domain_error("exact: lambda1 must be positive (the product form divides by it)");
    lam = d.lambda;
    log_lam = std::log(lam);
    log_lam1 = std::log(p.lambda1);
    log_mu1 = std::log(p.mu1);
    log_mu2 = std::log(p.mu2);
    lf = log_factorials(d.n);
    dpre.assign(p.n2 + 2, 0.0);
    for (int t = 0; t <= p.n2; ++t)
      dpre[t + 1] = dpre[t] + std::log(p.mu1 * p.n1 + p.mu2 * t - p.lambda2);
    log_drain = std::log(p.mu1 * p.n1 + p.mu2 * p.n2 - lam);
  }

  // i1 >= 1, k <= i2 <= n2.
  double branch1(int k, int i1, int i2) const {
    const int n1 = p.n1, n2 = p.n2;
    return lf[n1] - lf[i1] - lf[n1 - i1]                       // C(n1, i1)
         + lf[n2] - lf[i2] - lf[n2 - i2]                       // C(n2, i2)
         + std::log(static_cast<double>(i1)) + lf[i2]
         + lf[i1 + i2 - k - 1] - lf[i2 - k]
         + i1 * log_mu1 + i2 * log_mu2
         - (i1 + i2) * log_lam + k * (log_lam - log_lam1);
  }

  // i1 = 0, 1 <= i2 <= k.
  double branch2(int k, int i2) const {
    const int n1 = p.n1, n2 = p.n2;
    return std::log(static_cast<double>(n1)) + lf[n2] - lf[n2 - k]
         + log_mu1 + k * log_mu2
         - (dpre[n2 - i2 + 1] - dpre[n2 - k])
         - i2 * log_lam1;
  }

  // i1 = i2 = 0.
  double branch3(int k) const {
    const int n1 = p.n1, n2 = p.n2;
    return std::log(static_cast<double>(n1)) + lf[n2] - lf[n2 - k]
         + log_mu1 + k * log_mu2
         - (dpre[n2] - dpre[n2 - k])
         - log_drain;
  }
};

}  // namespace

bool on_support(const SystemParams& p, CellIndex c) {
  const int n1 = p.n1, n2 = p.n2;
  if (c.k < 0 || c.k > n2 || c.i1 < 0 || c.i1 > n1 || c.i2 < 0 || c.i2 > n2) return false;
  if (c.i1 >= 1) return c.k <= c.i2;
  if (c.i2 >= 1) return c.i2 <= c.k;
  return true;  // i1 = i2 = 0, any 0 <= k <= n2
}

double log_weight_cell(const SystemParams& p, CellIndex c) {
  validate(p);
  const WeightContext ctx(p);
  if (!on_support(p, c)) return kNegInf;
  if (c.i1 >= 1) return ctx.branch1(c.k, c.i1, c.i2);
  if (c.i2 >= 1) return ctx.branch2(c.k, c.i2);
  return ctx.branch3(c.k);
}

StationaryTable build_table(const SystemParams& p) {
  validate(p);
  const WeightContext ctx(p);
  const int n1 = p.n1, n2 = p.n2;
  StationaryTable t;
  t.params_ = p;
  t.branch1_.reserve(static_cast<std::size_t>(n1) * (n2 + 1) * (n2 + 2) / 2);
  t.branch2_.reserve(static_cast<std::size_t>(n2) * (n2 + 1) / 2);
  t.branch3_.reserve(n2 + 1);
  for (int k = 0; k <= n2; ++k) {
    for (int i1 = 1; i1 <= n1; ++i1)
      for (int i2 = k; i2 <= n2; ++i2) t.branch1_.push_back(ctx.branch1(k, i1, i2));
    for (int i2 = 1; i2 <= k; ++i2) t.branch2_.push_back(ctx.branch2(k, i2));
    t.branch3_.push_back(ctx.branch3(k));
  }
  // Log-sum-exp normalizer: running max pass, then a compensated sum.
  double best = kNegInf;
  for (const auto* v : {&t.branch1_, &t.branch2_, &t.branch3_})
    for (double lw : *v) best = std::max(best, lw);
  KahanSum acc;
  for (const auto* v : {&t.branch1_, &t.branch2_, &t.branch3_})
    for (double lw : *v) acc.add(std::exp(lw - best));
  t.logZ_ = best + std::log(acc.sum);
  return t;
}

double StationaryTable::log_w(CellIndex c) const {
  if (!on_support(params_, c)) return kNegInf;
  const int n1 = params_.n1, n2 = params_.n2;
  const auto kbase1 = [&](int k) {
    // cells in branch1 with smaller k: sum_{j<k} n1*(n2-j+1)
    return static_cast<std::size_t>(n1) * (static_cast<std::size_t>(k) * (n2 + 1) - static_cast<std::size_t>(k) * (k - 1) / 2);
  };
  if (c.i1 >= 1)
    return branch1_[kbase1(c.k) + static_cast<std::size_t>(c.i1 - 1) * (n2 - c.k + 1) + (c.i2 - c.k)];
  if (c.i2 >= 1)
    return branch2_[static_cast<std::size_t>(c.k) * (c.k - 1) / 2 + (c.i2 - 1)];
  return branch3_[c.k];
}

Moments moments(const StationaryTable& table) {
  const int n1 = table.n1(), n2 = table.n2();
  const double logZ = table.logZ();
  Moments m;
  m.k_pmf.assign(n2 + 1, 0.0);
  m.i1_pmf.assign(n1 + 1, 0.0);
  m.i2_pmf.assign(n2 + 1, 0.0);
  KahanSum e1, e2, pz;
  table.for_each([&](CellIndex c, double lw) {
    const double p = std::exp(lw - logZ);
    e1.add(p * c.i1);
    e2.add(p * c.i2);
    m.k_pmf[c.k] += p;
    m.i1_pmf[c.i1] += p;
    m.i2_pmf[c.i2] += p;
    if (c.i1 == 0) pz.add(p);
  });
  m.mean_i1 = e1.sum;
  m.mean_i2 = e2.sum;
  m.p_i1_zero = pz.sum;
  KahanSum v1, v2, cv;
  table.for_each([&](CellIndex c, double lw) {
    const double p = std::exp(lw - logZ);
    const double d1 = c.i1 - m.mean_i1, d2 = c.i2 - m.mean_i2;
    v1.add(p * d1 * d1);
    v2.add(p * d2 * d2);
    cv.add(p * d1 * d2);
  });
  m.var_i1 = v1.sum;
  m.var_i2 = v2.sum;
  m.cov = cv.sum;
  return m;
}

ZeroFlexibleIdle p_i1_zero_closed_form(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  if (!(d.rho < 1.0 && d.delta < 1.0))
    throw std::domain_error("p_i1_zero_closed_form: parameters are unstable");
  if (!(p.lambda1 > 0))
    throw std::domain_error("p_i1_zero_closed_form: lambda1 must be positive");
  ZeroFlexibleIdle z;
  z.log_rel_00 = -std::log1p(-d.delta) + std::log1p(-(1 - d.alpha) * d.rho) - std::log1p(-d.rho);
  // R = P(X < n2)/P(X = n2) = sum_{j=1}^{n2} n2!/(kappa^j n2^j (n2-j)!),
  // X ~ Poisson(lambda1/mu2). Terms by the descending-index recurrence
  // term(j) = term(j-1) * (n2 - j + 1)/(kappa n2), in log space.
  const int n2 = p.n2;
  const double log_kn2 = std::log(d.kappa * static_cast<double>(n2));
  std::vector<double> terms;
  terms.reserve(n2);
  double log_term = 0.0, best = kNegInf, prev = kNegInf;
  for (int j = 1; j <= n2; ++j) {
    log_term += std::log(static_cast<double>(n2 - j + 1)) - log_kn2;
    terms.push_back(log_term);
    best = std::max(best, log_term);
    // Stop once the terms are decaying and below 1e-18 of the largest one.
    if (log_term < prev && log_term < best + std::log(1e-18)) break;
    prev = log_term;
  }
  KahanSum acc;
  for (double lt : terms) acc.add(std::exp(lt - best));
  z.log_rel_0pos = -std::log1p(-d.delta) + best + std::log(acc.sum);
  return z;
}

double log_pi_state(const SystemParams& p, const DetailedState& s) {
  validate(p);
  const int n = p.n1 + p.n2;
  if (static_cast<int>(s.perm.size()) != n)
    throw std::invalid_argument("log_pi_state: perm must list all n servers");
  if (s.idle_cut < 0 || s.idle_cut > n)
    throw std::invalid_argument("log_pi_state: idle_cut out of range");
  if (static_cast<int>(s.queues.size()) != s.idle_cut)
    throw std::invalid_argument("log_pi_state: one queue per busy position required");
  const int count_s1 = static_cast<int>(std::count(s.perm.begin(), s.perm.end(), ServerClass::s1));
  if (count_s1 != p.n1)
    throw std::invalid_argument("log_pi_state: perm must contain n1 s1 servers and n2 s2 servers");
  for (int q : s.queues)
    if (q < 0) throw std::invalid_argument("log_pi_state: negative queue length");
  // A positive queue at busy position j (1-based) means those customers were
  // passed over by every later server, so positions j+1..n must all be s2
  // (trivially true for j = n). Covers properties (i) and (ii).
  std::vector<bool> s2_suffix(n + 2, true);
  for (int j = n - 1; j >= 0; --j)
    s2_suffix[j + 1] = s2_suffix[j + 2] && (s.perm[j] == ServerClass::s2);
  for (int j = 1; j <= s.idle_cut; ++j)
    if (s.queues[j - 1] > 0 && j < n && !s2_suffix[j + 1])
      throw std::invalid_argument("log_pi_state: waiting customers at a position a later s1 server would have served");

  int k = 0;
  while (k < n && s.perm[n - 1 - k] == ServerClass::s2) ++k;
  int i1 = 0, i2 = 0;
  for (int j = s.idle_cut; j < n; ++j) (s.perm[j] == ServerClass::s1 ? i1 : i2)++;

  const DerivedRatios d = derive(p);
  if (!(d.rho < 1.0 && d.delta < 1.0))
    throw std::domain_error("log_pi_state: parameters are unstable");
  if (!(p.lambda1 > 0))
    throw std::domain_error("log_pi_state: lambda1 must be positive");
  const double lam = d.lambda;
  auto add_q = [](double& lw, int q, double log_rate_num, double log_rate_den) {
    if (q > 0) lw += q * log_rate_num;
    lw -= (q + 1) * log_rate_den;
  };
  double lw = 0.0;
  if (i1 >= 1) {
    double musum = 0.0;
    for (int l = 0; l < s.idle_cut; ++l) {
      musum += (s.perm[l] == ServerClass::s1) ? p.mu1 : p.mu2;
      lw -= std::log(musum);
    }
    lw += -(i1 + i2 - k) * std::log(lam) - k * std::log(p.lambda1);
    return lw;
  }
  // i1 = 0: plain prefix factors up to position n-k-1, then the queue-bearing
  // positions n-k.. where the prefix holds all s1 servers plus j-n1 s2's.
  double musum = 0.0;
  for (int l = 0; l < n - k - 1; ++l) {
    musum += (s.perm[l] == ServerClass::s1) ? p.mu1 : p.mu2;
    lw -= std::log(musum);
  }
  const double log_lam2 = p.lambda2 > 0 ? std::log(p.lambda2) : kNegInf;
  if (i2 >= 1) {
    for (int j = n - k; j <= n - i2; ++j)
      add_q(lw, s.queues[j - 1], log_lam2, std::log(p.mu1 * p.n1 + p.mu2 * (j - p.n1)));
    lw += -i2 * std::log(p.lambda1);
    return lw;
  }
  for (int j = n - k; j <= n - 1; ++j)
    add_q(lw, s.queues[j - 1], log_lam2, std::log(p.mu1 * p.n1 + p.mu2 * (j - p.n1)));
  add_q(lw, s.queues[n - 1], std::log(lam), std::log(p.mu1 * p.n1 + p.mu2 * p.n2));
  return lw;
}

double perm_sum_bruteforce(const std::vector<double>& a) {
  const int m = static_cast<int>(a.size());
  if (m < 1 || m > 8) throw std::invalid_argument("perm_sum_bruteforce: length must be in 1..8");
  for (double x : a)
    if (!(x > 0)) throw std::invalid_argument("perm_sum_bruteforce: entries must be positive");
  std::vector<int> idx(m);
  std::iota(idx.begin(), idx.end(), 0);
  double total = 0.0;
  do {
    double prefix = 0.0, prod = 1.0;
    for (int j : idx) {
      prefix += a[j];
      prod /= prefix;
    }
    total += prod;
  } while (std::next_permutation(idx.begin(), idx.end()));
  return total;
}

void write_table_csv(const StationaryTable& table, std::ostream& os) {
  os << "k,i1,i2,prob\n";
  const double logZ = table.logZ();
  char buf[64];
  table.for_each([&](CellIndex c, double lw) {
    std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g\n", c.k, c.i1, c.i2, std::exp(lw - logZ));
    os << buf;
  });
}

}  // namespace nsys
