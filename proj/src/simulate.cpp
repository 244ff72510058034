#include "nsys/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <map>
#include <random>
#include <stdexcept>

namespace nsys {

namespace {

// Seed-splitting mixer; one call per replication off the master seed.
std::uint64_t splitmix64(std::uint64_t& s) {
  s += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = s;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct WaitingCustomer {
  long long aidx;  // global arrival index
  bool is_c1;
};

// Per-replication batch-means output.
struct RepResult {
  double a1 = 0, a2 = 0, s1 = 0, s2 = 0;  // time-weighted sums of i1, i2 and squares
  std::vector<double> ktime;
  long long svc[2][2] = {};  // completions by (customer type, server pool)
  long long events = 0;
  double se_i1 = 0, se_i2 = 0, se_beta = 0, se_thr = 0;
};

class Runner {
 public:
  Runner(const SystemParams& p, const SimConfig& cfg, std::uint64_t seed, bool trace_on)
      : p_(p), cfg_(cfg), rng_(seed), n_(p.n1 + p.n2) {
    sid_key_.assign(n_, -1);
    sid_type_.assign(n_, 0);
    pool_pos_.assign(n_, -1);
    for (int sid = 0; sid < n_; ++sid) idle_.push_back(sid);
    idle1_ = p_.n1;
    if (trace_on) {
      trace_.open(cfg_.trace_path);
      if (!trace_) throw std::invalid_argument("simulate: cannot open trace_path");
      trace_.precision(12);
      trace_ << "clock,event,i1,i2,k\n";
    }
  }

  RepResult run() {
    const double horizon = cfg_.horizon;
    const double wstart = horizon * cfg_.warmup_fraction;
    const int B = cfg_.batch_count;
    bw_ = (horizon - wstart) / B;
    wstart_ = wstart;
    batch_i1_.assign(B, 0.0);
    batch_i2_.assign(B, 0.0);
    batch_svc_.assign(B, 0);
    batch_svc1_.assign(B, 0);
    res_.ktime.assign(p_.n2 + 1, 0.0);

    const double lam = p_.lambda1 + p_.lambda2;
    double clock = 0.0;
    while (true) {
      const double rate = lam + pool1_.size() * p_.mu1 + pool2_.size() * p_.mu2;
      const double next = clock - std::log1p(-uniform01(rng_)) / rate;
      if (next >= horizon) {
        weigh(clock, horizon);
        break;
      }
      weigh(clock, next);
      clock = next;
      ++res_.events;

      // Category: arrivals first, then completions by pool; within a busy
      // pool the server is picked uniformly from the same draw.
      double u = uniform01(rng_) * rate;
      const char* ev;
      if ((u -= p_.lambda1) < 0) {
        arrive(true);
        ev = "arr_c1";
      } else if ((u -= p_.lambda2) < 0 || (pool1_.empty() && pool2_.empty())) {
        // the both-empty arm only catches rounding slivers at the top
        arrive(false);
        ev = "arr_c2";
      } else if (u < pool1_.size() * p_.mu1 || pool2_.empty()) {
        complete(pool1_[std::min<std::size_t>(pool1_.size() - 1,
                                              static_cast<std::size_t>(u / p_.mu1))],
                 clock);
        ev = "done_s1";
      } else {
        u = std::max(0.0, u - pool1_.size() * p_.mu1);
        complete(pool2_[std::min<std::size_t>(pool2_.size() - 1,
                                              static_cast<std::size_t>(u / p_.mu2))],
                 clock);
        ev = "done_s2";
      }

      if (cfg_.check_invariants) {
        if (idle1_ > 0 && !waiting_.empty())
          throw std::logic_error("simulate: idle s1 server while customers wait");
        if (!idle_.empty() && waiting_c1_ > 0)
          throw std::logic_error("simulate: idle server while a c1 customer waits");
      }
      if (trace_.is_open())
        trace_ << clock << ',' << ev << ',' << idle1_ << ','
               << idle_.size() - static_cast<std::size_t>(idle1_) << ',' << scan_k() << '\n';
    }
    finalize_errors();
    return std::move(res_);
  }

 private:
  bool is_s1(int sid) const { return sid < p_.n1; }

  // Trailing s2 run of the ALIS permutation: the permutation ends with the
  // longest-idle server, so scan the idle list front to back, then the busy
  // line newest customer first.
  int scan_k() const {
    int k = 0;
    for (int sid : idle_) {
      if (is_s1(sid)) return k;
      ++k;
    }
    for (auto it = busy_line_.rbegin(); it != busy_line_.rend(); ++it) {
      if (is_s1(it->second)) return k;
      ++k;
    }
    return k;
  }

  void start_service(int sid, bool c1, long long aidx) {
    busy_line_.emplace(aidx, sid);
    sid_key_[sid] = aidx;
    sid_type_[sid] = c1 ? 0 : 1;
    auto& pool = is_s1(sid) ? pool1_ : pool2_;
    pool_pos_[sid] = static_cast<int>(pool.size());
    pool.push_back(sid);
  }

  void stop_service(int sid) {
    busy_line_.erase(sid_key_[sid]);
    sid_key_[sid] = -1;
    auto& pool = is_s1(sid) ? pool1_ : pool2_;
    const int at = pool_pos_[sid];
    pool[at] = pool.back();
    pool_pos_[pool[at]] = at;
    pool.pop_back();
    pool_pos_[sid] = -1;
  }

  void arrive(bool c1) {
    const long long aidx = ++arrival_counter_;
    if (c1) {
      if (!idle_.empty()) {  // longest-idle server of either class
        const int sid = idle_.front();
        idle_.pop_front();
        idle1_ -= is_s1(sid);
        start_service(sid, true, aidx);
      } else {
        waiting_.push_back({aidx, true});
        ++waiting_c1_;
      }
    } else {
      if (idle1_ > 0) {  // longest-idle s1; idle s2 cannot help
        const auto it = std::find_if(idle_.begin(), idle_.end(),
                                     [&](int sid) { return is_s1(sid); });
        const int sid = *it;
        idle_.erase(it);
        --idle1_;
        start_service(sid, false, aidx);
      } else {
        waiting_.push_back({aidx, false});
      }
    }
  }

  void complete(int sid, double t) {
    if (t >= wstart_) {
      const int bi = std::min(cfg_.batch_count - 1,
                              static_cast<int>((t - wstart_) / bw_));
      ++res_.svc[sid_type_[sid]][is_s1(sid) ? 0 : 1];
      ++batch_svc_[bi];
      if (is_s1(sid)) ++batch_svc1_[bi];
    }
    stop_service(sid);
    if (is_s1(sid)) {
      if (!waiting_.empty()) {  // s1 serves the overall front customer
        const WaitingCustomer w = waiting_.front();
        waiting_.pop_front();
        waiting_c1_ -= w.is_c1;
        start_service(sid, w.is_c1, w.aidx);
        return;
      }
    } else if (waiting_c1_ > 0) {  // s2 scans for the first c1
      const auto it = std::find_if(waiting_.begin(), waiting_.end(),
                                   [](const WaitingCustomer& w) { return w.is_c1; });
      const WaitingCustomer w = *it;
      waiting_.erase(it);
      --waiting_c1_;
      start_service(sid, true, w.aidx);
      return;
    }
    idle_.push_back(sid);
    idle1_ += is_s1(sid);
  }

  // State is constant on [t0, t1); add its time weight to the accumulators.
  void weigh(double t0, double t1) {
    const double a = std::max(t0, wstart_);
    const double b = std::min(t1, cfg_.horizon);
    if (b <= a) return;
    const double w = b - a;
    const double i1 = idle1_;
    const double i2 = static_cast<double>(idle_.size()) - i1;
    res_.a1 += w * i1;
    res_.a2 += w * i2;
    res_.s1 += w * i1 * i1;
    res_.s2 += w * i2 * i2;
    res_.ktime[scan_k()] += w;
    double pos = a;
    while (pos < b) {
      int bi = std::min(cfg_.batch_count - 1, static_cast<int>((pos - wstart_) / bw_));
      double hi = std::min(b, wstart_ + (bi + 1) * bw_);
      if (hi <= pos) hi = b;  // guard against a zero-length sliver at a boundary
      batch_i1_[bi] += (hi - pos) * i1;
      batch_i2_[bi] += (hi - pos) * i2;
      pos = hi;
    }
  }

  // Batch-means standard errors for the four reported point estimates.
  void finalize_errors() {
    const int B = cfg_.batch_count;
    auto se_of = [&](const std::vector<double>& m) {
      double mean = 0;
      for (double x : m) mean += x;
      mean /= m.size();
      double ss = 0;
      for (double x : m) ss += (x - mean) * (x - mean);
      return std::sqrt(ss / (m.size() - 1) / m.size());
    };
    std::vector<double> mi1(B), mi2(B), thr(B);
    std::vector<double> betas;
    for (int b = 0; b < B; ++b) {
      mi1[b] = batch_i1_[b] / bw_;
      mi2[b] = batch_i2_[b] / bw_;
      thr[b] = batch_svc_[b] / bw_;
      if (batch_svc_[b] > 0)
        betas.push_back(static_cast<double>(batch_svc1_[b]) / batch_svc_[b]);
    }
    res_.se_i1 = se_of(mi1);
    res_.se_i2 = se_of(mi2);
    res_.se_thr = se_of(thr);
    res_.se_beta = betas.size() >= 2 ? se_of(betas) : 0.0;
  }

  const SystemParams& p_;
  const SimConfig& cfg_;
  std::mt19937_64 rng_;
  const int n_;

  std::deque<int> idle_;  // front = longest idle
  int idle1_ = 0;
  std::deque<WaitingCustomer> waiting_;
  int waiting_c1_ = 0;
  std::map<long long, int> busy_line_;  // arrival index -> sid
  std::vector<long long> sid_key_;
  std::vector<std::uint8_t> sid_type_;  // 0 = serving c1, 1 = serving c2
  std::vector<int> pool1_, pool2_;      // busy sids per pool, unordered
  std::vector<int> pool_pos_;
  long long arrival_counter_ = 0;

  double wstart_ = 0, bw_ = 0;
  std::vector<double> batch_i1_, batch_i2_;
  std::vector<long long> batch_svc_, batch_svc1_;
  std::ofstream trace_;
  RepResult res_;
};

}  // namespace

SimStats simulate(const SystemParams& p, const SimConfig& config) {
  validate(p);
  if (!(config.horizon > 0))
    throw std::invalid_argument("simulate: horizon must be positive");
  if (!(config.warmup_fraction >= 0 && config.warmup_fraction <= 0.5))
    throw std::invalid_argument("simulate: warmup_fraction must be in [0, 0.5]");
  if (config.replications < 1)
    throw std::invalid_argument("simulate: replications must be >= 1");
  if (config.batch_count < 10)
    throw std::invalid_argument("simulate: batch_count must be >= 10");
  const StabilityReport st = stability(p);
  if (!st.stable && !config.allow_unstable)
    throw std::domain_error("simulate: unstable parameters (set allow_unstable to run anyway)");

  const double t_meas_rep = config.horizon * (1 - config.warmup_fraction);
  std::uint64_t seed_state = config.seed;
  std::vector<RepResult> reps;
  reps.reserve(config.replications);
  for (int r = 0; r < config.replications; ++r) {
    const std::uint64_t rep_seed = splitmix64(seed_state);
    Runner runner(p, config, rep_seed, r == 0 && !config.trace_path.empty());
    reps.push_back(runner.run());
  }

  SimStats out;
  out.k_pmf_hat.assign(p.n2 + 1, 0.0);
  const double t_total = t_meas_rep * config.replications;
  double a1 = 0, a2 = 0, s1 = 0, s2 = 0;
  long long svc[2][2] = {};
  double se2_i1 = 0, se2_i2 = 0, se2_beta = 0, se2_thr = 0;
  for (const RepResult& r : reps) {
    a1 += r.a1;
    a2 += r.a2;
    s1 += r.s1;
    s2 += r.s2;
    for (int c = 0; c < 2; ++c)
      for (int s = 0; s < 2; ++s) svc[c][s] += r.svc[c][s];
    for (std::size_t k = 0; k < out.k_pmf_hat.size(); ++k) out.k_pmf_hat[k] += r.ktime[k];
    out.events += r.events;
    se2_i1 += r.se_i1 * r.se_i1;
    se2_i2 += r.se_i2 * r.se_i2;
    se2_beta += r.se_beta * r.se_beta;
    se2_thr += r.se_thr * r.se_thr;
  }
  out.mean_i1 = a1 / t_total;
  out.mean_i2 = a2 / t_total;
  out.var_i1 = s1 / t_total - out.mean_i1 * out.mean_i1;
  out.var_i2 = s2 / t_total - out.mean_i2 * out.mean_i2;
  for (double& x : out.k_pmf_hat) x /= t_total;
  const long long total_svc = svc[0][0] + svc[0][1] + svc[1][0] + svc[1][1];
  if (total_svc > 0) {
    for (int c = 0; c < 2; ++c)
      for (int s = 0; s < 2; ++s)
        out.r_hat[c][s] = static_cast<double>(svc[c][s]) / total_svc;
    out.beta_hat = static_cast<double>(svc[0][0] + svc[1][0]) / total_svc;
  }
  out.throughput = static_cast<double>(total_svc) / t_total;
  out.time_simulated = t_total;
  const double rr = config.replications;
  auto band = [&](double se2) {
    ErrorBand e;
    e.se = std::sqrt(se2) / rr;
    e.ci_halfwidth = 1.96 * e.se;
    return e;
  };
  out.mean_i1_err = band(se2_i1);
  out.mean_i2_err = band(se2_i2);
  out.beta_hat_err = band(se2_beta);
  out.throughput_err = band(se2_thr);
  return out;
}

}  // namespace nsys
