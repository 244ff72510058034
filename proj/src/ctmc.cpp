#include "nsys/ctmc.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <deque>
#include <map>
#include <stdexcept>
#include <utility>

namespace nsys {

namespace {

// One busy server: its id and the count of customers waiting behind it.
// Servers with id < n1 are s1. The full state is busy servers in line order
// (by served customer's arrival) plus idle server ids, longest idle first.
struct BusyEntry {
  int sid;
  int q;
  auto operator<=>(const BusyEntry&) const = default;
};

struct State {
  std::vector<BusyEntry> busy;
  std::vector<int> idle;
  auto operator<=>(const State&) const = default;
};

struct Enumerator {
  const SystemParams& p;
  int qmax;
  double lam, alpha;
  std::map<State, int> index;
  std::vector<State> states;
  std::vector<std::map<int, double>> rows;
  std::deque<int> todo;

  Enumerator(const SystemParams& params, int cap) : p(params), qmax(cap) {
    lam = p.lambda1 + p.lambda2;
    alpha = p.lambda1 / lam;
  }

  bool is_s1(int sid) const { return sid < p.n1; }

  int intern(State s) {
    auto [it, fresh] = index.try_emplace(std::move(s), static_cast<int>(states.size()));
    if (fresh) {
      states.push_back(it->first);
      rows.emplace_back();
      todo.push_back(it->second);
    }
    return it->second;
  }

  void add(std::map<int, double>& trans, State tgt, double rate) {
    if (rate <= 0) return;
    trans[intern(std::move(tgt))] += rate;
  }

  // Server at busy position pos seizes the customer at inner index u of the
  // queue at position l (l >= pos). The u skipped customers merge into the
  // predecessor queue; on a cross-queue grab the seizing server re-inserts at
  // position l with the remainder of that queue behind it.
  State take(const State& s, int pos, int l, int u) const {
    State t = s;
    auto& B = t.busy;
    const int sid = B[pos].sid;
    if (l == pos) {
      if (pos > 0)
        B[pos - 1].q += u;
      B[pos].q -= u + 1;
    } else {
      if (pos > 0) B[pos - 1].q += B[pos].q;
      const int rest = B[l].q - u - 1;
      B[l].q = u;
      B.erase(B.begin() + pos);
      B.insert(B.begin() + l, BusyEntry{sid, rest});  // old B[l] shifted to l-1
    }
    return t;
  }

  // Server at busy position pos finds nothing to serve and joins the back of
  // the idle list; its queue (empty unless it has a predecessor) merges left.
  State idle_out(const State& s, int pos) const {
    State t = s;
    if (pos > 0) t.busy[pos - 1].q += t.busy[pos].q;
    t.idle.push_back(t.busy[pos].sid);
    t.busy.erase(t.busy.begin() + pos);
    return t;
  }

  void run() {
    State start;
    for (int sid = 0; sid < p.n1 + p.n2; ++sid) start.idle.push_back(sid);
    intern(std::move(start));
    while (!todo.empty()) {
      const int si = todo.front();
      todo.pop_front();
      const State st = states[si];  // copy: states may reallocate below
      std::map<int, double> trans;
      int waiting = 0;
      for (const auto& b : st.busy) waiting += b.q;
      const int i = static_cast<int>(st.idle.size());

      // Arrivals.
      if (i == 0) {
        if (waiting < qmax) {
          State t = st;
          t.busy.back().q += 1;
          add(trans, std::move(t), lam);
        }
      } else {
        {  // c1 takes the longest-idle server
          State t = st;
          t.busy.push_back({t.idle.front(), 0});
          t.idle.erase(t.idle.begin());
          add(trans, std::move(t), p.lambda1);
        }
        const auto s1_it = std::find_if(st.idle.begin(), st.idle.end(),
                                        [&](int sid) { return is_s1(sid); });
        if (s1_it != st.idle.end()) {  // c2 takes the longest-idle s1
          State t = st;
          t.busy.push_back({*s1_it, 0});
          t.idle.erase(t.idle.begin() + (s1_it - st.idle.begin()));
          add(trans, std::move(t), p.lambda2);
        } else if (!st.busy.empty() && waiting < qmax) {  // c2 must wait
          State t = st;
          t.busy.back().q += 1;
          add(trans, std::move(t), p.lambda2);
        }
      }

      // Completions.
      for (int pos = 0; pos < static_cast<int>(st.busy.size()); ++pos) {
        if (is_s1(st.busy[pos].sid)) {
          int l = -1;
          for (int jj = 0; jj < static_cast<int>(st.busy.size()); ++jj)
            if (st.busy[jj].q > 0) { l = jj; break; }
          if (l < 0)
            add(trans, idle_out(st, pos), p.mu1);
          else
            add(trans, take(st, pos, l, 0), p.mu1);
        } else {
          const int last_q = st.busy.back().q;
          if (i == 0 && last_q > 0) {
            // Scan the uninspected queue for the first c1: found at inner
            // index u with probability alpha*(1-alpha)^u, else go idle.
            double residual = p.mu2;
            double pu = alpha;
            for (int u = 0; u < last_q; ++u) {
              const double r = p.mu2 * pu;
              add(trans, take(st, pos, static_cast<int>(st.busy.size()) - 1, u), r);
              residual -= r;
              pu *= 1 - alpha;
            }
            add(trans, idle_out(st, pos), residual);
          } else {
            add(trans, idle_out(st, pos), p.mu2);
          }
        }
      }
      rows[si] = std::move(trans);
    }
  }
};

}  // namespace

CtmcResult ctmc_solve(const SystemParams& p, int qmax) {
  validate(p);
  if (p.n1 + p.n2 > 4)
    throw std::invalid_argument("ctmc_solve: n1 + n2 <= 4 required (state space explodes)");
  if (qmax < 1 || qmax > 50)
    throw std::invalid_argument("ctmc_solve: qmax must be in 1..50");

  Enumerator e(p, qmax);
  e.run();
  const int N = static_cast<int>(e.states.size());

  // Solve pi Q = 0, sum(pi) = 1: replace the last row of Q^T with ones.
  std::vector<Eigen::Triplet<double>> trip;
  std::vector<double> outrate(N, 0.0);
  for (int si = 0; si < N; ++si)
    for (const auto& [tj, r] : e.rows[si]) {
      outrate[si] += r;
      if (tj != N - 1) trip.emplace_back(tj, si, r);
    }
  for (int si = 0; si < N; ++si)
    if (si != N - 1) trip.emplace_back(si, si, -outrate[si]);
  for (int si = 0; si < N; ++si) trip.emplace_back(N - 1, si, 1.0);

  Eigen::SparseMatrix<double> A(N, N);
  A.setFromTriplets(trip.begin(), trip.end());
  A.makeCompressed();
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(A);
  lu.factorize(A);
  if (lu.info() != Eigen::Success)
    throw std::runtime_error("ctmc_solve: singular generator (unreachable states?)");
  Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
  b[N - 1] = 1.0;
  Eigen::VectorXd pi = lu.solve(b);

  CtmcResult r{};
  r.state_count = static_cast<std::size_t>(N);
  r.k_pmf.assign(p.n2 + 1, 0.0);
  const int n = p.n1 + p.n2;
  double e1 = 0, e2 = 0;
  std::vector<int> i1s(N), i2s(N);
  for (int si = 0; si < N; ++si) {
    const State& st = e.states[si];
    int i1 = 0;
    for (int sid : st.idle) i1 += sid < p.n1;
    const int i2 = static_cast<int>(st.idle.size()) - i1;
    i1s[si] = i1;
    i2s[si] = i2;
    // Permutation = busy line order, then idle newest first; k is its
    // trailing s2 run.
    int k = 0;
    bool done = false;
    for (int sid : st.idle) {
      if (sid < p.n1) { done = true; break; }
      ++k;
    }
    if (!done)
      for (int j = static_cast<int>(st.busy.size()) - 1; j >= 0; --j) {
        if (st.busy[j].sid < p.n1) break;
        ++k;
      }
    const double mass = pi[si];
    e1 += mass * i1;
    e2 += mass * i2;
    r.k_pmf[k] += mass;
    if (i1 == 0) r.p_i1_zero += mass;
    int waiting = 0;
    for (const auto& bb : st.busy) waiting += bb.q;
    if (waiting >= qmax) r.truncation_mass += mass;
  }
  r.mean_i1 = e1;
  r.mean_i2 = e2;
  for (int si = 0; si < N; ++si) {
    const double d1 = i1s[si] - e1, d2 = i2s[si] - e2;
    r.var_i1 += pi[si] * d1 * d1;
    r.var_i2 += pi[si] * d2 * d2;
  }
  return r;
}

}  // namespace nsys
