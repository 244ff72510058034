#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <array>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "nsys/exact.hpp"
#include "nsys/fluid.hpp"

using namespace nsys;

namespace {

const double kInf = std::numeric_limits<double>::infinity();

SystemParams symmetric_system(double alpha) {
  return {alpha * 100, (1 - alpha) * 100, 100, 100, 1, 1};
}

const SystemParams kTiny{0.4, 0.2, 1, 1, 1, 1};

double logaddexp(double a, double b) {
  if (a == -kInf) return b;
  if (b == -kInf) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

// Half the L1 distance between an exact K marginal and the limiting
// geometric law with the given success probability, tail included.
double tv_vs_geometric(const std::vector<double>& k_pmf, double success) {
  const double q = 1 - success;
  double tv = 0, geo = success, tail = 1;
  for (double pk : k_pmf) {
    tv += std::abs(pk - geo);
    tail -= geo;
    geo *= q;
  }
  return 0.5 * (tv + tail);
}

}  // namespace

TEST_CASE("support classification matches the three regions") {
  const SystemParams p = symmetric_system(0.8);
  CHECK(on_support(p, {0, 50, 50}));
  CHECK(on_support(p, {3, 1, 3}));
  CHECK_FALSE(on_support(p, {2, 3, 1}));   // i2 < k with i1 >= 1
  CHECK(on_support(p, {2, 0, 1}));         // 1 <= i2 <= k
  CHECK_FALSE(on_support(p, {2, 0, 3}));   // i2 > k with i1 = 0
  CHECK(on_support(p, {5, 0, 0}));
  CHECK(on_support(p, {100, 0, 0}));
  CHECK_FALSE(on_support(p, {101, 0, 0}));
  CHECK_FALSE(on_support(p, {-1, 0, 0}));
  CHECK_FALSE(on_support(p, {0, 101, 0}));
  CHECK_FALSE(on_support(p, {0, 0, 101}));
}

TEST_CASE("single-cell weights evaluate the product form") {
  const SystemParams p = symmetric_system(0.8);
  // all-busy empty-queue cell: n1*mu1 / (n1*mu1 + n2*mu2 - lambda) = 1
  // (the log-factorial terms cancel only to ~1e-13 at magnitude ~360)
  CHECK(log_weight_cell(p, {0, 0, 0}) == doctest::Approx(0.0).epsilon(1e-13));
  CHECK(log_weight_cell(p, {2, 3, 1}) == -kInf);
  // adjacent-cell ratio quoted in closed form: (i1+i2-k)(n1-i1)mu1/(i1*lambda)
  const double ratio = log_weight_cell(p, {0, 51, 50}) - log_weight_cell(p, {0, 50, 50});
  CHECK(ratio == doctest::Approx(std::log(100.0 * 50 * 1 / (50 * 100.0))).epsilon(1e-12));
  CHECK(ratio == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("weights require a stable system with flexible-pool demand") {
  CHECK_THROWS_AS(build_table({90, 60, 50, 50, 2, 1}), std::domain_error);    // rho = 1
  CHECK_THROWS_AS(build_table({0.5, 1.0, 1, 10, 1, 10}), std::domain_error);  // delta = 1
  CHECK_THROWS_AS(build_table({0, 1, 2, 2, 1, 1}), std::domain_error);        // lambda1 = 0
  CHECK_THROWS_AS(log_weight_cell({90, 60, 50, 50, 2, 1}, {0, 0, 0}), std::domain_error);
}

TEST_CASE("table normalizes over the full support") {
  const StationaryTable t = build_table(symmetric_system(0.8));
  // n1*(n2+1)(n2+2)/2 + n2(n2+1)/2 + (n2+1) cells
  CHECK(t.cell_count() == 515100 + 5050 + 101);
  double sum = 0, carry = 0;
  t.for_each([&](CellIndex, double lw) {
    const double y = std::exp(lw - t.logZ()) - carry;
    const double s = sum + y;
    carry = (s - sum) - y;
    sum = s;
  });
  CHECK(std::abs(sum - 1.0) <= 1e-10);
  // random access agrees with iteration
  t.for_each([&](CellIndex c, double lw) {
    if ((c.k + c.i1 + c.i2) % 97 == 0) CHECK(t.log_w(c) == lw);
  });
  CHECK(t.log_w({3, 2, 1}) == -kInf);
}

TEST_CASE("moments reproduce the published exact values") {
  struct Row {
    double alpha, e1, v1, e2, v2;
  };
  const Row rows[] = {
      {0.8, 49.8383, 37.7049, 50.1617, 37.3814},
      {0.4, 39.981, 59.821, 60.019, 39.7854},
  };
  for (const Row& r : rows) {
    const Moments m = moments(build_table(symmetric_system(r.alpha)));
    CHECK(std::abs(m.mean_i1 - r.e1) <= 5e-3);
    CHECK(std::abs(m.var_i1 - r.v1) <= 5e-3);
    CHECK(std::abs(m.mean_i2 - r.e2) <= 5e-3);
    CHECK(std::abs(m.var_i2 - r.v2) <= 5e-3);
    CHECK(m.var_i1 >= 0);
    CHECK(std::abs(m.cov) <= std::sqrt(m.var_i1 * m.var_i2));
    double sk = 0, s1 = 0, s2 = 0;
    for (double x : m.k_pmf) sk += x;
    for (double x : m.i1_pmf) s1 += x;
    for (double x : m.i2_pmf) s2 += x;
    CHECK(std::abs(sk - 1) <= 1e-10);
    CHECK(std::abs(s1 - 1) <= 1e-10);
    CHECK(std::abs(s2 - 1) <= 1e-10);
    CHECK(m.mean_i1 + m.mean_i2 ==
          doctest::Approx(derive(symmetric_system(r.alpha)).lambda *
                          fluid_solve(symmetric_system(r.alpha)).T)
              .epsilon(0.02));
  }
}

TEST_CASE("adjacent-cell ratios hold across the whole table") {
  const SystemParams p = symmetric_system(0.8);
  const StationaryTable t = build_table(p);
  const DerivedRatios d = derive(p);
  const FluidSolution fl = fluid_solve(p);
  const double log_mu1_lam = std::log(p.mu1 / d.lambda);
  const double log_mu2_lam = std::log(p.mu2 / d.lambda);
  // the service-share form of the second ratio: (1-beta)/(n2-m2) = mu2/lambda
  const double log_beta_form = std::log((1 - fl.beta) / (p.n2 - fl.m2));
  double worst = 0;
  t.for_each([&](CellIndex c, double lw) {
    if (c.i1 < 1) return;
    if (c.i1 + 1 <= p.n1) {
      const double step = t.log_w({c.k, c.i1 + 1, c.i2}) - lw;
      const double closed = std::log(static_cast<double>(p.n1 - c.i1)) +
                            std::log(static_cast<double>(c.i1 + c.i2 - c.k)) -
                            std::log(static_cast<double>(c.i1)) + log_mu1_lam;
      worst = std::max(worst, std::abs(step - closed));
    }
    if (c.i2 + 1 <= p.n2) {
      const double step = t.log_w({c.k, c.i1, c.i2 + 1}) - lw;
      const double closed = std::log(static_cast<double>(p.n2 - c.i2)) +
                            std::log(static_cast<double>(c.i1 + c.i2 - c.k)) -
                            std::log(static_cast<double>(c.i2 + 1 - c.k)) + log_mu2_lam;
      worst = std::max(worst, std::abs(step - closed));
      const double closed_beta = std::log(static_cast<double>(p.n2 - c.i2)) +
                                 std::log(static_cast<double>(c.i1 + c.i2 - c.k)) -
                                 std::log(static_cast<double>(c.i2 + 1 - c.k)) + log_beta_form;
      worst = std::max(worst, std::abs(step - closed_beta));
    }
  });
  CHECK(worst <= 1e-12);
}

TEST_CASE("hand-enumerable system matches frozen chain-solve values") {
  const StationaryTable t = build_table(kTiny);
  CHECK(t.cell_count() == 6);
  const Moments m = moments(t);
  // values frozen from an independent truncated-chain linear solve
  CHECK(m.mean_i1 == doctest::Approx(0.6453531599).epsilon(1e-9));
  CHECK(m.var_i1 == doctest::Approx(0.2288724589).epsilon(1e-8));
  CHECK(m.mean_i2 == doctest::Approx(0.7546468401).epsilon(1e-9));
  CHECK(m.var_i2 == doctest::Approx(0.1851549868).epsilon(1e-8));
  CHECK(m.p_i1_zero == doctest::Approx(0.3546468401).epsilon(1e-8));
  CHECK(m.k_pmf[0] == doctest::Approx(0.3866171).epsilon(1e-6));
  CHECK(m.k_pmf[1] == doctest::Approx(0.6133829).epsilon(1e-6));
}

TEST_CASE("zero-flexible-idle closed forms match the grid sums") {
  const SystemParams p = symmetric_system(0.8);
  const ZeroFlexibleIdle z = p_i1_zero_closed_form(p);
  CHECK(z.log_rel_00 == doctest::Approx(std::log(2.25)).epsilon(1e-13));

  const StationaryTable t = build_table(p);
  const Moments m = moments(t);
  // combined closed form vs grid-summed P(I1 = 0), relative
  const double closed = std::exp(logaddexp(z.log_rel_00, z.log_rel_0pos) - t.logZ());
  CHECK(std::abs(closed / m.p_i1_zero - 1) <= 1e-10);
  // the i1 = i2 = 0 strip alone telescopes to its own closed form
  double strip = -kInf;
  t.for_each([&](CellIndex c, double lw) {
    if (c.i1 == 0 && c.i2 == 0) strip = logaddexp(strip, lw);
  });
  CHECK(std::abs(strip - z.log_rel_00) <= 1e-10);

  // no c2 traffic: the 1/(1-delta) factor drops out exactly
  const SystemParams nc2{50, 0, 50, 50, 1, 1};
  const ZeroFlexibleIdle z2 = p_i1_zero_closed_form(nc2);
  const DerivedRatios d2 = derive(nc2);
  CHECK(z2.log_rel_00 ==
        doctest::Approx(std::log((1 - (1 - d2.alpha) * d2.rho) / (1 - d2.rho))).epsilon(1e-13));
}

TEST_CASE("mode of the idle-count law sits at the fluid point") {
  const SystemParams p = symmetric_system(0.8);
  const StationaryTable t = build_table(p);
  const FluidSolution s = fluid_solve(p);
  double best = -kInf;
  CellIndex arg{0, 0, 0};
  t.for_each([&](CellIndex c, double lw) {
    if (c.k == 0 && lw > best) {
      best = lw;
      arg = c;
    }
  });
  CHECK(std::abs(arg.i1 - s.m1) <= 2.0);
  CHECK(std::abs(arg.i2 - s.m2) <= 2.0);
}

TEST_CASE("marginal laws sharpen toward the limit along growing systems") {
  const ShapeSpec shape{0.8, 0.5, 0.5, 1, 1};
  const double success = 1 - (1 - 0.5) / 0.8;  // limiting geometric, beta = theta here
  std::vector<double> tv, pz;
  for (int n : {40, 80, 160, 320}) {
    const Moments m = moments(build_table(scale(shape, n)));
    tv.push_back(tv_vs_geometric(m.k_pmf, success));
    pz.push_back(m.p_i1_zero);
  }
  for (std::size_t i = 1; i < tv.size(); ++i) {
    CHECK(tv[i] < tv[i - 1]);
    CHECK(pz[i] < pz[i - 1]);
  }
  CHECK(tv.back() <= 0.02);
  // frozen from the independent reference implementation
  CHECK(tv[0] == doctest::Approx(0.030389).epsilon(1e-3));
  CHECK(tv[3] == doctest::Approx(0.004082).epsilon(1e-3));
  const Moments m200 = moments(build_table(scale(shape, 200)));
  CHECK(m200.p_i1_zero <= 1e-8);
  CHECK(m200.p_i1_zero > 0);
}

TEST_CASE("per-state weights evaluate the detailed product form") {
  // two servers, both idle; the longest-idle server is the last entry
  const double lam = 0.6, lam1 = 0.4;
  DetailedState all_idle;
  all_idle.perm = {ServerClass::s1, ServerClass::s2};  // s2 idled longest
  all_idle.idle_cut = 0;
  CHECK(log_pi_state(kTiny, all_idle) ==
        doctest::Approx(-std::log(lam) - std::log(lam1)).epsilon(1e-13));
  DetailedState all_idle_rev;
  all_idle_rev.perm = {ServerClass::s2, ServerClass::s1};  // s1 idled longest
  all_idle_rev.idle_cut = 0;
  CHECK(log_pi_state(kTiny, all_idle_rev) ==
        doctest::Approx(-2 * std::log(lam)).epsilon(1e-13));

  // both busy, three customers waiting behind the whole line
  DetailedState backed_up;
  backed_up.perm = {ServerClass::s1, ServerClass::s2};
  backed_up.idle_cut = 2;
  backed_up.queues = {0, 3};
  CHECK(log_pi_state(kTiny, backed_up) ==
        doctest::Approx(-std::log(1.0) + 3 * std::log(lam) - 4 * std::log(2.0)).epsilon(1e-13));

  // s2 busy and s1 idle: i1 >= 1 branch, one lambda factor
  DetailedState half;
  half.perm = {ServerClass::s2, ServerClass::s1};
  half.idle_cut = 1;
  half.queues = {0};
  CHECK(log_pi_state(kTiny, half) ==
        doctest::Approx(-std::log(1.0) - std::log(lam)).epsilon(1e-13));
}

TEST_CASE("per-state weights aggregate over queues to the table cells") {
  // Summing the detailed weights over every queue configuration of every
  // permutation must land exactly on the aggregated cell weights.
  const StationaryTable t = build_table(kTiny);
  const int cap = 120;  // blocked-to-drain ratios are <= 0.3, tail ~1e-63
  std::map<std::array<int, 3>, double> mass;
  auto accumulate = [&](const DetailedState& s) {
    int k = 0;
    for (auto it = s.perm.rbegin(); it != s.perm.rend() && *it == ServerClass::s2; ++it) ++k;
    int i1 = 0, i2 = 0;
    for (int j = s.idle_cut; j < 2; ++j) (s.perm[j] == ServerClass::s1 ? i1 : i2) += 1;
    mass[{k, i1, i2}] += std::exp(log_pi_state(kTiny, s));
  };
  const std::vector<std::vector<ServerClass>> perms = {
      {ServerClass::s1, ServerClass::s2}, {ServerClass::s2, ServerClass::s1}};
  for (const auto& perm : perms) {
    accumulate({perm, 0, {}});
    // the first position may hold waiting customers only when the server
    // behind it is s2 (they are c2 arrivals no one else can take)
    const int cap1 = perm[1] == ServerClass::s2 ? cap : 0;
    for (int q1 = 0; q1 <= cap1; ++q1) accumulate({perm, 1, {q1}});
    for (int q1 = 0; q1 <= cap1; ++q1)
      for (int q2 = 0; q2 <= cap; ++q2) accumulate({perm, 2, {q1, q2}});
  }
  CHECK(mass.size() == t.cell_count());
  for (const auto& [cell, sum] : mass)
    CHECK(std::log(sum) ==
          doctest::Approx(t.log_w({cell[0], cell[1], cell[2]})).epsilon(1e-11));
}

TEST_CASE("malformed detailed states are rejected") {
  const SystemParams p{1.0, 0.7, 2, 1, 1.2, 0.8};
  DetailedState s;
  // wrong class counts
  s.perm = {ServerClass::s1, ServerClass::s1, ServerClass::s1};
  s.idle_cut = 0;
  CHECK_THROWS_AS(log_pi_state(p, s), std::invalid_argument);
  // wrong perm length
  s.perm = {ServerClass::s1, ServerClass::s2};
  CHECK_THROWS_AS(log_pi_state(p, s), std::invalid_argument);
  // queue list size must match the busy prefix
  s.perm = {ServerClass::s1, ServerClass::s1, ServerClass::s2};
  s.idle_cut = 2;
  s.queues = {0};
  CHECK_THROWS_AS(log_pi_state(p, s), std::invalid_argument);
  // waiting customers at a position a later s1 would have drained
  s.idle_cut = 3;
  s.queues = {1, 0, 0};
  CHECK_THROWS_AS(log_pi_state(p, s), std::invalid_argument);
  // negative queue
  s.queues = {0, 0, -1};
  CHECK_THROWS_AS(log_pi_state(p, s), std::invalid_argument);
  // positive queue on the trailing s2 run is fine
  s.queues = {0, 0, 2};
  CHECK_NOTHROW(log_pi_state(p, s));
  // idle s1 while customers wait is impossible
  DetailedState bad;
  bad.perm = {ServerClass::s1, ServerClass::s2, ServerClass::s1};
  bad.idle_cut = 2;
  bad.queues = {0, 1};
  CHECK_THROWS_AS(log_pi_state(p, bad), std::invalid_argument);
}

TEST_CASE("brute-force permutation sums collapse to the product") {
  CHECK(perm_sum_bruteforce({1, 2}) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(perm_sum_bruteforce({1, 1, 1}) == doctest::Approx(1.0).epsilon(1e-14));
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> U(0.1, 10.0);
  for (int m = 2; m <= 7; ++m) {
    for (int trial = 0; trial < 100; ++trial) {
      std::vector<double> a(m);
      double prod = 1;
      for (double& x : a) {
        x = U(rng);
        prod *= x;
      }
      CHECK(perm_sum_bruteforce(a) * prod == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(perm_sum_bruteforce(std::vector<double>(9, 1.0)), std::invalid_argument);
  CHECK_THROWS_AS(perm_sum_bruteforce({}), std::invalid_argument);
  CHECK_THROWS_AS(perm_sum_bruteforce({1.0, -1.0}), std::invalid_argument);
}

TEST_CASE("csv export lists every cell with normalized mass") {
  const StationaryTable t = build_table(kTiny);
  std::ostringstream os;
  write_table_csv(t, os);
  std::istringstream in(os.str());
  std::string line;
  REQUIRE(std::getline(in, line));
  CHECK(line == "k,i1,i2,prob");
  int rows = 0;
  double total = 0;
  while (std::getline(in, line)) {
    ++rows;
    const auto last_comma = line.rfind(',');
    total += std::stod(line.substr(last_comma + 1));
  }
  CHECK(rows == 6);
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}
