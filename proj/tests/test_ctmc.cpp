#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <stdexcept>

#include "nsys/ctmc.hpp"
#include "nsys/exact.hpp"

using namespace nsys;

namespace {

const SystemParams kTiny{0.4, 0.2, 1, 1, 1, 1};

// Largest absolute gap between the truncated-chain marginals and the
// product-form table, across every quantity both sides report.
double worst_gap(const CtmcResult& c, const Moments& m) {
  double worst = 0;
  auto bump = [&](double a, double b) { worst = std::max(worst, std::abs(a - b)); };
  bump(c.mean_i1, m.mean_i1);
  bump(c.mean_i2, m.mean_i2);
  bump(c.var_i1, m.var_i1);
  bump(c.var_i2, m.var_i2);
  bump(c.p_i1_zero, m.p_i1_zero);
  REQUIRE(c.k_pmf.size() == m.k_pmf.size());
  for (std::size_t k = 0; k < c.k_pmf.size(); ++k) bump(c.k_pmf[k], m.k_pmf[k]);
  return worst;
}

}  // namespace

TEST_CASE("two-server chain reproduces the product-form table") {
  const CtmcResult c = ctmc_solve(kTiny, 40);
  CHECK(c.state_count == 946);
  CHECK(c.truncation_mass < 1e-12);

  double total = 0;
  for (double p : c.k_pmf) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));

  const Moments m = moments(build_table(kTiny));
  CHECK(worst_gap(c, m) < 1e-6);

  // Same frozen digits the table tests pin down.
  CHECK(c.mean_i1 == doctest::Approx(0.6453531599).epsilon(1e-9));
  CHECK(c.var_i1 == doctest::Approx(0.2288724589).epsilon(1e-8));
  CHECK(c.p_i1_zero == doctest::Approx(0.3546468401).epsilon(1e-8));
}

TEST_CASE("asymmetric small systems agree with the table") {
  {
    const SystemParams p{1.0, 0.7, 2, 1, 1.2, 0.8};
    CHECK(worst_gap(ctmc_solve(p, 25), moments(build_table(p))) < 1e-6);
  }
  {
    const SystemParams p{0.8, 0.3, 1, 2, 1.0, 0.6};
    CHECK(worst_gap(ctmc_solve(p, 18), moments(build_table(p))) < 1e-6);
  }
}

TEST_CASE("truncation error shrinks as the queue cap grows") {
  const CtmcResult c10 = ctmc_solve(kTiny, 10);
  const CtmcResult c20 = ctmc_solve(kTiny, 20);
  const CtmcResult c40 = ctmc_solve(kTiny, 40);
  CHECK(c10.truncation_mass > c20.truncation_mass);
  CHECK(c20.truncation_mass > c40.truncation_mass);
  CHECK(std::abs(c20.mean_i1 - c40.mean_i1) <= 1e-8 * c40.mean_i1);
}

TEST_CASE("size guards reject out-of-range requests") {
  CHECK_THROWS_AS(ctmc_solve({1.0, 0.5, 3, 2, 1, 1}, 20), std::invalid_argument);
  CHECK_THROWS_AS(ctmc_solve(kTiny, 0), std::invalid_argument);
  CHECK_THROWS_AS(ctmc_solve(kTiny, 51), std::invalid_argument);
}
