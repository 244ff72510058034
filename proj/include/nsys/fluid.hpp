#pragma once

#include <vector>

#include "nsys/model.hpp"

namespace nsys {

// Fluid-limit steady state. T is the mean idle period a server spends per
// busy-idle cycle, beta the long-run fraction of services performed by the
// s1 pool, m1/m2 the mean idle-server counts per pool, f1/f2 = m/n.
struct FluidSolution {
  double T;
  double beta;
  double m1, m2;
  double f1, f2;
};

// Positive root of the fluid quadratic
//   g(T) = lambda*mu1*mu2*T^2 + (lambda*(mu1+mu2) - n*mu1*mu2)*T
//        + lambda - n1*mu1 - n2*mu2,
// which exists and is unique when rho < 1 (g(0) < 0). Throws
// std::domain_error when rho >= 1: no positive idle time.
FluidSolution fluid_solve(const SystemParams& p);

// Complete resource pooling predicate: alpha + beta > 1.
bool pooling(const SystemParams& p);

// Limiting standard deviations and correlation of the scaled idle counts
// (I1 - m1)/sqrt(n) and (I2 - m2)/sqrt(n).
struct CltParams {
  double sigma1;
  double sigma2;
  double corr;
};

// Throws std::domain_error outside the stable, pooled regime.
CltParams clt_params(const SystemParams& p);

// Geometric law of the trailing-s2 count K: P(K=k) = p*(1-p)^k with
// p = 1 - (1-beta)/alpha. The returned pmf is truncated at the first k
// whose remaining tail mass is below tail_eps. Throws std::domain_error
// when alpha + beta <= 1 (mass escapes to infinity).
std::vector<double> k_geometric(double alpha, double beta, double tail_eps = 1e-15);

struct ImprovedTheta {
  double theta_star;   // fixed point of the finite-sum equation below
  double e_i1_approx;  // n1 - theta_star * rho * n
};

// Refined mean-idleness approximation: solves
//   sum_{k=0}^{n2} ((n1-1)/(n-1-k)) * ((1-theta)/alpha)^k * ((alpha+theta-1)/alpha) = theta
// for theta in (1-alpha, 1). The residual crosses zero twice in the bracket;
// the meaningful fixed point is the upper one, so the solver scans downward
// from the top of the bracket and bisects the first sign change to 1e-10.
// Throws std::domain_error if no sign change is found.
ImprovedTheta improved_theta(const SystemParams& p);

}  // namespace nsys
