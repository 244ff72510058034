#include "nsys/fluid.hpp"

#include <cmath>
#include <stdexcept>

namespace nsys {

FluidSolution fluid_solve(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  if (d.rho >= 1.0) throw std::domain_error("fluid_solve: rho >= 1, no positive idle time");
  const double a = d.lambda * p.mu1 * p.mu2;
  const double b = d.lambda * (p.mu1 + p.mu2) - d.n * p.mu1 * p.mu2;
  const double c = d.lambda - p.n1 * p.mu1 - p.n2 * p.mu2;  // < 0 since rho < 1
  const double disc = std::sqrt(b * b - 4 * a * c);
  // Pick the form of the positive root that avoids cancellation; equivalent to
  // the closed-form radical once its middle term's sign is taken from g itself.
  double T = (b > 0) ? (2 * c) / (-b - disc) : (-b + disc) / (2 * a);
  // One Newton polish on g.
  const double gT = (a * T + b) * T + c;
  const double gpT = 2 * a * T + b;
  if (gpT != 0) T -= gT / gpT;
  FluidSolution s;
  s.T = T;
  s.beta = p.n1 / (d.lambda * T + d.lambda / p.mu1);
  s.m1 = d.lambda * s.beta * T;
  s.m2 = d.lambda * (1 - s.beta) * T;
  s.f1 = s.m1 / d.n;
  s.f2 = s.m2 / d.n;
  return s;
}

bool pooling(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  return d.alpha + fluid_solve(p).beta > 1.0;
}

CltParams clt_params(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  if (!stability(p).stable) throw std::domain_error("clt_params: unstable system");
  const FluidSolution s = fluid_solve(p);
  if (!(d.alpha + s.beta > 1.0))
    throw std::domain_error("clt_params: outside the resource-pooled validity region");
  const double th = d.theta, f1 = s.f1, f2 = s.f2;
  const double den = th * f2 * f2 + (1 - th) * f1 * f1;
  CltParams c;
  c.sigma1 = std::sqrt((th - f1) * f1 * ((1 - th) * f1 + f2 * f2) / den);
  c.sigma2 = std::sqrt((1 - th - f2) * f2 * (th * f2 + f1 * f1) / den);
  c.corr = std::sqrt((th - f1) * (1 - th - f2) * f1 * f2 /
                     ((th * f2 + f1 * f1) * ((1 - th) * f1 + f2 * f2)));
  return c;
}

std::vector<double> k_geometric(double alpha, double beta, double tail_eps) {
  if (!(alpha > 0 && alpha <= 1) || !(beta > 0 && beta <= 1))
    throw std::invalid_argument("k_geometric: alpha, beta must be in (0,1]");
  if (!(alpha + beta > 1))
    throw std::domain_error("k_geometric: alpha + beta <= 1, geometric degenerates");
  const double q = (1 - beta) / alpha;  // failure probability, in [0,1)
  const double pk = 1 - q;
  std::vector<double> pmf;
  double tail = 1.0;  // q^k, the mass at k and beyond
  for (int k = 0; tail >= tail_eps; ++k) {
    pmf.push_back(pk * tail);
    tail *= q;
    if (q == 0) break;
  }
  return pmf;
}

ImprovedTheta improved_theta(const SystemParams& p) {
  const DerivedRatios d = derive(p);
  if (!stability(p).stable) throw std::domain_error("improved_theta: unstable system");
  const int n1 = p.n1, n2 = p.n2, n = d.n;
  const double alpha = d.alpha;
  auto residual = [&](double th) {
    const double r = (1 - th) / alpha;
    double sum = 0.0, rk = 1.0;
    for (int k = 0; k <= n2; ++k) {
      sum += (n1 - 1.0) / (n - 1.0 - k) * rk;
      rk *= r;
    }
    return sum * (alpha + th - 1) / alpha - th;
  };
  const double lo = 1 - alpha + 1e-9, hi = 1 - 1e-9;
  if (!(lo < hi)) throw std::domain_error("improved_theta: empty bracket (alpha too small)");
  // Scan downward from the top of the bracket for the first sign change.
  const int kGrid = 4000;
  double a = hi, fa = residual(hi), b = 0, fb = 0;
  bool found = false;
  for (int i = 1; i <= kGrid; ++i) {
    b = hi + (lo - hi) * i / kGrid;
    fb = residual(b);
    if (fa == 0 || fa * fb < 0) { found = true; break; }
    a = b;
    fa = fb;
  }
  if (!found)
    throw std::domain_error("improved_theta: no sign change of the fixed-point residual in (1-alpha, 1)");
  while (std::abs(a - b) > 1e-10) {
    const double m = 0.5 * (a + b);
    const double fm = residual(m);
    if (fa * fm <= 0) { b = m; fb = fm; } else { a = m; fa = fm; }
  }
  ImprovedTheta out;
  out.theta_star = 0.5 * (a + b);
  out.e_i1_approx = p.n1 - out.theta_star * d.rho * d.n;
  return out;
}

}  // namespace nsys
