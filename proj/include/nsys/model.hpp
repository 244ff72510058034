#pragma once

#include <string>

namespace nsys {

// Primitive parameters of the N-system: two independent Poisson arrival
// streams and two server pools. Type-c1 customers (rate lambda1) can be
// served by any server; type-c2 customers (rate lambda2) only by the n1
// flexible s1 servers. Each s1 server works at rate mu1, each s2 at mu2.
struct SystemParams {
  double lambda1;
  double lambda2;
  int n1;
  int n2;
  double mu1;
  double mu2;
};

// Throws std::invalid_argument unless lambda1, lambda2 >= 0 and finite,
// lambda1 + lambda2 > 0, n1 >= 1, n2 >= 1, mu1 > 0, mu2 > 0.
void validate(const SystemParams& p);

// Dimensionless ratios used by every other module.
struct DerivedRatios {
  double lambda;  // total arrival rate, lambda1 + lambda2
  int n;          // total servers, n1 + n2
  double alpha;   // lambda1 / lambda
  double theta;   // n1 / n
  double rho;     // lambda / (n1*mu1 + n2*mu2), offered load fraction
  double delta;   // lambda2 / (n1*mu1), c2 load on the flexible pool
  double kappa;   // lambda1 / (n2*mu2)
};

DerivedRatios derive(const SystemParams& p);

struct StabilityReport {
  bool stable;               // rho < 1 and delta < 1
  bool pooled_prerequisite;  // equals stable; full pooling also needs beta
};

StabilityReport stability(const SystemParams& p);

// A system family's shape: everything except the total size n.
struct ShapeSpec {
  double alpha;
  double theta;
  double rho;
  double mu1;
  double mu2;
};

// Instantiates the shape at size n: n1 = ceil(theta*n), n2 = n - n1,
// lambda = rho*(n1*mu1 + n2*mu2), lambda1 = alpha*lambda, lambda2 = rest.
// Throws std::invalid_argument if n < 2 or a pool rounds to zero.
SystemParams scale(const ShapeSpec& shape, int n);

// Parses a JSON object holding exactly the six fields lambda1, lambda2,
// n1, n2, mu1, mu2. Unknown fields are rejected, as are missing ones.
SystemParams params_from_json(const std::string& text);

std::string params_to_json(const SystemParams& p);

}  // namespace nsys
