#pragma once

// Published reference values for the symmetric family lambda = 100,
// n1 = n2 = 100, mu1 = mu2 = 1, used by the reproduce command and the
// acceptance suite. Each row fixes alpha = lambda1 / lambda.

namespace nsys::reference {

struct MomentRow {
  double alpha;
  double mean_i1, var_i1, mean_i2, var_i2;
};

// Exact stationary idle-count moments.
inline constexpr MomentRow kExactMoments[] = {
    {0.80, 49.8383, 37.7049, 50.1617, 37.3814},
    {0.70, 49.6482, 38.0780, 50.3518, 37.3743},
    {0.60, 49.1787, 39.2148, 50.8213, 37.5722},
    {0.55, 48.6055, 40.8706, 51.3945, 38.0816},
    {0.50, 47.3330, 44.8830, 52.6670, 39.5490},
    {0.40, 39.9810, 59.8210, 60.0190, 39.7854},
};

struct ApproxRow {
  double alpha;
  double mean_i1;
};

// Mean idle flexible-pool size from the refined split-ratio fixed point.
inline constexpr ApproxRow kImprovedMeans[] = {
    {0.80, 49.83}, {0.70, 49.62}, {0.60, 49.07}, {0.55, 48.29}, {0.50, 46.46},
};

// The alpha = 0.6 fixed point itself.
inline constexpr double kImprovedThetaAt06 = 0.5093;

}  // namespace nsys::reference
