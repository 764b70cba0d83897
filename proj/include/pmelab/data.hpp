#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pmelab/solver.hpp"

namespace pmelab {

/// (a + b.x)^{1/m}: u^m is affine, hence a stationary solution.
BoundaryData affine_power_data(double a, const Point& b, double m, int n, double box_radius);
/// max(a + b.x, 0)
BoundaryData linear_data(double a, const Point& b, int n, double box_radius);
/// Barenblatt profile at time t + t_shift, used at times t >= t_min.
BoundaryData barenblatt_data(double m, int n, double C, double t_min, double t_shift = 0.0);
/// height * ramp(t) * (1 - |x - center| / radius)_+, ramp rising linearly
/// from 0 at t_begin to 1 at t_begin + ramp (ramp = 0 means a step-free 1).
BoundaryData spot_data(const Point& center, int n, double radius, double height, double t_begin = 0.0,
                       double ramp = 0.0);

/// height * (1 - |x - center|^2 / radius^2)_+^2, time independent.
BoundaryData bump_data(const Point& center, int n, double radius, double height);

/// Smooth positive random field base + amplitude * S(x,t) / sum|a_q| with S
/// a finite cosine series; values lie in [base - amplitude, base + amplitude].
struct SmoothRandomSpec {
    std::uint64_t seed = 0;
    std::string stream = "smooth";
    int modes = 4;
    double base = 1.0;
    double amplitude = 0.5;
    double max_wavenumber = 6.0;
    int n = 2;
};
BoundaryData smooth_random_data(const SmoothRandomSpec& spec);

/// Pointwise sum of two data (bounds add).
BoundaryData sum_data(const BoundaryData& a, const BoundaryData& b);
BoundaryData scaled_data(const BoundaryData& a, double s);

}  // namespace pmelab
