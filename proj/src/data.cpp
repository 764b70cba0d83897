#include "pmelab/data.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmelab/barriers.hpp"
#include "pmelab/rng.hpp"

namespace pmelab {

namespace {

double dotn(const Point& a, const Point& b, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += a[i] * b[i];
    return s;
}

double norm1n(const Point& a, int n) {
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += std::abs(a[i]);
    return s;
}

}  // namespace

BoundaryData affine_power_data(double a, const Point& b, double m, int n, double box_radius) {
    double spread = norm1n(b, n) * box_radius;
    if (a - spread <= 0.0) throw std::invalid_argument("affine profile must stay positive on the box");
    return {[a, b, m, n](const Point& x, double) { return std::pow(a + dotn(b, x, n), 1.0 / m); },
            std::pow(a - spread, 1.0 / m), std::pow(a + spread, 1.0 / m), "affine-power"};
}

BoundaryData linear_data(double a, const Point& b, int n, double box_radius) {
    double spread = norm1n(b, n) * box_radius;
    return {[a, b, n](const Point& x, double) { return std::max(a + dotn(b, x, n), 0.0); },
            std::max(a - spread, 0.0), std::max(a + spread, 0.0), "linear"};
}

BoundaryData barenblatt_data(double m, int n, double C, double t_min, double t_shift) {
    double beta = barenblatt_beta(m, n);
    if (!(t_min + t_shift > 0.0)) throw std::invalid_argument("Barenblatt data needs t_min + t_shift > 0");
    double peak = std::pow(t_min + t_shift, -n * beta) * std::pow(C, 1.0 / (m - 1.0));
    return {[m, n, C, t_shift](const Point& x, double t) { return barenblatt(x, t + t_shift, m, n, C); }, 0.0,
            peak, "barenblatt"};
}

BoundaryData spot_data(const Point& center, int n, double radius, double height, double t_begin, double ramp) {
    if (!(radius > 0.0) || height < 0.0) throw std::invalid_argument("spot needs radius > 0 and height >= 0");
    return {[=](const Point& x, double t) {
                double r = distance(x, center, n);
                double shape = std::max(1.0 - r / radius, 0.0);
                double time = ramp > 0.0 ? std::clamp((t - t_begin) / ramp, 0.0, 1.0) : 1.0;
                return height * time * shape;
            },
            0.0, height, "spot"};
}

BoundaryData bump_data(const Point& center, int n, double radius, double height) {
    if (!(radius > 0.0) || height < 0.0) throw std::invalid_argument("bump needs radius > 0 and height >= 0");
    return {[=](const Point& x, double) {
                double r = distance(x, center, n) / radius;
                double s = std::max(1.0 - r * r, 0.0);
                return height * s * s;
            },
            0.0, height, "bump"};
}

BoundaryData smooth_random_data(const SmoothRandomSpec& s) {
    if (s.amplitude < 0.0 || s.base < s.amplitude || s.modes < 1)
        throw std::invalid_argument("smooth random data needs base >= amplitude >= 0 and modes >= 1");
    CounterRng rng(s.seed, s.stream);
    struct Mode {
        Point k;
        double omega, phase, weight;
    };
    std::vector<Mode> modes(static_cast<std::size_t>(s.modes));
    double wsum = 0.0;
    for (auto& md : modes) {
        for (int i = 0; i < 3; ++i) md.k[i] = i < s.n ? rng.next_uniform(-s.max_wavenumber, s.max_wavenumber) : 0.0;
        md.omega = rng.next_uniform(-s.max_wavenumber, s.max_wavenumber);
        md.phase = rng.next_uniform(0.0, 2.0 * M_PI);
        md.weight = rng.next_uniform(0.2, 1.0);
        wsum += md.weight;
    }
    int n = s.n;
    double base = s.base, amp = s.amplitude;
    return {[modes, wsum, base, amp, n](const Point& x, double t) {
                double acc = 0.0;
                for (const auto& md : modes) acc += md.weight * std::cos(dotn(md.k, x, n) + md.omega * t + md.phase);
                return base + amp * acc / wsum;
            },
            base - amp, base + amp, "smooth-random"};
}

BoundaryData sum_data(const BoundaryData& a, const BoundaryData& b) {
    auto fa = a.sampler, fb = b.sampler;
    return {[fa, fb](const Point& x, double t) { return fa(x, t) + fb(x, t); }, a.inf + b.inf, a.sup + b.sup,
            a.label + "+" + b.label};
}

BoundaryData scaled_data(const BoundaryData& a, double s) {
    if (s < 0.0) throw std::invalid_argument("data scale must be nonnegative");
    auto fa = a.sampler;
    return {[fa, s](const Point& x, double t) { return s * fa(x, t); }, s * a.inf, s * a.sup, a.label};
}

}  // namespace pmelab
