#include "pmelab/barriers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmelab/rng.hpp"

namespace pmelab {

std::string to_string(BarrierKind k) {
    switch (k) {
        case BarrierKind::SubSeed7: return "SubSeed7";
        case BarrierKind::LowerLog8: return "LowerLog8";
        case BarrierKind::EarliestUpper10: return "EarliestUpper10";
        case BarrierKind::EarliestLower10: return "EarliestLower10";
        case BarrierKind::TorsionUpper12: return "TorsionUpper12";
        case BarrierKind::TorsionLower12: return "TorsionLower12";
    }
    return "unknown";
}

BarrierKind barrier_kind_from_string(const std::string& s) {
    for (auto k : {BarrierKind::SubSeed7, BarrierKind::LowerLog8, BarrierKind::EarliestUpper10,
                   BarrierKind::EarliestLower10, BarrierKind::TorsionUpper12, BarrierKind::TorsionLower12})
        if (to_string(k) == s) return k;
    throw std::invalid_argument("unknown barrier kind '" + s + "'");
}

int claimed_sign(BarrierKind k) {
    switch (k) {
        case BarrierKind::SubSeed7:
        case BarrierKind::EarliestLower10:
        case BarrierKind::TorsionLower12: return -1;
        default: return +1;
    }
}

void BarrierSpec::validate() const {
    if (!(c > 0.0)) throw std::invalid_argument("barrier level c must be positive");
    if (j < 1) throw std::invalid_argument("barrier index j must be >= 1");
    if (!(m >= 1.0)) throw std::invalid_argument("barrier exponent m must be >= 1");
    if (n < 1 || n > 3) throw std::invalid_argument("barrier dimension must be 1, 2 or 3");
    if (!(diam > 0.0)) throw std::invalid_argument("diameter must be positive");
    if (kind == BarrierKind::LowerLog8) {
        if (n < 2) throw std::invalid_argument("LowerLog8 requires n >= 2");
        double a = alpha_eff(), g = gamma_eff();
        if (!(0.0 < a && a < g && g < 1.0 / m))
            throw std::invalid_argument("LowerLog8 requires 0 < alpha < gamma < 1/m");
    }
    if ((kind == BarrierKind::TorsionUpper12 || kind == BarrierKind::TorsionLower12) && !torsion)
        throw std::invalid_argument("torsion barrier needs a torsion field");
}

double BarrierSpec::derived_constant() const {
    switch (kind) {
        case BarrierKind::SubSeed7: return m * std::pow(c, m - 1.0) / diam;
        case BarrierKind::LowerLog8: return 2.0 + std::log(diam);
        case BarrierKind::EarliestUpper10: return 0.0;
        case BarrierKind::EarliestLower10: return 2.0 * n * m * std::pow(c, m - 1.0);
        case BarrierKind::TorsionUpper12: return std::pow(c, m - 1.0) * m / (2.0 * diam);
        case BarrierKind::TorsionLower12: return m / (2.0 * diam);
    }
    return 0.0;
}

namespace {

struct Local {
    double r2;
    double t;
};

Local localize(const BarrierSpec& s, const Point& x, double t) {
    double r2 = 0.0;
    for (int i = 0; i < s.n; ++i) r2 += (x[i] - s.x0[i]) * (x[i] - s.x0[i]);
    return {r2, t - s.t0};
}

double jd(const BarrierSpec& s) { return static_cast<double>(s.j); }

}  // namespace

double evaluate(const BarrierSpec& s, const Point& x, double t) {
    s.validate();
    const double m = s.m, c = s.c, j = jd(s);
    const double cm = std::pow(c, m);
    Local p = localize(s, x, t);
    switch (s.kind) {
        case BarrierKind::SubSeed7: {
            double b = s.derived_constant();
            return std::pow(cm + j * p.r2 + j * b * p.t * p.t, 1.0 / m);
        }
        case BarrierKind::LowerLog8: {
            double g = s.gamma_eff(), a = s.alpha_eff(), d = s.derived_constant();
            double v = std::pow(c, -1.0 / g) + std::pow(j, a) * p.t * p.t;
            if (p.r2 > 0.0) {
                double L = d - 0.5 * std::log(p.r2);
                if (!(L > 0.0)) throw std::invalid_argument("LowerLog8 evaluated outside its defining region");
                v += j / L;
            }
            return std::pow(v, -g);
        }
        case BarrierKind::EarliestUpper10: {
            double base = cm + j * p.r2 + std::pow(j, 2.0 * m - 1.0) * p.t;
            if (base < 0.0) throw std::invalid_argument("EarliestUpper10 evaluated outside its defining region");
            return std::pow(base, 1.0 / m);
        }
        case BarrierKind::EarliestLower10: {
            double a = s.derived_constant();
            double base = cm - j * p.r2 - j * a * p.t;
            return base > 0.0 ? std::pow(base, 1.0 / m) : 0.0;
        }
        case BarrierKind::TorsionUpper12: {
            double a = s.derived_constant();
            double v = s.torsion->at(x);
            return std::pow(cm + j * v + a * j * p.t * p.t, 1.0 / m);
        }
        case BarrierKind::TorsionLower12: {
            double b = s.derived_constant();
            double v = s.torsion->at(x);
            double base = cm - j * v - b * std::pow(j, 1.0 / m) * p.t * p.t;
            return std::pow(std::max(base, 1.0 / j), 1.0 / m);
        }
    }
    return 0.0;
}

// Residuals are dt(w) - Lap(w^m) from the hand-differentiated closed forms.
ResidualValue residual(const BarrierSpec& s, const Point& x, double t) {
    s.validate();
    const double m = s.m, c = s.c, j = jd(s);
    const double n = s.n;
    const double cm = std::pow(c, m);
    Local p = localize(s, x, t);
    ResidualValue r;
    auto finish = [&](double time_term, double lap_term) {
        r.value = time_term - lap_term;
        r.scale = std::abs(time_term) + std::abs(lap_term);
        return r;
    };
    switch (s.kind) {
        case BarrierKind::SubSeed7: {
            double b = s.derived_constant();
            double base = cm + j * p.r2 + j * b * p.t * p.t;
            return finish((2.0 * j * b * p.t / m) * std::pow(base, 1.0 / m - 1.0), 2.0 * j * n);
        }
        case BarrierKind::LowerLog8: {
            if (p.r2 == 0.0) {
                r.excluded = true;
                return r;
            }
            double g = s.gamma_eff(), a = s.alpha_eff(), d = s.derived_constant();
            double rad = std::sqrt(p.r2);
            double L = d - std::log(rad);
            if (!(L > 0.0)) {
                r.excluded = true;
                return r;
            }
            double v = std::pow(c, -1.0 / g) + std::pow(j, a) * p.t * p.t + j / L;
            double vt = 2.0 * std::pow(j, a) * p.t;
            double grad = j / (rad * L * L);
            double lapv = j * ((n - 2.0) * L + 2.0) / (p.r2 * L * L * L);
            double gm = g * m;
            double time_term = -g * std::pow(v, -g - 1.0) * vt;
            double lap_term = -gm * std::pow(v, -gm - 1.0) * lapv + gm * (gm + 1.0) * std::pow(v, -gm - 2.0) * grad * grad;
            return finish(time_term, lap_term);
        }
        case BarrierKind::EarliestUpper10: {
            double jj = std::pow(j, 2.0 * m - 1.0);
            double base = cm + j * p.r2 + jj * p.t;
            if (!(base > 0.0)) {
                r.excluded = true;
                return r;
            }
            return finish((jj / m) * std::pow(base, 1.0 / m - 1.0), 2.0 * j * n);
        }
        case BarrierKind::EarliestLower10: {
            double a = s.derived_constant();
            double base = cm - j * p.r2 - j * a * p.t;
            if (!(base > 0.0)) {
                r.excluded = true;
                return r;
            }
            return finish(-(j * a / m) * std::pow(base, 1.0 / m - 1.0), -2.0 * j * n);
        }
        case BarrierKind::TorsionUpper12: {
            auto cell = s.torsion->domain->grid().nearest(x);
            if (!cell || !s.torsion->domain->is_interior(*cell)) {
                r.excluded = true;
                return r;
            }
            double a = s.derived_constant();
            double v = s.torsion->values[*cell];
            double base = cm + j * v + a * j * p.t * p.t;
            return finish((2.0 * a * j * p.t / m) * std::pow(base, 1.0 / m - 1.0), -j);
        }
        case BarrierKind::TorsionLower12: {
            auto cell = s.torsion->domain->grid().nearest(x);
            if (!cell || !s.torsion->domain->is_interior(*cell)) {
                r.excluded = true;
                return r;
            }
            double b = s.derived_constant();
            double v = s.torsion->values[*cell];
            double bj = b * std::pow(j, 1.0 / m);
            double base = cm - j * v - bj * p.t * p.t;
            if (!(base > 1.0 / j)) {
                r.excluded = true;
                return r;
            }
            return finish(-(2.0 * bj * p.t / m) * std::pow(base, 1.0 / m - 1.0), j);
        }
    }
    return r;
}

SignReport verify_sign(const BarrierSpec& spec, const SpaceTimeDomain& region, const SamplingPolicy& policy) {
    spec.validate();
    const Grid& g = region.grid();
    const TimeGrid& tg = region.time();
    const int sign = claimed_sign(spec.kind);
    SignReport rep;
    rep.claimed_sign = sign;
    rep.tolerance = policy.rel_tol;
    rep.min_residual = std::numeric_limits<double>::infinity();
    rep.max_residual = -std::numeric_limits<double>::infinity();
    const double exclude_r = policy.exclude_cells_near_origin * g.h() * (1.0 + 1e-9);

    auto check = [&](const Point& x, double t) {
        if (spec.kind == BarrierKind::LowerLog8) {
            Local p = localize(spec, x, t);
            if (std::sqrt(p.r2) <= exclude_r) {
                ++rep.samples_excluded;
                return;
            }
        }
        ResidualValue r = residual(spec, x, t);
        if (r.excluded) {
            ++rep.samples_excluded;
            return;
        }
        ++rep.samples_checked;
        rep.min_residual = std::min(rep.min_residual, r.value);
        rep.max_residual = std::max(rep.max_residual, r.value);
        double tol = policy.rel_tol * r.scale;
        if (sign * r.value < -tol) rep.violating_samples.push_back({x, t, r.value});
    };

    CounterRng rng(policy.seed, "verify-sign:" + to_string(spec.kind));
    std::uint64_t counter = 0;
    for (int k = 0; k < tg.levels(); ++k) {
        double t = tg.time(k);
        for (std::size_t c = 0; c < g.size(); ++c) {
            SampleKind kind = region.kind(c, k);
            if (kind == SampleKind::Outside) continue;
            Point x = g.center(c);
            if (policy.include_nodes) check(x, t);
            if (kind != SampleKind::Interior) continue;
            for (int q = 0; q < policy.jitter_per_node; ++q) {
                Point y = x;
                for (int a = 0; a < g.n(); ++a) y[a] += (rng.uniform(counter++) - 0.5) * g.h();
                double s = t + (rng.uniform(counter++) - 0.5) * tg.dt;
                check(y, s);
            }
        }
    }
    if (rep.samples_checked == 0) throw std::invalid_argument("sign verification has an empty sample set");
    return rep;
}

bool min_j_condition(BarrierKind kind, double c, double m, int n, double diam, long j, const MinJOptions& opt) {
    const double jj = static_cast<double>(j);
    if (kind == BarrierKind::EarliestUpper10) {
        if (m <= 1.0) return false;
        double delta = std::max(diam, 1.0);
        // c^m + 2 j^{2m-1} delta^2 <= j^{2m} / (2nm)^{m/(m-1)}, divided by j^{2m-1}.
        double lhs = std::pow(c, m) / std::pow(jj, 2.0 * m - 1.0) + 2.0 * delta * delta;
        double rhs = jj / std::pow(2.0 * n * m, m / (m - 1.0));
        return lhs <= rhs;
    }
    if (kind == BarrierKind::LowerLog8) {
        double a = opt.alpha > 0.0 ? opt.alpha : 1.0 / (4.0 * m);
        double g = opt.gamma > 0.0 ? opt.gamma : 1.0 / (2.0 * m);
        double D = diam;
        double lhs = (1.0 - g * m) * jj / (8.0 * D * D);
        double rhs = 2.0 * std::pow(jj, a + g * (m - 1.0)) *
                     std::pow(std::pow(c, -1.0 / g) + D * D + 1.0, g * (m - 1.0)) * D;
        return lhs >= rhs;
    }
    throw std::invalid_argument("min_valid_j supports EarliestUpper10 and LowerLog8 only");
}

long min_valid_j(BarrierKind kind, double c, double m, int n, double diam, const MinJOptions& opt) {
    if (kind != BarrierKind::EarliestUpper10 && kind != BarrierKind::LowerLog8)
        throw std::invalid_argument("min_valid_j supports EarliestUpper10 and LowerLog8 only");
    if (!(c > 0.0) || !(m >= 1.0) || n < 1 || !(diam > 0.0))
        throw std::invalid_argument("min_valid_j parameters out of range");
    if (kind == BarrierKind::LowerLog8) {
        double a = opt.alpha > 0.0 ? opt.alpha : 1.0 / (4.0 * m);
        double g = opt.gamma > 0.0 ? opt.gamma : 1.0 / (2.0 * m);
        if (!(0.0 < a && a < g && g < 1.0 / m))
            throw std::invalid_argument("LowerLog8 requires 0 < alpha < gamma < 1/m");
    }
    if (kind == BarrierKind::EarliestUpper10 && m <= 1.0)
        throw std::runtime_error("no j <= " + std::to_string(opt.cap) +
                                 " satisfies the condition (m = 1 never does)");
    for (long j = 1; j <= opt.cap; ++j)
        if (min_j_condition(kind, c, m, n, diam, j, opt)) return j;
    throw std::runtime_error("no j <= " + std::to_string(opt.cap) + " satisfies the condition");
}

double barenblatt_beta(double m, int n) { return 1.0 / (n * (m - 1.0) + 2.0); }

double barenblatt(const Point& x, double t, double m, int n, double C) {
    if (!(m > 1.0)) throw std::invalid_argument("Barenblatt profile requires m > 1");
    if (!(t > 0.0)) throw std::invalid_argument("Barenblatt profile requires t > 0");
    double beta = barenblatt_beta(m, n);
    double r2 = 0.0;
    for (int i = 0; i < n; ++i) r2 += x[i] * x[i];
    double core = C - beta * (m - 1.0) / (2.0 * m) * r2 / std::pow(t, 2.0 * beta);
    if (core <= 0.0) return 0.0;
    return std::pow(t, -n * beta) * std::pow(core, 1.0 / (m - 1.0));
}

}  // namespace pmelab
