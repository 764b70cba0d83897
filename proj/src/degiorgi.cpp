#include "pmelab/degiorgi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pmelab {

DeGiorgiConstants constants(double m, int n) {
    if (!(m >= 1.0) || n < 1) throw std::invalid_argument("constants need m >= 1 and n >= 1");
    double alpha = 2.0 / (n + 2.0);
    return {alpha, std::pow(4.0, 1.0 + alpha), 2.0 + (m - 1.0) * n / 2.0};
}

namespace {

// Samples whose space-time cell lies fully inside B(x0, r) x (t0 - tw, t0 + tw).
std::vector<std::size_t> cells_inside(const Field& u, const Point& x0, double t0, double r, double tw,
                                      bool require_defined) {
    const auto& d = u.domain();
    const Grid& g = d.grid();
    const TimeGrid& tg = d.time();
    const double hh = 0.5 * g.h();
    const double ht = 0.5 * tg.dt;
    std::vector<std::size_t> out;
    const double slack = 1e-12 * std::max(r, tw);
    if (require_defined) {
        bool out = t0 - tw < tg.time(0) - ht - slack || t0 + tw > tg.time(tg.steps) + ht + slack;
        for (int a = 0; a < g.n(); ++a) {
            double lo = g.origin()[a] - hh, hi = g.origin()[a] + (g.extents()[a] - 1) * g.h() + hh;
            out = out || x0[a] - r < lo - slack || x0[a] + r > hi + slack;
        }
        if (out) throw std::invalid_argument("cylinder Q leaves the field's grid");
    }
    for (int k = 0; k < tg.levels(); ++k) {
        double t = tg.time(k);
        if (t - ht < t0 - tw - slack || t + ht > t0 + tw + slack) continue;
        for (std::size_t c = 0; c < g.size(); ++c) {
            Point x = g.center(c);
            double far = 0.0;
            for (int a = 0; a < g.n(); ++a) {
                double e = std::abs(x[a] - x0[a]) + hh;
                far += e * e;
            }
            if (far > (r + slack) * (r + slack)) continue;
            if (!d.defined(c, k)) {
                if (require_defined) throw std::invalid_argument("cylinder Q leaves the field's domain");
                continue;
            }
            out.push_back(d.sample_index(c, k));
        }
    }
    return out;
}

void check_params(const CylinderParams& p) {
    if (!(p.sigma > 0.0 && p.sigma < 1.0)) throw std::invalid_argument("sigma must lie in (0, 1)");
    if (!(p.rho > 0.0)) throw std::invalid_argument("rho must be positive");
    if (p.M < 0.0) throw std::invalid_argument("M must be nonnegative");
}

}  // namespace

double cylinder_sup(const Field& u, const CylinderParams& p) {
    auto q = cells_inside(u, p.x0, p.t0, p.rho, p.rho * p.rho, true);
    double s = 0.0;
    for (auto i : q) s = std::max(s, u.values()[i]);
    return s;
}

IterationReport iterate(const Field& u, const CylinderParams& p, double k, double m, const IterateOptions& opt) {
    check_params(p);
    if (!(k > 0.0)) throw std::invalid_argument("k must be positive");
    const auto& d = u.domain();
    const double vol = d.grid().cell_volume() * d.time().dt;
    IterationReport rep;
    rep.params = p;
    rep.k = k;
    rep.m = m;
    rep.n = d.grid().n();
    rep.c = constants(m, rep.n);
    const double rho = p.rho, s = p.sigma;

    // Q_j is visited in the order of Q_0. With w = delta_j^2 computed by the
    // same power-of-two scaling, each A_j term of Y dominates its bound term
    // after rounding, so the comparison below is exact.
    auto q0 = cells_inside(u, p.x0, p.t0, rho, rho * rho, true);
    if (q0.empty()) throw std::invalid_argument("cylinder Q contains no full cell");
    for (auto i : q0) rep.L = std::max(rep.L, u.values()[i]);
    const Grid& g = d.grid();
    const std::size_t N = g.size();
    const double scale = k * k * vol * static_cast<double>(q0.size());

    std::vector<double> Y, A;
    for (int j = 0; j <= opt.j_max; ++j) {
        IterationRow row;
        row.j = j;
        row.k_j = k - k / std::ldexp(1.0, j + 1);
        row.rho_j = s * rho + (1.0 - s) * rho / std::ldexp(1.0, j);
        row.t_plus = s * s * rho * rho + (1.0 - s * s) * rho * rho / std::ldexp(1.0, j);
        const double delta_j = k / std::ldexp(1.0, j + 2);
        const double w = std::ldexp(1.0, -2 * (j + 2)) * k * k;
        const double base = p.M + row.k_j;
        const double hh = 0.5 * g.h(), ht = 0.5 * d.time().dt;
        const double sl = 1e-12 * std::max(row.rho_j, row.t_plus);
        double y = 0.0, bound = 0.0, meas = 0.0;
        for (auto idx : q0) {
            std::size_t c = idx % N;
            int lev = static_cast<int>(idx / N);
            double t = d.time().time(lev);
            if (t - ht < p.t0 - row.t_plus - sl || t + ht > p.t0 + row.t_plus + sl) continue;
            Point x = g.center(c);
            double far = 0.0;
            for (int a = 0; a < g.n(); ++a) {
                double e = std::abs(x[a] - p.x0[a]) + hh;
                far += e * e;
            }
            if (far > (row.rho_j + sl) * (row.rho_j + sl)) continue;
            ++row.cells;
            double dv = u.values()[idx] - base;
            if (dv > 0.0) y += vol * (dv * dv);
            if (dv > delta_j) {
                meas += vol;
                bound += w * vol;
            }
        }
        if (row.cells == 0) {
            rep.truncated = true;
            rep.stop_reason = "Q_j below one cell at j=" + std::to_string(j);
            break;
        }
        row.Y = y;
        row.A_measure = meas;
        row.bound = bound;
        row.est_holds = y >= bound;
        row.ratio = bound > 0.0 ? y / bound : std::numeric_limits<double>::infinity();
        rep.est_all = rep.est_all && row.est_holds;
        rep.rows.push_back(row);
        Y.push_back(y);
        A.push_back(meas);
        if (y < opt.floor * scale) {
            rep.stop_reason = "Y_j below quadrature floor at j=" + std::to_string(j);
            break;
        }
    }
    if (rep.stop_reason.empty()) rep.stop_reason = "j_max reached";

    const double alpha = rep.c.alpha, b = rep.c.b;
    for (std::size_t j = 0; j + 1 < rep.rows.size(); ++j) {
        if (Y[j] <= 0.0) continue;
        double r = Y[j + 1] / (std::pow(b, static_cast<double>(j)) * std::pow(Y[j], 1.0 + alpha));
        rep.rows[j].recursion_ratio = r;
        rep.fitted_A = std::max(rep.fitted_A, r);
    }
    if (rep.fitted_A > 0.0 && !rep.rows.empty()) {
        double y0_max = std::pow(rep.fitted_A, -1.0 / alpha) * std::pow(b, -1.0 / (alpha * alpha));
        rep.smallness_met = Y[0] <= y0_max;
        for (std::size_t j = 0; j < rep.rows.size(); ++j) {
            rep.rows[j].closed_loop_bound = y0_max * std::pow(b, -static_cast<double>(j) / alpha);
            if (rep.smallness_met && Y[j] > rep.rows[j].closed_loop_bound * (1.0 + 1e-9)) rep.closed_loop_holds = false;
        }
    }
    return rep;
}

SupEstimateEntry sup_estimate_check(const Field& u, const CylinderParams& p, double m) {
    check_params(p);
    const auto& d = u.domain();
    SupEstimateEntry e;
    e.M = p.M;
    double lam = constants(m, d.grid().n()).lambda;
    auto inner = cells_inside(u, p.x0, p.t0, p.sigma * p.rho, p.sigma * p.sigma * p.rho * p.rho, true);
    auto outer = cells_inside(u, p.x0, p.t0, p.rho, p.rho * p.rho, true);
    if (inner.empty() || outer.empty()) throw std::invalid_argument("cylinder Q contains no full cell");
    e.lhs = -std::numeric_limits<double>::infinity();
    for (auto i : inner) e.lhs = std::max(e.lhs, u.values()[i] - p.M);
    double acc = 0.0;
    for (auto i : outer) {
        double v = u.values()[i] - p.M;
        if (v > 0.0) acc += v * v;
    }
    // Cell volumes cancel in the mean.
    e.rhs_mean = acc / static_cast<double>(outer.size());
    if (e.lhs <= 0.0) {
        e.C = 0.0;
    } else if (e.rhs_mean <= 0.0) {
        e.flagged = true;
        e.C = std::numeric_limits<double>::infinity();
    } else {
        e.C = e.lhs / std::pow(e.rhs_mean, 1.0 / lam);
    }
    return e;
}

SupEstimateLedger sup_estimate_ledger(const std::vector<const Field*>& fields, const std::vector<std::string>& labels,
                                      const CylinderParams& p, const std::vector<double>& Ms, double m,
                                      double stability_tol) {
    SupEstimateLedger led;
    led.stability_tol = stability_tol;
    led.C_min = std::numeric_limits<double>::infinity();
    led.C_max = 0.0;
    for (std::size_t f = 0; f < fields.size(); ++f)
        for (double M : Ms) {
            CylinderParams q = p;
            q.M = M;
            SupEstimateEntry e = sup_estimate_check(*fields[f], q, m);
            e.field_label = f < labels.size() ? labels[f] : std::to_string(f);
            if (!e.flagged && e.C > 0.0) {
                led.C_min = std::min(led.C_min, e.C);
                led.C_max = std::max(led.C_max, e.C);
            }
            led.entries.push_back(e);
        }
    if (led.C_max > 0.0) {
        led.spread = led.C_max / led.C_min - 1.0;
        led.stable = led.spread <= stability_tol;
    }
    return led;
}

}  // namespace pmelab
