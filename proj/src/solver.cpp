#include "pmelab/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pmelab/linalg.hpp"

namespace pmelab {

Field::Field(std::shared_ptr<const SpaceTimeDomain> domain, std::vector<double> values)
    : domain_(std::move(domain)), values_(std::move(values)) {
    if (!domain_) throw std::invalid_argument("field without a domain");
    if (values_.size() != domain_->sample_count())
        throw std::invalid_argument("field value count does not match its domain");
}

double Field::max() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, v);
    return m;
}

BoundaryData BoundaryData::shifted(double eps) const {
    auto f = sampler;
    return {[f, eps](const Point& x, double t) { return f(x, t) + eps; }, inf + eps, sup + eps,
            label + "+eps"};
}

BoundaryData BoundaryData::lowered(double eps) const {
    auto f = sampler;
    return {[f, eps](const Point& x, double t) { return std::max(f(x, t) - eps, 0.0); },
            std::max(inf - eps, 0.0), std::max(sup - eps, 0.0), label + "-eps"};
}

BoundaryData constant_data(double c) {
    if (c < 0.0) throw std::invalid_argument("boundary data must be nonnegative");
    return {[c](const Point&, double) { return c; }, c, c, "constant"};
}

void validate(const SolverConfig& cfg) {
    if (!(cfg.m >= 1.0)) throw std::invalid_argument("exponent m must be >= 1");
    if (!(cfg.coefficient > 0.0)) throw std::invalid_argument("diffusion coefficient must be positive");
    if (!(cfg.newton_tol > 0.0) || !(cfg.linear_tol > 0.0))
        throw std::invalid_argument("solver tolerances must be positive");
    if (cfg.newton_max < 1 || cfg.linear_max < 1)
        throw std::invalid_argument("iteration caps must be positive");
    if (cfg.dt < 0.0) throw std::invalid_argument("dt must be positive or 0 for automatic");
}

CflBound cfl_max_dt(double L, double h, double m, int n, double coefficient) {
    if (L < 0.0 || !(h > 0.0)) throw std::invalid_argument("cfl bound needs L >= 0 and h > 0");
    CflBound b;
    if (m > 1.0 && L == 0.0) {
        b.unconstrained = true;
        b.dt = std::numeric_limits<double>::infinity();
        return b;
    }
    b.dt = h * h / (2.0 * n * m * coefficient * std::pow(L, m - 1.0));
    return b;
}

namespace {

struct Power {
    double m;
    double operator()(double u) const {
        if (m == 1.0) return u;
        if (m == 2.0) return u * u;
        return std::pow(u, m);
    }
};

// Unknowns of one time level and their stencil connectivity.
struct LevelSystem {
    std::vector<std::size_t> cells;
    std::vector<int> nb_start;    // CSR into nb_unknown
    std::vector<int> nb_unknown;  // unknown neighbour indices
    std::vector<int> kn_start;    // CSR into kn_cell
    std::vector<std::size_t> kn_cell;  // known neighbour cells
};

LevelSystem build_level(const SpaceTimeDomain& d, int k, std::vector<int>& pos) {
    const Grid& g = d.grid();
    LevelSystem s;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (d.kind(c, k) == SampleKind::Interior) s.cells.push_back(c);
    std::fill(pos.begin(), pos.end(), -1);
    for (std::size_t i = 0; i < s.cells.size(); ++i) pos[s.cells[i]] = static_cast<int>(i);
    s.nb_start.push_back(0);
    s.kn_start.push_back(0);
    for (std::size_t c : s.cells) {
        int missing = g.for_each_neighbor(c, [&](std::size_t nb) {
            if (pos[nb] >= 0) {
                s.nb_unknown.push_back(pos[nb]);
            } else {
                if (!d.defined(nb, k))
                    throw SolverError("interior sample has an undefined neighbour");
                s.kn_cell.push_back(nb);
            }
        });
        if (missing > 0) throw SolverError("interior sample touches the grid edge");
        s.nb_start.push_back(static_cast<int>(s.nb_unknown.size()));
        s.kn_start.push_back(static_cast<int>(s.kn_cell.size()));
    }
    return s;
}

class Marcher {
public:
    Marcher(std::shared_ptr<const SpaceTimeDomain> d, const BoundaryData& data, const SolverConfig& cfg)
        : d_(std::move(d)), data_(data), cfg_(cfg), pw_{cfg.m} {}

    SolveResult run() {
        const SpaceTimeDomain& d = *d_;
        const Grid& g = d.grid();
        const TimeGrid& tg = d.time();
        const std::size_t N = g.size();
        values_.assign(d.sample_count(), 0.0);
        twon_ = 2.0 * g.n();
        inv_h2_ = 1.0 / (g.h() * g.h());

        double level_dt = tg.dt;
        int sub = 1;
        if (cfg_.scheme == Scheme::Explicit) {
            CflBound cfl = cfl_max_dt(std::max(data_.sup, 0.0), g.h(), cfg_.m, g.n(), cfg_.coefficient);
            stats_.cfl_unconstrained = cfl.unconstrained;
            stats_.cfl_dt = cfl.unconstrained ? 0.0 : cfl.dt;
            if (cfg_.dt > 0.0) {
                if (!cfl.unconstrained && cfg_.dt > cfl.dt * (1.0 + 1e-12))
                    throw SolverError("explicit dt " + std::to_string(cfg_.dt) + " exceeds the CFL bound " +
                                      std::to_string(cfl.dt));
                sub = substeps_for(level_dt, cfg_.dt);
            } else {
                sub = cfl.unconstrained ? 1 : static_cast<int>(std::ceil(level_dt / cfl.dt - 1e-12));
                sub = std::max(sub, 1);
            }
        } else if (cfg_.dt > 0.0) {
            sub = substeps_for(level_dt, cfg_.dt);
        }
        stats_.substeps_per_level = sub;
        dt_ = level_dt / sub;

        for (int k = 0; k < tg.levels(); ++k)
            for (std::size_t c = 0; c < N; ++c)
                if (d.kind(c, k) == SampleKind::Boundary) {
                    double v = data_(g.center(c), tg.time(k));
                    if (!(v >= 0.0) || !std::isfinite(v))
                        throw std::invalid_argument("boundary data must be finite and nonnegative");
                    values_[d.sample_index(c, k)] = v;
                }

        std::vector<int> pos(N, -1);
        LevelSystem sys;
        for (int k = 1; k < tg.levels(); ++k) {
            bool rebuild = sys.cells.empty();
            if (!rebuild) {
                for (std::size_t c : sys.cells)
                    if (d.kind(c, k) != SampleKind::Interior) { rebuild = true; break; }
                if (!rebuild) {
                    std::size_t cnt = 0;
                    for (std::size_t c = 0; c < N; ++c)
                        if (d.kind(c, k) == SampleKind::Interior) ++cnt;
                    rebuild = cnt != sys.cells.size();
                }
            }
            if (rebuild) sys = build_level(d, k, pos);
            if (sys.cells.empty()) continue;
            step_level(sys, k, sub);
            ++stats_.levels_solved;
        }
        return {Field(d_, std::move(values_)), stats_};
    }

private:
    static int substeps_for(double level_dt, double dt) {
        double s = level_dt / dt;
        long r = std::lround(s);
        if (r < 1 || std::abs(s - static_cast<double>(r)) > 1e-9 * s)
            throw std::invalid_argument("dt must divide the level spacing of the time grid");
        return static_cast<int>(r);
    }

    // Known-neighbour sums of u^m at time t; boundary neighbours are sampled
    // afresh at substep times, others come from the stored level.
    void known_sums(const LevelSystem& s, int k, double t, bool at_level, Vec& out) {
        const SpaceTimeDomain& d = *d_;
        const Grid& g = d.grid();
        out.assign(s.cells.size(), 0.0);
        for (std::size_t i = 0; i < s.cells.size(); ++i) {
            double acc = 0.0;
            for (int q = s.kn_start[i]; q < s.kn_start[i + 1]; ++q) {
                std::size_t nb = s.kn_cell[q];
                double v = at_level ? values_[d.sample_index(nb, k)] : data_(g.center(nb), t);
                acc += pw_(v);
            }
            out[i] = acc;
        }
    }

    void step_level(const LevelSystem& s, int k, int sub) {
        const SpaceTimeDomain& d = *d_;
        const TimeGrid& tg = d.time();
        const std::size_t nu = s.cells.size();
        Vec u(nu);
        for (std::size_t i = 0; i < nu; ++i) {
            std::size_t c = s.cells[i];
            if (!d.defined(c, k - 1)) throw SolverError("interior sample without a previous time level");
            u[i] = values_[d.sample_index(c, k - 1)];
        }
        Vec known;
        if (cfg_.scheme == Scheme::Explicit) {
            // Known neighbours at the start of each substep: the previous
            // level's stored values for the first substep, data afterwards.
            Vec w(nu), next(nu);
            for (int q = 0; q < sub; ++q) {
                double t_start = tg.time(k - 1) + q * dt_;
                if (q == 0) known_sums_prev(s, k, known);
                else known_sums(s, k, t_start, false, known);
                for (std::size_t i = 0; i < nu; ++i) w[i] = pw_(u[i]);
                double cc = dt_ * cfg_.coefficient * inv_h2_;
                for (std::size_t i = 0; i < nu; ++i) {
                    double lap = known[i] - twon_ * w[i];
                    for (int p = s.nb_start[i]; p < s.nb_start[i + 1]; ++p) lap += w[s.nb_unknown[p]];
                    next[i] = std::max(u[i] + cc * lap, 0.0);
                }
                u.swap(next);
            }
        } else {
            for (int q = 0; q < sub; ++q) {
                double t_end = tg.time(k - 1) + (q + 1) * dt_;
                if (q + 1 == sub) known_sums(s, k, t_end, true, known);
                else known_sums(s, k, t_end, false, known);
                newton(s, u, known);
            }
        }
        for (std::size_t i = 0; i < nu; ++i) values_[d.sample_index(s.cells[i], k)] = u[i];
    }

    void known_sums_prev(const LevelSystem& s, int k, Vec& out) {
        const SpaceTimeDomain& d = *d_;
        out.assign(s.cells.size(), 0.0);
        for (std::size_t i = 0; i < s.cells.size(); ++i) {
            double acc = 0.0;
            for (int q = s.kn_start[i]; q < s.kn_start[i + 1]; ++q) {
                std::size_t nb = s.kn_cell[q];
                if (!d.defined(nb, k - 1)) throw SolverError("explicit stencil reaches an undefined sample");
                acc += pw_(values_[d.sample_index(nb, k - 1)]);
            }
            out[i] = acc;
        }
        // Unknown neighbours that were boundary samples at k-1 are already
        // carried in u through the previous level values.
    }

    void residual(const LevelSystem& s, const Vec& u, const Vec& uprev, const Vec& known, double cc,
                  Vec& w, Vec& F) {
        const std::size_t nu = u.size();
        for (std::size_t i = 0; i < nu; ++i) w[i] = pw_(u[i]);
        for (std::size_t i = 0; i < nu; ++i) {
            double lap = known[i] - twon_ * w[i];
            for (int p = s.nb_start[i]; p < s.nb_start[i + 1]; ++p) lap += w[s.nb_unknown[p]];
            F[i] = u[i] - cc * lap - uprev[i];
        }
    }

    void newton(const LevelSystem& s, Vec& u, const Vec& known) {
        const std::size_t nu = u.size();
        const double cc = dt_ * cfg_.coefficient * inv_h2_;
        Vec uprev = u;
        double scale = norm_inf(uprev);
        for (double kn : known) scale = std::max(scale, std::pow(kn / twon_, 1.0 / cfg_.m));
        if (scale == 0.0) scale = std::numeric_limits<double>::min();
        Vec w(nu), F(nu), dinv(nu), y(nu), rhs(nu), trial(nu), Ft(nu), pre(nu);
        residual(s, u, uprev, known, cc, w, F);
        double fnorm = norm_inf(F);
        int it = 0;
        const double m = cfg_.m;
        LinearOp S = [&](const Vec& x, Vec& out) {
            for (std::size_t i = 0; i < nu; ++i) {
                double acc = (dinv[i] + cc * twon_) * x[i];
                for (int p = s.nb_start[i]; p < s.nb_start[i + 1]; ++p) acc -= cc * x[s.nb_unknown[p]];
                out[i] = acc;
            }
        };
        while (fnorm > cfg_.newton_tol * scale) {
            if (it >= cfg_.newton_max)
                throw SolverError("Newton did not converge within " + std::to_string(cfg_.newton_max) +
                                      " iterations; worst residual " + std::to_string(fnorm),
                                  fnorm);
            for (std::size_t i = 0; i < nu; ++i) {
                double dd = m == 1.0 ? 1.0 : m * std::pow(std::max(u[i], cfg_.degenerate_floor), m - 1.0);
                dinv[i] = 1.0 / dd;
                pre[i] = 1.0 / (dinv[i] + cc * twon_);
                rhs[i] = -F[i];
            }
            std::fill(y.begin(), y.end(), 0.0);
            CgResult cg = conjugate_gradient(S, rhs, y, cfg_.linear_tol, cfg_.linear_max, pre);
            stats_.cg_iterations += cg.iterations;
            if (!cg.converged && cg.relative_residual > 1e-3)
                throw SolverError("inner linear solve failed to converge", fnorm);
            double lambda = 1.0;
            double fnew = fnorm;
            for (int ls = 0; ls < 30; ++ls) {
                for (std::size_t i = 0; i < nu; ++i) trial[i] = std::max(u[i] + lambda * y[i] * dinv[i], 0.0);
                residual(s, trial, uprev, known, cc, w, Ft);
                fnew = norm_inf(Ft);
                if (fnew <= (1.0 - 1e-4 * lambda) * fnorm) break;
                lambda *= 0.5;
            }
            u.swap(trial);
            F.swap(Ft);
            fnorm = fnew;
            ++it;
        }
        stats_.newton_iterations += it;
        stats_.max_newton_per_step = std::max(stats_.max_newton_per_step, it);
        stats_.max_final_residual = std::max(stats_.max_final_residual, fnorm / scale);
    }

    std::shared_ptr<const SpaceTimeDomain> d_;
    const BoundaryData& data_;
    SolverConfig cfg_;
    Power pw_;
    std::vector<double> values_;
    SolveStats stats_;
    double dt_ = 0.0, twon_ = 0.0, inv_h2_ = 0.0;
};

}  // namespace

SolveResult solve_union(std::shared_ptr<const SpaceTimeDomain> d, const BoundaryData& data,
                        const SolverConfig& cfg) {
    validate(cfg);
    if (!d) throw std::invalid_argument("solve on a null domain");
    if (!data.sampler) throw std::invalid_argument("boundary data has no sampler");
    if (data.inf < 0.0 || data.sup < data.inf)
        throw std::invalid_argument("boundary data bounds must satisfy 0 <= inf <= sup");
    MonotoneCheck mc = check_monotone_sections(*d);
    if (!mc.monotone) {
        const auto& v = *mc.first_violation;
        throw GeometryError("time sections are not nondecreasing: section at t=" +
                            std::to_string(v.time_before) + " is not contained in the section at t=" +
                            std::to_string(v.time_after));
    }
    return Marcher(std::move(d), data, cfg).run();
}

SolveResult solve_union(const SpaceTimeDomain& d, const BoundaryData& data, const SolverConfig& cfg) {
    return solve_union(std::make_shared<const SpaceTimeDomain>(d), data, cfg);
}

SolveResult solve_cylinder(const Cylinder& cyl, const TimeGrid& time, const BoundaryData& data,
                           const SolverConfig& cfg) {
    auto d = std::make_shared<const SpaceTimeDomain>(cyl.base().grid(), time, std::vector<Cylinder>{cyl});
    return solve_union(std::move(d), data, cfg);
}

Field sample_field(std::shared_ptr<const SpaceTimeDomain> d,
                   const std::function<double(const Point&, double)>& f) {
    const Grid& g = d->grid();
    std::vector<double> v(d->sample_count(), 0.0);
    for (int k = 0; k < d->time().levels(); ++k)
        for (std::size_t c = 0; c < g.size(); ++c)
            if (d->defined(c, k)) v[d->sample_index(c, k)] = f(g.center(c), d->time().time(k));
    return Field(std::move(d), std::move(v));
}

namespace {

void require_interior(const Field& f, std::size_t cell, int level) {
    const auto& d = f.domain();
    if (level < 1 || level >= d.time().levels() || cell >= d.grid().size() ||
        d.kind(cell, level) != SampleKind::Interior)
        throw std::invalid_argument("residual requested at a non-interior sample");
}

}  // namespace

double discrete_residual(const Field& f, double m, double coefficient, std::size_t cell, int level) {
    require_interior(f, cell, level);
    const auto& d = f.domain();
    const Grid& g = d.grid();
    Power pw{m};
    double lap = -2.0 * g.n() * pw(f.at(cell, level));
    g.for_each_neighbor(cell, [&](std::size_t nb) { lap += pw(f.at(nb, level)); });
    double dt = d.time().dt;
    return (f.at(cell, level) - f.at(cell, level - 1)) / dt - coefficient * lap / (g.h() * g.h());
}

double residual_scale(const Field& f, double m, double coefficient, std::size_t cell, int level) {
    require_interior(f, cell, level);
    const auto& d = f.domain();
    const Grid& g = d.grid();
    Power pw{m};
    double acc = 2.0 * g.n() * pw(f.at(cell, level));
    g.for_each_neighbor(cell, [&](std::size_t nb) { acc += pw(f.at(nb, level)); });
    double dt = d.time().dt;
    return (f.at(cell, level) + f.at(cell, level - 1)) / dt + coefficient * acc / (g.h() * g.h());
}

ComparisonReport comparison_check(const Field& u, const Field& v, ComparisonMode mode, double tol) {
    const auto& du = u.domain();
    const auto& dv = v.domain();
    if (u.domain_ptr() != v.domain_ptr()) {
        bool same = du.grid().same_as(dv.grid()) && du.time().levels() == dv.time().levels() &&
                    std::abs(du.time().dt - dv.time().dt) <= 1e-12 * du.time().dt;
        if (same)
            for (std::size_t s = 0; s < du.sample_count() && same; ++s)
                same = du.kind(s % du.grid().size(), static_cast<int>(s / du.grid().size())) ==
                       dv.kind(s % dv.grid().size(), static_cast<int>(s / dv.grid().size()));
        if (!same) throw std::invalid_argument("comparison of fields on different domains");
    }
    const Grid& g = du.grid();
    const int K = du.time().levels();
    double scale = std::max({1.0, u.max(), v.max()});
    double atol = tol * scale;
    auto is_top = [&](std::size_t c, int k) {
        return k + 1 >= K || du.kind(c, k + 1) != SampleKind::Interior;
    };
    ComparisonReport r;
    r.min_margin = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) {
        for (std::size_t c = 0; c < g.size(); ++c) {
            SampleKind sk = du.kind(c, k);
            if (sk == SampleKind::Outside) continue;
            bool boundary = sk == SampleKind::Boundary ||
                            (mode == ComparisonMode::Elliptic && is_top(c, k));
            double diff = v.at(c, k) - u.at(c, k);
            if (boundary) {
                if (diff > atol)
                    throw std::invalid_argument("comparison precondition fails: v > u on a boundary sample");
                continue;
            }
            ++r.samples_checked;
            r.min_margin = std::min(r.min_margin, -diff);
            if (diff > atol) {
                r.ordered = false;
                r.violations.push_back({c, k, diff});
            }
        }
    }
    if (r.samples_checked == 0) r.min_margin = 0.0;
    return r;
}

double l1_error(const Field& f, const std::function<double(const Point&, double)>& exact, int level) {
    const auto& d = f.domain();
    const Grid& g = d.grid();
    double t = d.time().time(level);
    double acc = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (d.defined(c, level)) acc += std::abs(f.at(c, level) - exact(g.center(c), t));
    return acc * g.cell_volume();
}

}  // namespace pmelab
