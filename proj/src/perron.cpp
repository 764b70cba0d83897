#include "pmelab/perron.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "pmelab/data.hpp"

namespace pmelab {

namespace {

const double kNaN = std::numeric_limits<double>::quiet_NaN();

bool can_coarsen(const SpaceTimeDomain& d) {
    for (std::size_t c = 0; c < d.cylinders().size(); ++c)
        if (d.level_begin(c) % 2 != 0 || d.level_end(c) % 2 != 0) return false;
    return d.time().steps >= 2;
}

double sup_difference(const Field& a, const Field& b) {
    double g = 0.0;
    for (std::size_t s = 0; s < a.values().size(); ++s) g = std::max(g, a.values()[s] - b.values()[s]);
    return g;
}

// sup |fine - coarse| over samples the two grids share (even indices, even levels).
double two_grid_difference(const Field& fine, const Field& coarse) {
    const auto& df = fine.domain();
    const auto& dc = coarse.domain();
    const Grid& gf = df.grid();
    const Grid& gc = dc.grid();
    double worst = 0.0;
    for (int kc = 0; kc < dc.time().levels(); ++kc) {
        int kf = 2 * kc;
        if (kf >= df.time().levels()) break;
        for (std::size_t cc = 0; cc < gc.size(); ++cc) {
            if (!dc.defined(cc, kc)) continue;
            Index3 idx = gc.index(cc);
            for (int a = 0; a < gc.n(); ++a) idx[a] *= 2;
            std::size_t cf = gf.linear(idx);
            if (!df.defined(cf, kf)) continue;
            worst = std::max(worst, std::abs(fine.at(cf, kf) - coarse.at(cc, kc)));
        }
    }
    return worst;
}

struct BallStats {
    double sup = -std::numeric_limits<double>::infinity();
    double inf = std::numeric_limits<double>::infinity();
    std::size_t count = 0;
};

// Statistics over the parabolic cylinder B(x0, r) x [t0 - tau, t0 + tau] with
// tau = max(r^2, dt), so that at least the neighbouring levels are seen.
BallStats ball_stats(const Field& f, const SpaceTimePoint& p, double r) {
    const auto& d = f.domain();
    const Grid& g = d.grid();
    const TimeGrid& tg = d.time();
    BallStats s;
    const double r2 = r * r * (1.0 + 1e-12);
    const double tau = std::max(r * r, tg.dt) * (1.0 + 1e-9);
    int klo = std::max(0, static_cast<int>(std::floor((p.t - tau - tg.t0) / tg.dt)));
    int khi = std::min(tg.levels() - 1, static_cast<int>(std::ceil((p.t + tau - tg.t0) / tg.dt)));
    for (int k = klo; k <= khi; ++k) {
        if (std::abs(tg.time(k) - p.t) > tau) continue;
        for (std::size_t c = 0; c < g.size(); ++c) {
            if (d.kind(c, k) != SampleKind::Interior) continue;
            Point x = g.center(c);
            double d2 = 0.0;
            for (int a = 0; a < g.n(); ++a) d2 += (x[a] - p.x[a]) * (x[a] - p.x[a]);
            if (d2 > r2) continue;
            double v = f.at(c, k);
            s.sup = std::max(s.sup, v);
            s.inf = std::min(s.inf, v);
            ++s.count;
        }
    }
    return s;
}

std::vector<double> usable_radii(const SpaceTimeDomain& d, const ProbeOptions& opt) {
    std::vector<double> r;
    double floor = opt.min_radius_cells * d.grid().h();
    for (double v : opt.radii)
        if (v >= floor * (1.0 - 1e-12)) r.push_back(v);
    for (std::size_t i = 1; i < r.size(); ++i)
        if (!(r[i] < r[i - 1])) throw std::invalid_argument("probe radii must be strictly decreasing");
    if (r.size() < 3) throw std::invalid_argument("probe needs at least three radii above grid scale");
    return r;
}

}  // namespace

bool PerronBracket::gap_nonincreasing() const {
    for (std::size_t i = 1; i < levels.size(); ++i)
        if (levels[i].epsilon < levels[i - 1].epsilon && levels[i].gap > levels[i - 1].gap * (1.0 + 1e-12))
            return false;
    return true;
}

std::vector<double> default_eps_ladder(const BoundaryData& f) {
    double s = f.sup > 0.0 ? f.sup : 1.0;
    return {0.1 * s, 0.05 * s, 0.025 * s};
}

PerronBracket perron_bracket(std::shared_ptr<const SpaceTimeDomain> d, const BoundaryData& f,
                             const std::vector<double>& eps_ladder, const SolverConfig& cfg, bool with_coarse) {
    if (f.inf < 0.0) throw std::invalid_argument("Perron data must be nonnegative");
    MonotoneCheck mc = check_monotone_sections(*d);
    if (!mc.monotone)
        throw GeometryError("Perron bracket needs nondecreasing time sections (violation at t=" +
                            std::to_string(mc.first_violation->time_after) + ")");
    if (eps_ladder.empty()) throw std::invalid_argument("empty epsilon ladder");
    PerronBracket pb;
    std::shared_ptr<const SpaceTimeDomain> dc;
    if (with_coarse && can_coarsen(*d)) {
        dc = std::make_shared<const SpaceTimeDomain>(d->coarsened());
        pb.coarse_run = true;
    }
    double eps_min = *std::min_element(eps_ladder.begin(), eps_ladder.end());
    for (double eps : eps_ladder) {
        if (!(eps > 0.0)) throw std::invalid_argument("epsilon values must be positive");
        BoundaryData up = f.shifted(eps), lo = f.lowered(eps);
        Field u = solve_union(d, up, cfg).field;
        Field l = solve_union(d, lo, cfg).field;
        PerronLevel lv;
        lv.epsilon = eps;
        lv.gap = sup_difference(u, l);
        lv.ordered = sup_difference(l, u) <= 1e-10 * std::max(1.0, u.max());
        lv.gap_coarse = kNaN;
        if (dc) {
            Field uc = solve_union(dc, up, cfg).field;
            Field lc = solve_union(dc, lo, cfg).field;
            lv.gap_coarse = sup_difference(uc, lc);
            if (eps == eps_min) pb.discretization_estimate = two_grid_difference(u, uc);
        }
        pb.levels.push_back(lv);
        pb.upper.push_back(std::move(u));
        pb.lower.push_back(std::move(l));
    }
    return pb;
}

double fit_intercept(const std::vector<double>& r, const std::vector<double>& y) {
    if (r.size() != y.size() || r.size() < 2) throw std::invalid_argument("fit needs matching samples");
    // Radii are decreasing; the three smallest are the last three.
    std::size_t n = std::min<std::size_t>(3, r.size());
    std::size_t off = r.size() - n;
    double sr = 0, sy = 0, srr = 0, sry = 0;
    for (std::size_t i = off; i < r.size(); ++i) {
        sr += r[i];
        sy += y[i];
        srr += r[i] * r[i];
        sry += r[i] * y[i];
    }
    double den = n * srr - sr * sr;
    if (std::abs(den) < 1e-300) return sy / n;
    double b = (n * sry - sr * sy) / den;
    return (sy - b * sr) / n;
}

bool on_parabolic_boundary(const SpaceTimeDomain& d, const SpaceTimePoint& p) {
    const Grid& g = d.grid();
    const TimeGrid& tg = d.time();
    int kc = tg.nearest_level(p.t);
    Index3 lo{0, 0, 0}, hi{0, 0, 0};
    for (int a = 0; a < g.n(); ++a) {
        int i = static_cast<int>(std::lround((p.x[a] - g.origin()[a]) / g.h()));
        lo[a] = std::max(0, i - 1);
        hi[a] = std::min(g.extents()[a] - 1, i + 1);
    }
    double tol = 1.0 + 1e-9;
    for (int k = std::max(0, kc - 1); k <= std::min(tg.levels() - 1, kc + 1); ++k) {
        if (std::abs(tg.time(k) - p.t) > tg.dt * tol) continue;
        for (int z = lo[2]; z <= hi[2]; ++z)
            for (int y = lo[1]; y <= hi[1]; ++y)
                for (int x = lo[0]; x <= hi[0]; ++x) {
                    std::size_t c = g.linear({x, y, z});
                    if (d.kind(c, k) != SampleKind::Boundary) continue;
                    if (distance(g.center(c), p.x, g.n()) <= g.h() * tol) return true;
                }
    }
    return false;
}

std::vector<BoundaryData> default_family(const SpaceTimePoint& xi0, int n, double diam) {
    std::vector<BoundaryData> fam;
    fam.push_back(constant_data(1.0));
    fam.back().label = "constant-1";
    fam.push_back(constant_data(2.0));
    fam.back().label = "constant-2";
    Point b{0.0, 0.0, 0.0};
    b[0] = 0.5 / diam;
    Point x0 = xi0.x;
    BoundaryData lin{[x0, b, n](const Point& x, double) {
                         double s = 1.0;
                         for (int i = 0; i < n; ++i) s += b[i] * (x[i] - x0[i]);
                         return std::max(s, 0.0);
                     },
                     0.5, 1.5, "linear"};
    fam.push_back(lin);
    BoundaryData bump = bump_data(xi0.x, n, 0.5 * diam, 1.0);
    bump.label = "vanishing-away";
    fam.push_back(bump);
    return fam;
}

namespace {

MemberProbe probe_member(const std::shared_ptr<const SpaceTimeDomain>& d,
                         const std::shared_ptr<const SpaceTimeDomain>& dc, const SpaceTimePoint& xi0,
                         const BoundaryData& f, const SolverConfig& cfg, const std::vector<double>& radii,
                         const ProbeOptions& opt) {
    MemberProbe mp;
    mp.label = f.label;
    mp.f_at_point = f(xi0.x, xi0.t);
    if (!(mp.f_at_point > 0.0)) throw std::invalid_argument("probe data must be positive at the point");
    double eps = opt.eps_fraction * (f.sup > 0.0 ? f.sup : mp.f_at_point);
    mp.epsilon = eps;
    BoundaryData up = f.shifted(eps), lo = f.lowered(eps);
    Field u = solve_union(d, up, cfg).field;
    Field l = solve_union(d, lo, cfg).field;
    std::optional<Field> uc, lc;
    if (dc) {
        uc = solve_union(dc, up, cfg).field;
        lc = solve_union(dc, lo, cfg).field;
    }
    std::vector<double> ug, lg;
    double delta = 0.0;
    for (double r : radii) {
        RadiusRow row;
        row.radius = r;
        BallStats su = ball_stats(u, xi0, r), sl = ball_stats(l, xi0, r);
        row.samples = su.count;
        if (su.count == 0) throw std::invalid_argument("no domain samples within the probe radius");
        row.sup_upper = su.sup;
        row.inf_lower = sl.inf;
        row.upper_gap = std::max(0.0, su.sup - (mp.f_at_point + eps));
        row.lower_gap = std::max(0.0, mp.f_at_point - eps - sl.inf);
        row.upper_gap_coarse = row.lower_gap_coarse = kNaN;
        if (dc) {
            BallStats cu = ball_stats(*uc, xi0, r), cl = ball_stats(*lc, xi0, r);
            if (cu.count > 0) {
                row.upper_gap_coarse = std::max(0.0, cu.sup - (mp.f_at_point + eps));
                row.lower_gap_coarse = std::max(0.0, mp.f_at_point - eps - cl.inf);
                delta = std::max({delta, std::abs(row.upper_gap - row.upper_gap_coarse),
                                  std::abs(row.lower_gap - row.lower_gap_coarse)});
            }
        }
        ug.push_back(row.upper_gap);
        lg.push_back(row.lower_gap);
        mp.rows.push_back(row);
    }
    mp.upper_intercept = fit_intercept(radii, ug);
    mp.lower_intercept = fit_intercept(radii, lg);
    mp.discretization_estimate = delta;
    double scale = std::max(1.0, f.sup);
    mp.tolerance = 2.0 * delta + 1e-8 * scale;
    mp.irregular_threshold = std::max(3.0 * mp.tolerance, 0.25 * mp.f_at_point);
    auto status = [&](double icpt) {
        if (icpt <= mp.tolerance) return std::string("ok");
        if (icpt >= mp.irregular_threshold) return std::string("bad");
        return std::string("unclear");
    };
    mp.upper_status = status(mp.upper_intercept);
    mp.lower_status = status(mp.lower_intercept);
    return mp;
}

std::string verdict_of(const std::vector<MemberProbe>& members) {
    bool any_bad = false, all_up = true, all_lo = true;
    for (const auto& m : members) {
        if (m.upper_status == "bad" || m.lower_status == "bad") any_bad = true;
        if (m.upper_status != "ok") all_up = false;
        if (m.lower_status != "ok") all_lo = false;
    }
    if (any_bad) return "irregular evidence";
    if (all_up && all_lo) return "regular evidence";
    if (all_up) return "upper-regular evidence";
    if (all_lo) return "lower-regular evidence";
    return "inconclusive";
}

std::shared_ptr<const SpaceTimeDomain> coarse_of(const std::shared_ptr<const SpaceTimeDomain>& d, bool want) {
    if (!want || !can_coarsen(*d)) return nullptr;
    return std::make_shared<const SpaceTimeDomain>(d->coarsened());
}

}  // namespace

RegularityProbe regularity_probe(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                 const std::vector<BoundaryData>& family, const SolverConfig& cfg,
                                 const ProbeOptions& opt) {
    if (!on_parabolic_boundary(*d, xi0)) throw std::invalid_argument("probe point is not on the parabolic boundary");
    if (family.empty()) throw std::invalid_argument("probe needs a nonempty data family");
    RegularityProbe rp;
    rp.point = xi0;
    rp.approach_radii = usable_radii(*d, opt);
    auto dc = coarse_of(d, opt.with_coarse);
    for (const auto& f : family) rp.members.push_back(probe_member(d, dc, xi0, f, cfg, rp.approach_radii, opt));
    rp.verdict = verdict_of(rp.members);
    return rp;
}

std::string to_string(DichotomyBranch b) {
    switch (b) {
        case DichotomyBranch::Attains: return "attains";
        case DichotomyBranch::DropsToZero: return "drops-to-zero";
        case DichotomyBranch::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

DichotomyReport dichotomy_check(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                const BoundaryData& f, const SolverConfig& cfg, const ProbeOptions& opt) {
    if (!on_parabolic_boundary(*d, xi0)) throw std::invalid_argument("dichotomy point is not on the parabolic boundary");
    DichotomyReport rep;
    rep.f_at_point = f(xi0.x, xi0.t);
    if (!(rep.f_at_point > 0.0)) throw std::invalid_argument("dichotomy requires f > 0 at the point");
    rep.radii = usable_radii(*d, opt);
    double eps = opt.eps_fraction * (f.sup > 0.0 ? f.sup : rep.f_at_point);
    BoundaryData up = f.shifted(eps);
    Field u = solve_union(d, up, cfg).field;
    auto dc = coarse_of(d, opt.with_coarse);
    std::optional<Field> uc;
    if (dc) uc = solve_union(dc, up, cfg).field;
    double delta = 0.0;
    for (double r : rep.radii) {
        BallStats s = ball_stats(u, xi0, r);
        if (s.count == 0) throw std::invalid_argument("no domain samples within the probe radius");
        rep.inf_upper.push_back(s.inf);
        if (uc) {
            BallStats sc = ball_stats(*uc, xi0, r);
            rep.inf_upper_coarse.push_back(sc.count ? sc.inf : kNaN);
            if (sc.count) delta = std::max(delta, std::abs(s.inf - sc.inf));
        }
    }
    rep.discretization_estimate = delta;
    rep.liminf_estimate = std::max(0.0, fit_intercept(rep.radii, rep.inf_upper));
    rep.tolerance = std::max(0.1 * rep.f_at_point, 2.0 * delta);
    bool attains = rep.liminf_estimate >= rep.f_at_point - rep.tolerance;
    bool drops = rep.liminf_estimate <= rep.tolerance;
    if (attains && !drops) {
        rep.branch = DichotomyBranch::Attains;
        rep.margin = rep.liminf_estimate - rep.tolerance;
    } else if (drops && !attains) {
        rep.branch = DichotomyBranch::DropsToZero;
        rep.margin = rep.tolerance - rep.liminf_estimate;
    } else {
        rep.branch = DichotomyBranch::Inconclusive;
        rep.margin = 0.0;
    }
    return rep;
}

FutureProbe future_truncation_probe(std::shared_ptr<const SpaceTimeDomain> d, const SpaceTimePoint& xi0,
                                    const std::vector<BoundaryData>& family, const SolverConfig& cfg,
                                    const ProbeOptions& opt, std::optional<double> truncation) {
    FutureProbe fp;
    fp.truncation_time = truncation.value_or(xi0.t);
    if (fp.truncation_time < xi0.t - 1e-12 * std::max(1.0, std::abs(xi0.t)))
        throw std::invalid_argument("truncation time lies below the probe point");
    fp.full = regularity_probe(d, xi0, family, cfg, opt);
    auto dt = std::make_shared<const SpaceTimeDomain>(d->truncated(fp.truncation_time));
    if (dt->empty() || !on_parabolic_boundary(*dt, xi0)) {
        // The point is not on the boundary of the truncated domain, which
        // makes it regular with respect to the full one.
        fp.truncated.point = xi0;
        fp.truncated.approach_radii = fp.full.approach_radii;
        fp.truncated.earliest_point = true;
        fp.truncated.verdict = "regular evidence";
    } else {
        fp.truncated = regularity_probe(dt, xi0, family, cfg, opt);
    }
    fp.verdicts_agree = fp.full.verdict == fp.truncated.verdict;
    return fp;
}

Field scale_transform(const Field& f, double a, double m) {
    if (!(m > 1.0)) throw std::invalid_argument("scale transform requires m > 1");
    if (!(a > 0.0)) throw std::invalid_argument("scale transform requires a > 0");
    double s = std::pow(a, 1.0 / (m - 1.0));
    std::vector<double> v = f.values();
    for (double& x : v) x *= s;
    return Field(f.domain_ptr(), std::move(v));
}

}  // namespace pmelab
