#include "pmelab/capacity.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pmelab/linalg.hpp"

namespace pmelab {

CompactMask::CompactMask(SpatialDomain ambient, std::vector<std::uint8_t> cells)
    : ambient_(std::move(ambient)), cells_(std::move(cells)) {
    const Grid& g = ambient_.grid();
    if (g.n() < 2) throw std::invalid_argument("capacity requires n >= 2");
    if (cells_.size() != g.size()) throw std::invalid_argument("compact mask size does not match grid");
    for (std::size_t c = 0; c < cells_.size(); ++c) {
        if (!cells_[c]) continue;
        cells_[c] = 1;
        ++count_;
        // E dilated by one cell must stay off the ambient boundary.
        bool bad = !ambient_.is_interior(c);
        g.for_each_neighbor(c, [&](std::size_t nb) {
            if (!ambient_.is_interior(nb)) bad = true;
        });
        if (bad) throw std::invalid_argument("compact set is not strictly inside the ambient domain");
    }
}

CapacityResult capacity(const CompactMask& E, const CapacityOptions& opt) {
    const SpatialDomain& V = E.ambient();
    const Grid& g = V.grid();
    const int n = g.n();
    const double h = g.h();
    CapacityResult res;
    if (E.empty()) return res;

    std::vector<std::uint8_t> one(g.size(), 0);
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (!E.cells()[c]) continue;
        one[c] = 1;
        g.for_each_neighbor(c, [&](std::size_t nb) { one[nb] = 1; });
    }
    std::vector<int> pos(g.size(), -1);
    std::vector<std::size_t> free;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (V.is_interior(c) && !one[c]) {
            pos[c] = static_cast<int>(free.size());
            free.push_back(c);
        }
    res.free_nodes = free.size();
    std::vector<int> start{0}, nbr;
    Vec b(free.size(), 0.0);
    for (std::size_t i = 0; i < free.size(); ++i) {
        g.for_each_neighbor(free[i], [&](std::size_t nb) {
            if (pos[nb] >= 0) nbr.push_back(pos[nb]);
            else if (one[nb]) b[i] += 1.0;
        });
        start.push_back(static_cast<int>(nbr.size()));
    }
    const double diag = 2.0 * n + h * h;
    LinearOp A = [&](const Vec& x, Vec& y) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double acc = diag * x[i];
            for (int p = start[i]; p < start[i + 1]; ++p) acc -= x[nbr[p]];
            y[i] = acc;
        }
    };
    Vec x(free.size(), 0.0);
    CgResult cg = conjugate_gradient(A, b, x, opt.tol, opt.max_iter);
    res.iterations = cg.iterations;
    res.relative_residual = cg.relative_residual;
    if (!cg.converged) throw std::runtime_error("capacity CG did not converge");

    std::vector<double> u(g.size(), 0.0);
    for (std::size_t c = 0; c < g.size(); ++c)
        if (one[c]) u[c] = 1.0;
    for (std::size_t i = 0; i < free.size(); ++i) u[free[i]] = x[i];
    double edge = 0.0, mass = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (u[c] == 0.0) {
            // Edges to nonzero neighbours are counted from the nonzero side.
            continue;
        }
        mass += u[c] * u[c];
        g.for_each_neighbor(c, [&](std::size_t nb) {
            double d = u[c] - u[nb];
            // Each edge once: from the larger index, or from c when nb is zero.
            if (u[nb] == 0.0 || nb < c) edge += d * d;
        });
    }
    res.value = std::pow(h, n - 2) * edge + std::pow(h, n) * mass;
    return res;
}

Grid centered_box_grid(const Grid& like, const Point& x0, int half_cells) {
    Point origin{0.0, 0.0, 0.0};
    Index3 ext{1, 1, 1};
    for (int a = 0; a < like.n(); ++a) {
        long i = std::lround((x0[a] - like.origin()[a]) / like.h());
        origin[a] = like.origin()[a] + (i - half_cells) * like.h();
        ext[a] = 2 * half_cells + 1;
    }
    return Grid(like.n(), like.h(), origin, ext);
}

bool on_boundary(const SpatialDomain& U, const Point& x0) {
    const Grid& g = U.grid();
    Index3 idx{0, 0, 0};
    for (int a = 0; a < g.n(); ++a)
        idx[a] = static_cast<int>(std::lround((x0[a] - g.origin()[a]) / g.h()));
    if (!g.in_range(idx)) return false;
    std::size_t c = g.linear(idx);
    if (U.inside(c)) return U.is_boundary(c);
    bool touches = false;
    g.for_each_neighbor(c, [&](std::size_t nb) {
        if (U.inside(nb)) touches = true;
    });
    return touches;
}

bool is_connected(const SpatialDomain& U) {
    if (U.empty()) return false;
    const Grid& g = U.grid();
    std::vector<std::uint8_t> seen(g.size(), 0);
    std::vector<std::size_t> stack;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (U.inside(c)) {
            stack.push_back(c);
            seen[c] = 1;
            break;
        }
    std::size_t reached = 0;
    while (!stack.empty()) {
        std::size_t c = stack.back();
        stack.pop_back();
        ++reached;
        g.for_each_neighbor(c, [&](std::size_t nb) {
            if (U.inside(nb) && !seen[nb]) {
                seen[nb] = 1;
                stack.push_back(nb);
            }
        });
    }
    return reached == U.count();
}

CapacityProfile wiener_profile(const SpatialDomain& U, const Point& x0, const WienerOptions& opt) {
    const Grid& gu = U.grid();
    const int n = gu.n();
    if (n < 2) throw std::invalid_argument("capacity requires n >= 2");
    if (!on_boundary(U, x0)) throw std::invalid_argument("Wiener point is not on the boundary of U");
    const double h = gu.h();
    int kmax_auto = static_cast<int>(std::floor(std::log2(1.0 / (2.0 * h)) + 1e-9));
    int kmax = opt.k_max < 0 ? kmax_auto : opt.k_max;
    if (kmax > kmax_auto) throw std::invalid_argument("k_max too large: the smallest ball must span 4 cells");
    if (opt.k_min < 0 || kmax < opt.k_min) throw std::invalid_argument("empty shell range");

    const double r0 = std::ldexp(1.0, -opt.k_min);
    const double half = 0.5 * opt.box_factor * 2.0 * r0;
    const int M = static_cast<int>(std::ceil(half / h - 1e-9)) + 1;
    Grid gv = centered_box_grid(gu, x0, M);
    SpatialDomain V(gv, std::vector<std::uint8_t>(gv.size(), 1));
    Index3 center_u{0, 0, 0};
    for (int a = 0; a < n; ++a) center_u[a] = static_cast<int>(std::lround((x0[a] - gu.origin()[a]) / h));
    Point xc = gu.center(center_u);

    std::vector<std::uint8_t> exterior(gv.size(), 0);
    for (std::size_t c = 0; c < gv.size(); ++c) {
        Index3 iv = gv.index(c);
        Index3 iu{0, 0, 0};
        for (int a = 0; a < n; ++a) iu[a] = center_u[a] + iv[a] - M;
        exterior[c] = (!gu.in_range(iu) || !U.inside(gu.linear(iu))) ? 1 : 0;
    }

    CapacityProfile p;
    p.x0 = x0;
    p.n = n;
    p.h = h;
    p.box_half_width = M * h;
    {
        std::vector<std::uint8_t> single(gv.size(), 0);
        single[gv.linear({M, n > 1 ? M : 0, n > 2 ? M : 0})] = 1;
        p.cell_floor = capacity(CompactMask(V, std::move(single)), opt.cap).value;
    }
    double sum = 0.0, rsum = 0.0;
    for (int k = opt.k_min; k <= kmax; ++k) {
        double r = std::ldexp(1.0, -k);
        std::vector<std::uint8_t> E(gv.size(), 0);
        std::size_t count = 0;
        for (std::size_t c = 0; c < gv.size(); ++c)
            if (exterior[c] && distance(gv.center(c), xc, n) <= r * (1.0 + 1e-12)) {
                E[c] = 1;
                ++count;
            }
        double cap = capacity(CompactMask(V, std::move(E)), opt.cap).value;
        double w = std::pow(r, n - 2);
        double integrand = cap / w;
        double resolved = std::max(0.0, cap - p.cell_floor) / w;
        sum += integrand * std::log(2.0);
        rsum += resolved * std::log(2.0);
        p.k.push_back(k);
        p.radii.push_back(r);
        p.cap_values.push_back(cap);
        p.integrands.push_back(integrand);
        p.partial_sums.push_back(sum);
        p.resolved_integrands.push_back(resolved);
        p.resolved_partial_sums.push_back(rsum);
        p.complement_cells.push_back(count);
    }
    return p;
}

std::string to_string(Thickness t) {
    switch (t) {
        case Thickness::Thick: return "thick";
        case Thickness::Thin: return "thin";
        case Thickness::Inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

ThicknessReport classify_thickness(const CapacityProfile& p, const ThicknessOptions& opt) {
    const std::size_t K = p.resolved_partial_sums.size();
    if (K < 4) throw std::invalid_argument("thickness classification needs at least four shells");
    ThicknessReport r;
    r.slope_tol = opt.slope_tol;
    r.sum_tol = opt.sum_tol > 0.0 ? opt.sum_tol : 10.0 * p.cell_floor;
    double sk = 0, ss = 0, skk = 0, sks = 0;
    for (std::size_t i = 0; i < K; ++i) {
        double k = static_cast<double>(p.k[i]);
        double s = p.resolved_partial_sums[i];
        sk += k;
        ss += s;
        skk += k * k;
        sks += k * s;
    }
    r.slope = (K * sks - sk * ss) / (K * skk - sk * sk);
    r.total = p.resolved_partial_sums.back();
    const auto& e = p.resolved_integrands;
    r.summands_nonincreasing = true;
    for (std::size_t i = 1; i < K; ++i)
        if (e[i] > e[i - 1] * (1.0 + 1e-9) + 1e-14) r.summands_nonincreasing = false;
    if (r.slope >= r.slope_tol) {
        r.verdict = Thickness::Thick;
        // Slow growth near the threshold cannot separate a slowly diverging
        // series from a convergent one over a few shells.
        r.confidence = r.slope >= 5.0 * r.slope_tol ? "high" : "low";
    } else if (r.total <= r.sum_tol && r.summands_nonincreasing) {
        r.verdict = Thickness::Thin;
        r.confidence = r.total <= 0.1 * r.sum_tol ? "high" : "low";
    } else {
        r.verdict = Thickness::Inconclusive;
        r.confidence = "low";
    }
    return r;
}

TorsionResult torsion_profile(const SpatialDomain& U, const Point& x0, const CapacityOptions& opt) {
    if (!on_boundary(U, x0)) throw std::invalid_argument("torsion point is not on the boundary of U");
    if (!is_connected(U)) throw std::invalid_argument("torsion profile needs a connected domain");
    const Grid& g = U.grid();
    const double h = g.h();
    std::vector<int> pos(g.size(), -1);
    std::vector<std::size_t> unk;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (U.is_interior(c)) {
            pos[c] = static_cast<int>(unk.size());
            unk.push_back(c);
        }
    std::vector<double> v(g.size(), 0.0);
    auto phi = [&](std::size_t c) { return distance(g.center(c), x0, g.n()); };
    for (std::size_t c : U.boundary_cells()) v[c] = phi(c);
    std::vector<int> start{0}, nbr;
    Vec b(unk.size(), h * h);
    for (std::size_t i = 0; i < unk.size(); ++i) {
        g.for_each_neighbor(unk[i], [&](std::size_t nb) {
            if (pos[nb] >= 0) nbr.push_back(pos[nb]);
            else b[i] += v[nb];
        });
        start.push_back(static_cast<int>(nbr.size()));
    }
    const double diag = 2.0 * g.n();
    LinearOp A = [&](const Vec& x, Vec& y) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            double acc = diag * x[i];
            for (int p = start[i]; p < start[i + 1]; ++p) acc -= x[nbr[p]];
            y[i] = acc;
        }
    };
    Vec x(unk.size(), 0.0);
    TorsionResult res;
    if (!unk.empty()) {
        CgResult cg = conjugate_gradient(A, b, x, opt.tol, opt.max_iter);
        if (!cg.converged) throw std::runtime_error("torsion CG did not converge");
        res.iterations = cg.iterations;
    }
    res.min_excess = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < unk.size(); ++i) {
        v[unk[i]] = x[i];
        res.min_excess = std::min(res.min_excess, x[i] - phi(unk[i]));
    }
    if (unk.empty()) res.min_excess = 0.0;
    res.field.domain = std::make_shared<const SpatialDomain>(U);
    res.field.values = std::move(v);
    return res;
}

}  // namespace pmelab
