#include <gtest/gtest.h>

#include <cmath>

#include "pmelab/barriers.hpp"
#include "pmelab/data.hpp"
#include "pmelab/perron.hpp"
#include "pmelab/solver.hpp"

using namespace pmelab;

namespace {

std::shared_ptr<const SpaceTimeDomain> square(int res, int steps, double T = 0.25, double t0 = 0.0) {
    Grid g = Grid::covering(2, 1.0 / res, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    return std::make_shared<const SpaceTimeDomain>(g, TimeGrid{t0, T / steps, steps},
                                                   std::vector<Cylinder>{Cylinder(s, t0, t0 + T)});
}

// Backward-difference residual written out from the stencil.
double stencil_residual(const Field& u, double m, double a, std::size_t c, int k) {
    const auto& d = u.domain();
    const double h = d.grid().h();
    double lap = 0.0;
    double um = std::pow(u.at(c, k), m);
    d.grid().for_each_neighbor(c, [&](std::size_t nb) { lap += std::pow(u.at(nb, k), m) - um; });
    return (u.at(c, k) - u.at(c, k - 1)) / d.time().dt - a * lap / (h * h);
}

}  // namespace

TEST(Solver, ConstantDataGivesConstantSolution) {
    auto d = square(16, 8);
    SolverConfig cfg;
    SolveResult r = solve_union(d, constant_data(0.7), cfg);
    for (int k = 0; k < d->time().levels(); ++k)
        for (std::size_t c = 0; c < d->grid().size(); ++c) EXPECT_NEAR(r.field.at(c, k), 0.7, 1e-12);
}

TEST(Solver, AffinePowerIsStationary) {
    auto d = square(16, 8);
    SolverConfig cfg;
    cfg.m = 3.0;
    BoundaryData f = affine_power_data(1.0, {0.4, -0.3, 0}, cfg.m, 2, 1.0);
    SolveResult r = solve_union(d, f, cfg);
    const Grid& g = d->grid();
    for (int k = 0; k < d->time().levels(); ++k)
        for (std::size_t c = 0; c < g.size(); ++c) {
            Point x = g.center(c);
            EXPECT_NEAR(r.field.at(c, k), std::cbrt(1.0 + 0.4 * x[0] - 0.3 * x[1]), 1e-9);
        }
}

TEST(Solver, ResidualMatchesIndependentStencil) {
    auto d = square(16, 16);
    SolverConfig cfg;
    cfg.coefficient = 0.5;
    SmoothRandomSpec sp;
    sp.seed = 3;
    SolveResult r = solve_union(d, smooth_random_data(sp), cfg);
    for (int k = 1; k < d->time().levels(); ++k)
        for (std::size_t c = 0; c < d->grid().size(); ++c) {
            if (d->kind(c, k) != SampleKind::Interior) continue;
            double mine = stencil_residual(r.field, cfg.m, cfg.coefficient, c, k);
            double lib = discrete_residual(r.field, cfg.m, cfg.coefficient, c, k);
            double scale = residual_scale(r.field, cfg.m, cfg.coefficient, c, k);
            EXPECT_NEAR(mine, lib, 1e-12 * std::max(1.0, scale));
            EXPECT_LE(std::abs(mine), 1e-9 * std::max(1.0, scale));
        }
}

TEST(Solver, OrderedDataOrderedSolutions) {
    auto d = square(16, 16);
    SolverConfig cfg;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SmoothRandomSpec f;
        f.seed = seed;
        SmoothRandomSpec off = f;
        off.stream = "offset";
        off.base = 0.2;
        off.amplitude = 0.1;
        BoundaryData fd = smooth_random_data(f);
        BoundaryData gd = sum_data(fd, smooth_random_data(off));
        Field u = solve_union(d, gd, cfg).field;
        Field v = solve_union(d, fd, cfg).field;
        ComparisonReport rep = comparison_check(u, v, ComparisonMode::Parabolic);
        EXPECT_TRUE(rep.ordered);
        EXPECT_GT(rep.min_margin, 0.0);
        for (std::size_t i = 0; i < u.values().size(); ++i) EXPECT_LE(v.values()[i], u.values()[i] + 1e-12);
    }
}

TEST(Solver, ExplicitAgreesWithImplicitForSmallSteps) {
    auto d = square(8, 64, 0.05);
    SolverConfig imp, exp;
    exp.scheme = Scheme::Explicit;
    SmoothRandomSpec sp;
    sp.seed = 9;
    BoundaryData f = smooth_random_data(sp);
    Field a = solve_union(d, f, imp).field;
    Field b = solve_union(d, f, exp).field;
    double worst = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) worst = std::max(worst, std::abs(a.values()[i] - b.values()[i]));
    EXPECT_LT(worst, 2e-2);
}

TEST(Solver, ExplicitRejectsSupraCflStep) {
    auto d = square(32, 2);
    SolverConfig cfg;
    cfg.scheme = Scheme::Explicit;
    cfg.dt = 0.125;
    EXPECT_THROW(solve_union(d, constant_data(1.0), cfg), SolverError);
}

TEST(Solver, CflBound) {
    CflBound b = cfl_max_dt(2.0, 0.1, 2.0, 2);
    // 2n dt a m L^(m-1) / h^2 <= 1
    EXPECT_NEAR(b.dt, 0.01 / (4.0 * 2.0 * 2.0), 1e-15);
    EXPECT_TRUE(cfl_max_dt(0.0, 0.1, 2.0, 2).unconstrained);
}

TEST(Solver, ValidateRejectsBadConfig) {
    SolverConfig c;
    c.m = 0.5;
    EXPECT_THROW(validate(c), std::exception);
    c = SolverConfig{};
    c.coefficient = 0.0;
    EXPECT_THROW(validate(c), std::exception);
}

TEST(Solver, BarenblattErrorShrinksUnderRefinement) {
    const double t0 = 1.0 / 256, T = 0.036, C = 0.0625;
    double prev = 1e9;
    for (int res : {16, 32}) {
        auto d = square(res, res * 2, T, t0);
        SolveResult r = solve_union(d, barenblatt_data(2.0, 2, C, t0), SolverConfig{});
        double e = l1_error(r.field, [=](const Point& x, double t) { return barenblatt(x, t, 2.0, 2, C); },
                            d->time().steps);
        EXPECT_LT(e, prev);
        prev = e;
    }
}

TEST(Solver, ScaledSchemeBecomesUnitScheme) {
    auto d = square(16, 8);
    SmoothRandomSpec sp;
    sp.seed = 4;
    for (double a : {0.25, 4.0}) {
        SolverConfig cfg;
        cfg.coefficient = a;
        Field u = solve_union(d, smooth_random_data(sp), cfg).field;
        Field v = scale_transform(u, a, cfg.m);
        for (int k = 1; k < d->time().levels(); ++k)
            for (std::size_t c = 0; c < d->grid().size(); ++c) {
                if (d->kind(c, k) != SampleKind::Interior) continue;
                EXPECT_NEAR(v.at(c, k), a * u.at(c, k), 1e-15 * a);
                EXPECT_LE(std::abs(stencil_residual(v, cfg.m, 1.0, c, k)), 1e-10 * std::max(1.0, v.max()));
            }
    }
}

TEST(Solver, UnionJunctionTakesBoundaryData) {
    Grid g = Grid::covering(2, 1.0 / 16, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto small = make_box(g, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
    auto big = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto d = std::make_shared<const SpaceTimeDomain>(
        g, TimeGrid{0.0, 1.0 / 32, 16}, std::vector<Cylinder>{Cylinder(small, 0.0, 0.25), Cylinder(big, 0.25, 0.5)});
    BoundaryData f = linear_data(1.0, {0.5, 0.25, 0}, 2, 1.0);
    Field u = solve_union(d, f, SolverConfig{}).field;
    for (int k = 0; k < d->time().levels(); ++k)
        for (std::size_t c = 0; c < g.size(); ++c)
            if (d->kind(c, k) == SampleKind::Boundary) EXPECT_DOUBLE_EQ(u.at(c, k), f(g.center(c), d->time().time(k)));
}
