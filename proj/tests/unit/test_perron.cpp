#include <gtest/gtest.h>

#include "pmelab/data.hpp"
#include "pmelab/perron.hpp"

using namespace pmelab;

namespace {

std::shared_ptr<const SpaceTimeDomain> square(int res, int steps) {
    Grid g = Grid::covering(2, 1.0 / res, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    return std::make_shared<const SpaceTimeDomain>(g, TimeGrid{0.0, 0.25 / steps, steps},
                                                   std::vector<Cylinder>{Cylinder(s, 0.0, 0.25)});
}

}  // namespace

TEST(Perron, InterceptOfExactLine) {
    EXPECT_NEAR(fit_intercept({0.4, 0.2, 0.1, 0.05}, {9.0, 0.7, 0.45, 0.325}), 0.2, 1e-14);
    EXPECT_NEAR(fit_intercept({0.2, 0.1}, {1.0, 0.6}), 0.2, 1e-14);
    EXPECT_THROW(fit_intercept({0.2}, {1.0}), std::exception);
}

TEST(Perron, BracketIsOrderedAndCloses) {
    auto d = square(16, 16);
    SmoothRandomSpec sp;
    sp.seed = 21;
    BoundaryData f = smooth_random_data(sp);
    PerronBracket b = perron_bracket(d, f, default_eps_ladder(f), SolverConfig{}, true);
    ASSERT_EQ(b.levels.size(), 3u);
    EXPECT_NEAR(b.levels[0].epsilon, 0.1 * f.sup, 1e-15);
    for (std::size_t i = 0; i < b.levels.size(); ++i) {
        EXPECT_TRUE(b.levels[i].ordered);
        for (std::size_t s = 0; s < b.lower[i].values().size(); ++s)
            EXPECT_LE(b.lower[i].values()[s], b.upper[i].values()[s] + 1e-12);
        EXPECT_GE(b.levels[i].gap, 2.0 * b.levels[i].epsilon - 1e-12);
    }
    EXPECT_TRUE(b.gap_nonincreasing());
    EXPECT_TRUE(b.coarse_run);
    EXPECT_GT(b.discretization_estimate, 0.0);
}

TEST(Perron, ConstantDataBracketGapIsTwoEpsilon) {
    auto d = square(8, 8);
    PerronBracket b = perron_bracket(d, constant_data(1.0), {0.2, 0.1}, SolverConfig{}, false);
    for (const auto& l : b.levels) EXPECT_NEAR(l.gap, 2.0 * l.epsilon, 1e-10);
}

TEST(Perron, ParabolicBoundaryMembership) {
    auto d = square(16, 16);
    EXPECT_TRUE(on_parabolic_boundary(*d, {{0.5, 0, 0}, 0.125}));
    EXPECT_TRUE(on_parabolic_boundary(*d, {{0, 0, 0}, 0.0}));
    EXPECT_FALSE(on_parabolic_boundary(*d, {{0, 0, 0}, 0.125}));
    EXPECT_FALSE(on_parabolic_boundary(*d, {{0, 0, 0}, 0.25}));
}

TEST(Perron, ProbeRejectsInteriorPoint) {
    auto d = square(16, 16);
    EXPECT_THROW(regularity_probe(d, {{0, 0, 0}, 0.125}, {constant_data(1.0)}, SolverConfig{}), std::exception);
}

TEST(Perron, DefaultFamily) {
    auto f = default_family({{0.5, 0, 0}, 0.1}, 2, 2.0);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0]({0, 0, 0}, 0), 1.0);
    EXPECT_EQ(f[1]({0, 0, 0}, 0), 2.0);
    EXPECT_DOUBLE_EQ(f[2]({0.5, 0, 0}, 0), 1.0);
    EXPECT_DOUBLE_EQ(f[2]({1.5, 0, 0}, 0), 1.25);
    EXPECT_DOUBLE_EQ(f[3]({0.5, 0, 0}, 0), 1.0);
    EXPECT_EQ(f[3]({-0.6, 0, 0}, 0), 0.0);
}

TEST(Perron, ConstantDataIsAttainedOnSquare) {
    auto d = square(32, 32);
    ProbeOptions o;
    o.with_coarse = false;
    o.radii = {0.25, 0.125, 0.0625};
    RegularityProbe p = regularity_probe(d, {{0.5, 0, 0}, 0.125}, {constant_data(1.0)}, SolverConfig{}, o);
    ASSERT_EQ(p.members.size(), 1u);
    for (const auto& r : p.members[0].rows) {
        // the eps-shifted solutions are the constants 1 +- eps
        EXPECT_NEAR(r.upper_gap, 0.0, 1e-9);
        EXPECT_NEAR(r.lower_gap, 0.0, 1e-9);
    }
    EXPECT_EQ(p.verdict, "regular evidence");
}

TEST(Perron, ScaleTransformIsPointwise) {
    auto d = square(4, 2);
    Field f = sample_field(d, [](const Point& x, double t) { return 1.0 + x[0] * x[0] + t; });
    Field g = scale_transform(f, 8.0, 4.0);
    for (std::size_t i = 0; i < f.values().size(); ++i) EXPECT_NEAR(g.values()[i], 2.0 * f.values()[i], 1e-15);
}
