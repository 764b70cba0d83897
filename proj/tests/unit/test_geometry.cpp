#include <gtest/gtest.h>

#include <cmath>

#include "pmelab/geometry.hpp"

using namespace pmelab;

namespace {

Grid unit_grid(double h) { return Grid::covering(2, h, {-0.5, -0.5, 0}, {0.5, 0.5, 0}); }

// Interior straight from the definition: all 2n face neighbours exist and lie in the mask.
bool interior_by_definition(const SpatialDomain& s, std::size_t c) {
    const Grid& g = s.grid();
    if (!s.inside(c)) return false;
    Index3 idx = g.index(c);
    for (int a = 0; a < g.n(); ++a)
        for (int d : {-1, 1}) {
            Index3 j = idx;
            j[a] += d;
            if (!g.in_range(j) || !s.inside(g.linear(j))) return false;
        }
    return true;
}

}  // namespace

TEST(Grid, IndexRoundTrip) {
    Grid g = Grid::covering(3, 0.25, {0, 0, 0}, {1, 0.5, 0.75});
    EXPECT_EQ(g.extents()[0], 5);
    EXPECT_EQ(g.extents()[1], 3);
    EXPECT_EQ(g.extents()[2], 4);
    for (std::size_t c = 0; c < g.size(); ++c) EXPECT_EQ(g.linear(g.index(c)), c);
    auto c = g.nearest({0.49, 0.26, 0.51});
    ASSERT_TRUE(c);
    Point x = g.center(*c);
    EXPECT_DOUBLE_EQ(x[0], 0.5);
    EXPECT_DOUBLE_EQ(x[1], 0.25);
    EXPECT_DOUBLE_EQ(x[2], 0.5);
    EXPECT_FALSE(g.nearest({2.0, 0.0, 0.0}));
}

TEST(SpatialDomain, BoundaryCellsMatchDefinition) {
    Grid g = unit_grid(1.0 / 16);
    for (const auto& s : {make_ball(g, {0.1, -0.05, 0}, 0.37), make_box(g, {-0.25, -0.5, 0}, {0.5, 0.125, 0}),
                          make_box_minus_segment(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0}, {0, 0, 0}, {0.5, 0, 0})}) {
        for (std::size_t c = 0; c < g.size(); ++c) {
            bool in = s.inside(c);
            bool interior = interior_by_definition(s, c);
            EXPECT_EQ(s.is_interior(c), interior);
            EXPECT_EQ(s.is_boundary(c), in && !interior);
        }
    }
}

TEST(SpatialDomain, PuncturedBallRemovesOneNode) {
    Grid g = unit_grid(1.0 / 32);
    auto ball = make_ball(g, {0, 0, 0}, 0.5);
    auto punct = make_punctured_ball(g, {0, 0, 0}, 0.5, {0, 0, 0});
    EXPECT_EQ(ball.count(), punct.count() + 1);
    std::size_t centre = *g.nearest({0, 0, 0});
    EXPECT_FALSE(punct.inside(centre));
    // The four neighbours of the hole become boundary cells.
    int nb_boundary = 0;
    g.for_each_neighbor(centre, [&](std::size_t nb) { nb_boundary += punct.is_boundary(nb) ? 1 : 0; });
    EXPECT_EQ(nb_boundary, 4);
}

TEST(SpatialDomain, DiameterMatchesBruteForce) {
    Grid g = unit_grid(1.0 / 16);
    for (const auto& s : {make_ball(g, {0.1, 0, 0}, 0.3), make_box(g, {-0.5, -0.25, 0}, {0.25, 0.5, 0})}) {
        double best = 0.0;
        for (std::size_t a = 0; a < g.size(); ++a)
            for (std::size_t b = 0; b < g.size(); ++b)
                if (s.inside(a) && s.inside(b)) best = std::max(best, distance(g.center(a), g.center(b), 2));
        EXPECT_NEAR(diameter(s), best, 1e-14);
    }
}

TEST(TimeGrid, Levels) {
    TimeGrid t{0.0, 0.125, 8};
    EXPECT_EQ(t.levels(), 9);
    EXPECT_EQ(t.level_of(0.5), 4);
    EXPECT_THROW(t.level_of(0.3), std::exception);
    EXPECT_EQ(t.nearest_level(0.3), 2);
}

TEST(SpaceTimeDomain, ParabolicBoundaryMatchesDefinition) {
    Grid g = unit_grid(1.0 / 16);
    auto small = make_box(g, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
    auto big = make_ball(g, {0, 0, 0}, 0.45);
    TimeGrid tg{0.0, 1.0 / 16, 16};
    SpaceTimeDomain d(g, tg, {Cylinder(small, 0.0, 0.5), Cylinder(big, 0.25, 1.0)});

    struct C {
        const SpatialDomain* s;
        int k1, k2;
    };
    std::vector<C> cyl{{&small, 0, 8}, {&big, 4, 16}};
    std::size_t boundary = 0;
    for (int k = 0; k < tg.levels(); ++k)
        for (std::size_t c = 0; c < g.size(); ++c) {
            bool defined = false, interior = false;
            for (const auto& cy : cyl) {
                if (k < cy.k1 || k > cy.k2 || !cy.s->inside(c)) continue;
                defined = true;
                if (k > cy.k1 && interior_by_definition(*cy.s, c)) interior = true;
            }
            SampleKind want = !defined ? SampleKind::Outside : interior ? SampleKind::Interior : SampleKind::Boundary;
            ASSERT_EQ(d.kind(c, k), want) << "cell " << c << " level " << k;
            boundary += want == SampleKind::Boundary ? 1 : 0;
        }
    EXPECT_EQ(parabolic_boundary(d).size(), boundary);
}

TEST(SpaceTimeDomain, TruncationKeepsLevelsUpToT) {
    Grid g = unit_grid(1.0 / 8);
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto b = make_box(g, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
    TimeGrid tg{0.0, 0.125, 8};
    SpaceTimeDomain d(g, tg, {Cylinder(b, 0.0, 0.5), Cylinder(s, 0.5, 1.0)});
    SpaceTimeDomain t = d.truncated(0.5);
    EXPECT_EQ(t.cylinders().size(), 1u);
    EXPECT_EQ(t.time().steps, 4);
    for (int k = 0; k < 4; ++k)
        for (std::size_t c = 0; c < g.size(); ++c) EXPECT_EQ(t.kind(c, k), d.kind(c, k));
    // the later cylinder's base at the cut is not part of the truncated set
    for (std::size_t c = 0; c < g.size(); ++c)
        EXPECT_EQ(t.kind(c, 4), b.inside(c) ? d.kind(c, 4) : SampleKind::Outside);
    SpaceTimeDomain t2 = d.truncated(0.75);
    EXPECT_EQ(t2.cylinders().size(), 2u);
    EXPECT_DOUBLE_EQ(t2.t_max(), 0.75);
}

TEST(SpaceTimeDomain, MonotoneSections) {
    Grid g = unit_grid(1.0 / 8);
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto b = make_box(g, {-0.25, -0.25, 0}, {0.25, 0.25, 0});
    TimeGrid tg{0.0, 0.125, 8};
    EXPECT_TRUE(check_monotone_sections(SpaceTimeDomain(g, tg, {Cylinder(b, 0.0, 0.5), Cylinder(s, 0.5, 1.0)})).monotone);
    auto shrink = check_monotone_sections(SpaceTimeDomain(g, tg, {Cylinder(s, 0.0, 0.5), Cylinder(b, 0.5, 1.0)}));
    EXPECT_FALSE(shrink.monotone);
    ASSERT_TRUE(shrink.first_violation);
    EXPECT_EQ(shrink.first_violation->level_before, 4);
}

TEST(SpaceTimeDomain, CoarseningHalvesResolution) {
    Grid g = unit_grid(1.0 / 8);
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    SpaceTimeDomain d(g, TimeGrid{0.0, 0.125, 8}, {Cylinder(s, 0.0, 1.0)});
    SpaceTimeDomain c = d.coarsened();
    EXPECT_DOUBLE_EQ(c.grid().h(), 0.25);
    EXPECT_EQ(c.time().steps, 4);
    EXPECT_EQ(c.grid().extents()[0], 5);
    SpaceTimeDomain odd(g, TimeGrid{0.0, 0.125, 8}, {Cylinder(s, 0.125, 1.0)});
    EXPECT_THROW(odd.coarsened(), GeometryError);
}

TEST(SpaceTimeDomain, SpaceTimeDiameter) {
    Grid g = unit_grid(1.0 / 4);
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    SpaceTimeDomain d(g, TimeGrid{0.0, 0.25, 4}, {Cylinder(s, 0.0, 1.0)});
    EXPECT_NEAR(diameter(d), std::sqrt(2.0 + 1.0), 1e-14);
}

TEST(Cylinder, RejectsEmptyOrReversed) {
    Grid g = unit_grid(1.0 / 4);
    auto s = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    EXPECT_THROW(Cylinder(s, 1.0, 0.5), GeometryError);
    SpatialDomain empty(g, std::vector<std::uint8_t>(g.size(), 0), true);
    EXPECT_THROW(Cylinder(empty, 0.0, 1.0), GeometryError);
}
