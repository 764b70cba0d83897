#include <gtest/gtest.h>

#include <cmath>

#include <Eigen/Dense>

#include "pmelab/capacity.hpp"

using namespace pmelab;

namespace {

// Minimum of h^{n-2} sum_edges (u_i - u_j)^2 + h^n sum u_i^2 by a dense solve.
double dense_capacity(const SpatialDomain& V, const std::vector<std::uint8_t>& E) {
    const Grid& g = V.grid();
    const int n = g.n();
    const double h = g.h();
    std::vector<std::uint8_t> one(g.size(), 0);
    for (std::size_t c = 0; c < g.size(); ++c)
        if (E[c]) {
            one[c] = 1;
            g.for_each_neighbor(c, [&](std::size_t nb) { one[nb] = 1; });
        }
    std::vector<int> id(g.size(), -1);
    int N = 0;
    for (std::size_t c = 0; c < g.size(); ++c)
        if (V.is_interior(c) && !one[c]) id[c] = N++;
    // Energy as a quadratic form over all grid values; u fixed to 1 or 0 off the free set.
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(N, N);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(N);
    const double we = std::pow(h, n - 2), wm = std::pow(h, n);
    auto fixed = [&](std::size_t c) { return one[c] ? 1.0 : 0.0; };
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (id[c] >= 0) A(id[c], id[c]) += wm;
        g.for_each_neighbor(c, [&](std::size_t nb) {
            if (nb < c) return;
            int i = id[c], j = id[nb];
            if (i >= 0) A(i, i) += we;
            if (j >= 0) A(j, j) += we;
            if (i >= 0 && j >= 0) {
                A(i, j) -= we;
                A(j, i) -= we;
            } else if (i >= 0) {
                b(i) += we * fixed(nb);
            } else if (j >= 0) {
                b(j) += we * fixed(c);
            }
        });
    }
    Eigen::VectorXd x = A.ldlt().solve(b);
    std::vector<double> u(g.size());
    for (std::size_t c = 0; c < g.size(); ++c) u[c] = id[c] >= 0 ? x(id[c]) : fixed(c);
    double e = 0.0;
    for (std::size_t c = 0; c < g.size(); ++c) {
        e += wm * u[c] * u[c];
        g.for_each_neighbor(c, [&](std::size_t nb) {
            if (nb > c) e += we * (u[c] - u[nb]) * (u[c] - u[nb]);
        });
    }
    return e;
}

}  // namespace

TEST(Capacity, MatchesDenseMinimisation) {
    Grid g = Grid::covering(2, 1.0 / 8, {-1, -1, 0}, {1, 1, 0});
    auto V = make_box(g, {-1, -1, 0}, {1, 1, 0});
    for (double r : {1e-3, 0.13, 0.3}) {
        auto E = make_ball(g, {0, 0, 0}, r);
        CapacityOptions o;
        o.tol = 1e-13;
        CapacityResult res = capacity(CompactMask(V, E.mask()), o);
        EXPECT_NEAR(res.value, dense_capacity(V, E.mask()), 1e-9 * res.value) << "r=" << r;
    }
}

TEST(Capacity, MonotoneUnderInclusion) {
    Grid g = Grid::covering(2, 1.0 / 16, {-1, -1, 0}, {1, 1, 0});
    auto V = make_box(g, {-1, -1, 0}, {1, 1, 0});
    double prev = 0.0;
    for (double r : {1e-3, 0.1, 0.2, 0.4}) {
        double c = capacity(CompactMask(V, make_ball(g, {0, 0, 0}, r).mask())).value;
        EXPECT_GE(c, prev);
        prev = c;
    }
}

TEST(Capacity, NonincreasingAsAmbientGrows) {
    Grid g = Grid::covering(2, 1.0 / 16, {-1, -1, 0}, {1, 1, 0});
    auto E = make_ball(g, {0, 0, 0}, 0.2);
    double prev = 1e300;
    for (double w : {0.5, 0.75, 1.0}) {
        double c = capacity(CompactMask(make_box(g, {-w, -w, 0}, {w, w, 0}), E.mask())).value;
        EXPECT_LE(c, prev);
        prev = c;
    }
}

TEST(Capacity, RejectsSetTouchingAmbientBoundary) {
    Grid g = Grid::covering(2, 1.0 / 8, {-1, -1, 0}, {1, 1, 0});
    auto V = make_box(g, {-1, -1, 0}, {1, 1, 0});
    EXPECT_THROW(CompactMask(V, make_ball(g, {0.9, 0, 0}, 0.1).mask()), std::invalid_argument);
    EXPECT_EQ(capacity(CompactMask(V, std::vector<std::uint8_t>(g.size(), 0))).value, 0.0);
}

TEST(Wiener, PunctureIsThinSquareSideIsThick) {
    Grid g = Grid::covering(2, 1.0 / 32, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    WienerOptions o;
    o.k_min = 1;
    auto punct = wiener_profile(make_punctured_ball(g, {0, 0, 0}, 0.5, {0, 0, 0}), {0, 0, 0}, o);
    auto side = wiener_profile(make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0}), {0.5, 0, 0}, o);
    EXPECT_EQ(classify_thickness(punct).verdict, Thickness::Thin);
    EXPECT_EQ(classify_thickness(side).verdict, Thickness::Thick);
    ASSERT_EQ(side.k.size(), side.cap_values.size());
    for (std::size_t i = 0; i < side.k.size(); ++i) {
        EXPECT_NEAR(side.radii[i], std::pow(2.0, -side.k[i]), 1e-15);
        EXPECT_NEAR(side.integrands[i], side.cap_values[i], 1e-15);  // r^{n-2} = 1 in the plane
    }
    for (std::size_t i = 1; i < side.partial_sums.size(); ++i) {
        double step = side.partial_sums[i] - side.partial_sums[i - 1];
        EXPECT_GT(step, 0.0);
        EXPECT_LE(step, side.integrands[i] * (1 + 1e-12));
        EXPECT_LE(side.resolved_partial_sums[i], side.partial_sums[i] + 1e-12);
    }
}

TEST(Torsion, DominatesDistanceAndVanishesAtPoint) {
    Grid g = Grid::covering(2, 1.0 / 32, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto U = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    Point x0{0.5, 0.5, 0};
    TorsionResult t = torsion_profile(U, x0);
    EXPECT_GE(t.min_excess, 0.0);
    std::size_t c0 = *g.nearest(x0);
    EXPECT_EQ(t.field.values[c0], 0.0);
    // Discrete equation at interior cells.
    double h = g.h();
    for (std::size_t c = 0; c < g.size(); ++c) {
        if (!U.is_interior(c)) continue;
        double lap = 0.0;
        g.for_each_neighbor(c, [&](std::size_t nb) { lap += t.field.values[nb] - t.field.values[c]; });
        EXPECT_NEAR(-lap / (h * h), 1.0, 1e-6);
    }
}

TEST(Geometry, BoundaryAndConnectivity) {
    Grid g = Grid::covering(2, 1.0 / 8, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto U = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    EXPECT_TRUE(on_boundary(U, {0.5, 0, 0}));
    EXPECT_FALSE(on_boundary(U, {0, 0, 0}));
    EXPECT_TRUE(is_connected(U));
    auto two = make_box(g, {-0.5, -0.5, 0}, {-0.25, 0.5, 0}).united(make_box(g, {0.25, -0.5, 0}, {0.5, 0.5, 0}));
    EXPECT_FALSE(is_connected(two));
}
