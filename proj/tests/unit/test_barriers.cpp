#include <gtest/gtest.h>

#include <cmath>

#include "pmelab/barriers.hpp"
#include "pmelab/capacity.hpp"
#include "pmelab/rng.hpp"

using namespace pmelab;

namespace {

// dt w - Lap(w^m) by central differences of evaluate().
double fd_residual(const BarrierSpec& s, const Point& x, double t) {
    const double e = 1e-4;
    double dt = (evaluate(s, x, t + e) - evaluate(s, x, t - e)) / (2 * e);
    auto wm = [&](const Point& y) { return std::pow(evaluate(s, y, t), s.m); };
    double lap = 0.0;
    for (int a = 0; a < s.n; ++a) {
        Point p = x, q = x;
        p[a] += e;
        q[a] -= e;
        lap += (wm(p) - 2 * wm(x) + wm(q)) / (e * e);
    }
    return dt - lap;
}

SpaceTimeDomain unit_cylinder(int res, int steps) {
    Grid g = Grid::covering(2, 1.0 / res, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    return SpaceTimeDomain(g, TimeGrid{0.0, 1.0 / steps, steps}, {Cylinder(make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0}), 0.0, 1.0)});
}

// Smallest j with (2nm)^{m/(m-1)} (c^m + 2 j^{2m-1} d^2) <= j^{2m}, for integer m, c, d.
long integer_scan(long m, long n, long c, long d) {
    long k = 1;
    for (long i = 0; i < m; ++i) k *= 2 * n * m;  // (2nm)^m, m/(m-1) = 2 when m = 2
    for (long j = 1;; ++j) {
        long double jj = j;
        long double lhs = static_cast<long double>(k) * (std::pow(static_cast<long double>(c), m) + 2 * std::pow(jj, 2 * m - 1) * d * d);
        if (lhs <= std::pow(jj, 2 * m)) return j;
    }
}

}  // namespace

TEST(Barriers, KindsRoundTrip) {
    for (auto k : {BarrierKind::SubSeed7, BarrierKind::LowerLog8, BarrierKind::EarliestUpper10,
                   BarrierKind::EarliestLower10, BarrierKind::TorsionUpper12, BarrierKind::TorsionLower12})
        EXPECT_EQ(barrier_kind_from_string(to_string(k)), k);
    EXPECT_THROW(barrier_kind_from_string("nope"), std::invalid_argument);
}

TEST(Barriers, ClosedFormResidualsMatchFiniteDifferences) {
    CounterRng rng(5, "fd");
    for (auto kind : {BarrierKind::SubSeed7, BarrierKind::LowerLog8, BarrierKind::EarliestUpper10,
                      BarrierKind::EarliestLower10}) {
        for (double m : {1.5, 2.0, 3.0}) {
            BarrierSpec s;
            s.kind = kind;
            s.m = m;
            s.c = 1.3;
            s.j = 3;
            s.diam = 1.5;
            s.x0 = {0.1, -0.2, 0};
            s.t0 = 0.05;
            int tested = 0;
            for (int q = 0; q < 200 && tested < 20; ++q) {
                // the earliest-point lower barrier is only positive just after t0
                bool near = kind == BarrierKind::EarliestLower10;
                double w = near ? 0.3 : 0.5;
                Point x{s.x0[0] + rng.next_uniform(-w, w), s.x0[1] + rng.next_uniform(-w, w), 0};
                double t = near ? s.t0 + rng.next_uniform(0.001, 0.01) : rng.next_uniform(0.1, 0.6);
                ResidualValue r = residual(s, x, t);
                if (r.excluded) continue;
                if (kind == BarrierKind::EarliestLower10 && evaluate(s, x, t) < 0.3) continue;
                double fd = fd_residual(s, x, t);
                EXPECT_NEAR(r.value, fd, 1e-4 * std::max(1.0, r.scale)) << to_string(kind) << " m=" << m;
                ++tested;
            }
            EXPECT_GT(tested, 5) << to_string(kind);
        }
    }
}

TEST(Barriers, MinValidJMatchesIntegerScan) {
    EXPECT_EQ(min_valid_j(BarrierKind::EarliestUpper10, 1.0, 2.0, 2, 1.0), 129);
    EXPECT_EQ(integer_scan(2, 2, 1, 1), 129);
    for (long n : {1, 2, 3})
        for (long c : {1, 2, 3})
            EXPECT_EQ(min_valid_j(BarrierKind::EarliestUpper10, c, 2.0, static_cast<int>(n), 1.0), integer_scan(2, n, c, 1))
                << "n=" << n << " c=" << c;
    long j = min_valid_j(BarrierKind::EarliestUpper10, 1.0, 2.0, 2, 1.0);
    EXPECT_TRUE(min_j_condition(BarrierKind::EarliestUpper10, 1.0, 2.0, 2, 1.0, j));
    EXPECT_FALSE(min_j_condition(BarrierKind::EarliestUpper10, 1.0, 2.0, 2, 1.0, j - 1));
}

TEST(Barriers, MinValidJLowerLog8IsMinimal) {
    long j = min_valid_j(BarrierKind::LowerLog8, 0.5, 2.0, 2, 1.0);
    EXPECT_TRUE(min_j_condition(BarrierKind::LowerLog8, 0.5, 2.0, 2, 1.0, j));
    for (long i = 1; i < j; ++i) EXPECT_FALSE(min_j_condition(BarrierKind::LowerLog8, 0.5, 2.0, 2, 1.0, i));
    EXPECT_THROW(min_valid_j(BarrierKind::SubSeed7, 1.0, 2.0, 2, 1.0), std::invalid_argument);
}

TEST(Barriers, SubsolutionSeedHasNonpositiveResidual) {
    SpaceTimeDomain d = unit_cylinder(8, 8);
    for (double c : {0.5, 1.0, 2.0})
        for (long j : {1L, 4L, 16L}) {
            BarrierSpec s;
            s.c = c;
            s.j = j;
            s.diam = std::sqrt(2.0);
            SignReport r = verify_sign(s, d);
            EXPECT_TRUE(r.passed()) << "c=" << c << " j=" << j;
            EXPECT_LE(r.max_residual, 0.0);
            EXPECT_EQ(r.claimed_sign, -1);
        }
}

TEST(Barriers, EarliestUpperSignDependsOnJ) {
    SpaceTimeDomain d = unit_cylinder(8, 8);
    BarrierSpec s;
    s.kind = BarrierKind::EarliestUpper10;
    s.diam = 1.0;
    s.j = min_valid_j(s.kind, 1.0, 2.0, 2, 1.0);
    EXPECT_TRUE(verify_sign(s, d).passed());
    s.j = 1;
    SignReport bad = verify_sign(s, d);
    EXPECT_FALSE(bad.passed());
    EXPECT_LT(bad.min_residual, 0.0);
}

TEST(Barriers, SamplingIsDeterministic) {
    SpaceTimeDomain d = unit_cylinder(8, 4);
    BarrierSpec s;
    s.kind = BarrierKind::EarliestUpper10;
    s.j = 1;
    SamplingPolicy p;
    p.seed = 99;
    SignReport a = verify_sign(s, d, p), b = verify_sign(s, d, p);
    ASSERT_EQ(a.violating_samples.size(), b.violating_samples.size());
    for (std::size_t i = 0; i < a.violating_samples.size(); ++i) EXPECT_EQ(a.violating_samples[i].x, b.violating_samples[i].x);
    std::size_t defined = 0, interior = 0;
    for (int k = 0; k < d.time().levels(); ++k)
        for (std::size_t c = 0; c < d.grid().size(); ++c) {
            defined += d.defined(c, k) ? 1 : 0;
            interior += d.kind(c, k) == SampleKind::Interior ? 1 : 0;
        }
    EXPECT_EQ(a.samples_checked + a.samples_excluded, defined + 10 * interior);
}

TEST(Barriers, LowerLogExcludesOrigin) {
    SpaceTimeDomain d = unit_cylinder(8, 4);
    BarrierSpec s;
    s.kind = BarrierKind::LowerLog8;
    s.j = min_valid_j(s.kind, 1.0, 2.0, 2, 1.0);
    s.diam = 1.0;
    SignReport r = verify_sign(s, d);
    EXPECT_GT(r.samples_excluded, 0u);
    EXPECT_TRUE(r.passed());
    EXPECT_TRUE(residual(s, {0, 0, 0}, 0.5).excluded);
}

TEST(Barriers, EarliestLowerClipsToZero) {
    BarrierSpec s;
    s.kind = BarrierKind::EarliestLower10;
    s.c = 1.0;
    s.j = 10;
    EXPECT_EQ(evaluate(s, {0.5, 0.5, 0}, 0.0), 0.0);
    EXPECT_TRUE(residual(s, {0.5, 0.5, 0}, 0.0).excluded);
    EXPECT_NEAR(evaluate(s, {0, 0, 0}, 0.0), 1.0, 1e-15);
}

TEST(Barriers, TorsionBarriersUseTheField) {
    Grid g = Grid::covering(2, 1.0 / 16, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    auto U = make_box(g, {-0.5, -0.5, 0}, {0.5, 0.5, 0});
    TorsionResult tr = torsion_profile(U, {0.5, 0, 0});
    BarrierSpec s;
    s.kind = BarrierKind::TorsionUpper12;
    s.torsion = std::make_shared<const StaticField>(tr.field);
    s.x0 = {0.5, 0, 0};
    s.diam = std::sqrt(2.0);
    EXPECT_NEAR(evaluate(s, {0.5, 0, 0}, 0.0), 1.0, 1e-12);
    BarrierSpec none;
    none.kind = BarrierKind::TorsionLower12;
    EXPECT_THROW(none.validate(), std::invalid_argument);
}

TEST(Barriers, BarenblattSolvesTheEquation) {
    const double m = 2.0, C = 0.0625;
    const int n = 2;
    for (Point x : {Point{0.05, 0.02, 0}, Point{0.1, -0.1, 0}}) {
        double t = 0.02, e = 1e-5;
        double ut = (barenblatt(x, t + e, m, n, C) - barenblatt(x, t - e, m, n, C)) / (2 * e);
        double lap = 0.0;
        for (int a = 0; a < n; ++a) {
            Point p = x, q = x;
            p[a] += e;
            q[a] -= e;
            lap += (std::pow(barenblatt(p, t, m, n, C), m) - 2 * std::pow(barenblatt(x, t, m, n, C), m) +
                    std::pow(barenblatt(q, t, m, n, C), m)) / (e * e);
        }
        EXPECT_NEAR(ut, lap, 1e-3 * std::abs(ut) + 1e-6);
    }
    EXPECT_DOUBLE_EQ(barenblatt_beta(2.0, 2), 0.25);
    EXPECT_EQ(barenblatt({1, 0, 0}, 0.01, m, n, C), 0.0);
}
