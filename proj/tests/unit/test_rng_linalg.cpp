#include <gtest/gtest.h>

#include <Eigen/Dense>

#include "pmelab/linalg.hpp"
#include "pmelab/rng.hpp"

using namespace pmelab;

TEST(CounterRng, PureFunctionOfSeedStreamCounter) {
    CounterRng a(42, "jitter"), b(42, "jitter"), c(42, "other"), d(43, "jitter");
    EXPECT_EQ(a.bits(17), b.bits(17));
    EXPECT_NE(a.bits(17), c.bits(17));
    EXPECT_NE(a.bits(17), d.bits(17));
    CounterRng seq(42, "jitter");
    for (std::uint64_t i = 0; i < 100; ++i) EXPECT_EQ(seq.next_bits(), a.bits(i));
}

TEST(CounterRng, UniformMoments) {
    CounterRng r(7, "moments");
    double sum = 0.0, sq = 0.0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
        double u = r.uniform(static_cast<std::uint64_t>(i));
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
        sum += u;
        sq += u * u;
    }
    EXPECT_NEAR(sum / N, 0.5, 3e-3);
    EXPECT_NEAR(sq / N - (sum / N) * (sum / N), 1.0 / 12.0, 2e-3);
}

TEST(ConjugateGradient, MatchesDenseSolve) {
    const int n = 30;
    CounterRng r(1, "spd");
    Eigen::MatrixXd B(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) B(i, j) = r.next_uniform(-1.0, 1.0);
    Eigen::MatrixXd A = B * B.transpose() + n * Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd b(n);
    for (int i = 0; i < n; ++i) b(i) = r.next_uniform(-1.0, 1.0);
    Eigen::VectorXd exact = A.ldlt().solve(b);

    LinearOp op = [&](const Vec& x, Vec& y) {
        Eigen::Map<const Eigen::VectorXd> xm(x.data(), n);
        Eigen::Map<Eigen::VectorXd>(y.data(), n) = A * xm;
    };
    Vec bv(b.data(), b.data() + n);
    Vec inv(n);
    for (int i = 0; i < n; ++i) inv[i] = 1.0 / A(i, i);
    for (const Vec& pre : {Vec{}, inv}) {
        Vec x(n, 0.0);
        CgResult res = conjugate_gradient(op, bv, x, 1e-13, 1000, pre);
        EXPECT_TRUE(res.converged);
        for (int i = 0; i < n; ++i) EXPECT_NEAR(x[i], exact(i), 1e-10);
    }
}

TEST(ConjugateGradient, ZeroRightHandSide) {
    LinearOp id = [](const Vec& x, Vec& y) { y = x; };
    Vec x(5, 0.0);
    CgResult res = conjugate_gradient(id, Vec(5, 0.0), x, 1e-12, 10);
    EXPECT_TRUE(res.converged);
    EXPECT_EQ(norm_inf(x), 0.0);
}
