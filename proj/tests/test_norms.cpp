#include <array>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "dsparse/norms.hpp"
#include "oracles.hpp"

using namespace dsparse;

namespace {

Vector vec(std::initializer_list<double> v)
{
    Vector x(static_cast<Eigen::Index>(v.size()));
    std::copy(v.begin(), v.end(), x.data());
    return x;
}

} // namespace

TEST(LqNorm, Examples)
{
    EXPECT_DOUBLE_EQ(lq_norm(vec({3, 4}), 2), 5.0);
    EXPECT_DOUBLE_EQ(lq_norm(vec({1, -1}), kInf), 1.0);
    EXPECT_DOUBLE_EQ(lq_norm(vec({1, 1, 1}), 1), 3.0);
    EXPECT_THROW(lq_norm(vec({1}), 0.5), InvalidParameter);
}

TEST(LqNorm, NoOverflowForLargeEntries)
{
    EXPECT_NEAR(lq_norm(vec({3e200, 4e200}), 2) / 5e200, 1.0, 1e-15);
}

TEST(SoftThreshold, Examples)
{
    EXPECT_EQ(soft_threshold(vec({2, -0.5}), 1), vec({1, 0}));
    EXPECT_EQ(soft_threshold(vec({1.5, -2}), 0), vec({1.5, -2}));
    EXPECT_EQ(soft_threshold(vec({-3}), 1), vec({-2}));
    EXPECT_THROW(soft_threshold(vec({1}), -1), InvalidParameter);
}

TEST(EpsQ, RejectsInvalidParameters)
{
    EXPECT_THROW(EpsQ(0.0, 2), InvalidParameter);
    EXPECT_THROW(EpsQ(1.1, 2), InvalidParameter);
    EXPECT_THROW(EpsQ(0.5, 0.5), InvalidParameter);
    EXPECT_THROW(EpsQ(std::nan(""), 2), InvalidParameter);
    EXPECT_NO_THROW(EpsQ(0.5, kInf));
}

TEST(EpsQNorm, BasisVectorHasUnitNorm)
{
    for (double q : {1.0, 1.5, 2.0, 3.0, kInf})
        for (double eps : {0.1, 0.5, 0.9, 1.0}) {
            Vector e = Vector::Zero(6);
            e[3] = 1.0;
            EXPECT_NEAR(epsq_norm(e, EpsQ(eps, q)), 1.0, 1e-12) << "q=" << q << " eps=" << eps;
        }
}

TEST(EpsQNorm, AllOnesMatchesClosedForm)
{
    for (int p : {1, 2, 7, 30})
        for (double q : {1.0, 1.5, 2.0, 4.0})
            for (double eps : {0.05, 0.5, 0.95}) {
                const double pq = std::pow(p, 1.0 / q);
                const double expect = pq / (pq * (1.0 - eps) + eps);
                EXPECT_NEAR(epsq_norm(Vector::Ones(p), EpsQ(eps, q)), expect, 1e-12 * expect);
            }
}

TEST(EpsQNorm, TwoByTwoExample)
{
    const double v = epsq_norm(vec({1, 1}), EpsQ(0.5, 2));
    EXPECT_NEAR(v, 4.0 - 2.0 * std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(v, oracle::epsq_norm(vec({1, 1}), 0.5, 2), 1e-15);
}

TEST(EpsQNorm, ShortCircuits)
{
    const Vector x = vec({0.3, -2.0, 1.1});
    EXPECT_EQ(epsq_norm(x, EpsQ(1.0, 2)), lq_norm(x, 2));
    EXPECT_EQ(epsq_norm(x, EpsQ(0.4, kInf)), 2.0);
    EXPECT_EQ(epsq_norm(Vector::Zero(4), EpsQ(0.4, 3)), 0.0);
}

TEST(EpsQNorm, AgreesWithExtendedPrecisionOracle)
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        const int p = 1 + static_cast<int>(u(rng) * 20);
        const Vector x = oracle::random_vector(rng, p, 3.0);
        const double eps = 0.01 + 0.99 * u(rng);
        const double q = std::array<double, 5>{1.0, 1.3, 2.0, 2.7, 6.0}[k % 5];
        const double v = epsq_norm(x, EpsQ(eps, q));
        const double ref = oracle::epsq_norm(x, eps, q);
        EXPECT_NEAR(v, ref, 1e-12 * std::max(1.0, ref)) << "q=" << q << " eps=" << eps;
    }
}

TEST(EpsQNorm, ScanMatchesBisection)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
        const Vector x = oracle::random_vector(rng, 1 + k % 40);
        const EpsQ p(0.02 + 0.97 * u(rng), k % 2 == 0 ? 1.0 : 2.0);
        const double a = epsq_norm(x, p);
        EXPECT_NEAR(a, epsq_norm_bisection(x, p), 1e-11 * std::max(1.0, a));
    }
}

TEST(EpsQNorm, ApproachesSupNormAsEpsilonVanishes)
{
    const Vector x = vec({0.5, -3.0, 2.9, 0.0});
    double prev = kInf;
    for (double eps : {1.0, 0.5, 0.1, 1e-3, 1e-6}) {
        const double v = epsq_norm(x, EpsQ(eps, 2));
        EXPECT_LE(v, prev * (1 + 1e-12));
        prev = v;
    }
    EXPECT_NEAR(prev, 3.0, 1e-4 * 3.0);
}

TEST(Decompose, ExampleSplit)
{
    const auto d = epsq_decompose(vec({1, 1}), EpsQ(0.5, 2));
    const double r2 = std::sqrt(2.0);
    EXPECT_NEAR(d.norm_value, 4 - 2 * r2, 1e-15);
    EXPECT_NEAR(d.flat[0], 2 - r2, 1e-15);
    EXPECT_NEAR(d.flat[1], 2 - r2, 1e-15);
    EXPECT_NEAR(d.spiky[0], r2 - 1, 1e-15);
    EXPECT_NEAR(d.spiky[1], r2 - 1, 1e-15);
}

TEST(Decompose, ZeroAndEpsilonOne)
{
    const auto z = epsq_decompose(Vector::Zero(3), EpsQ(0.3, 1.5));
    EXPECT_EQ(z.norm_value, 0.0);
    EXPECT_TRUE(z.spiky.isZero(0.0));
    EXPECT_TRUE(z.flat.isZero(0.0));

    const Vector x = vec({1, -2, 0.5});
    const auto d = epsq_decompose(x, EpsQ(1.0, 3));
    EXPECT_EQ(d.spiky, x);
    EXPECT_TRUE(d.flat.isZero(0.0));
}

TEST(Decompose, SplitEqualities)
{
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
        const Vector x = oracle::random_vector(rng, 1 + k % 12, 2.0);
        const double q = std::array<double, 4>{1.0, 1.7, 2.0, kInf}[k % 4];
        const EpsQ p(0.05 + 0.9 * u(rng), q);
        const auto d = epsq_decompose(x, p);
        EXPECT_LE((d.spiky + d.flat - x).cwiseAbs().maxCoeff(), 1e-12 * std::max(1.0, lq_norm(x, kInf)));
        EXPECT_NEAR(lq_norm(d.spiky, q), p.epsilon() * d.norm_value, 1e-10 * std::max(1.0, d.norm_value));
        EXPECT_NEAR(lq_norm(d.flat, kInf), (1 - p.epsilon()) * d.norm_value, 1e-10 * std::max(1.0, d.norm_value));
    }
}

TEST(DualNorm, Examples)
{
    const Vector y = vec({3, -4, 0});
    EXPECT_NEAR(epsq_dual_norm(y, EpsQ(0.5, 2)), 0.5 * 5 + 0.5 * 7, 1e-15);
    EXPECT_EQ(epsq_dual_norm(y, EpsQ(0.3, kInf)), 7.0);
    EXPECT_NEAR(epsq_dual_norm(y, EpsQ(0.25, 1)), 0.25 * 4 + 0.75 * 7, 1e-15);
    Vector e = Vector::Zero(5);
    e[0] = 1;
    EXPECT_NEAR(epsq_dual_norm(e, EpsQ(0.7, 2)), 1.0, 1e-15);
}

TEST(Ball, AxisPointsAndRadii)
{
    const auto pts = epsq_ball_boundary(EpsQ(0.5, 2), 8);
    ASSERT_EQ(pts.size(), 8u);
    EXPECT_EQ(pts[0], Eigen::Vector2d(1, 0));
    EXPECT_EQ(pts[2], Eigen::Vector2d(0, 1));
    const double r = std::sqrt(2.0) / (4 - 2 * std::sqrt(2.0));
    EXPECT_NEAR(pts[1].norm(), r, 1e-14);

    for (const auto& pt : epsq_ball_boundary(EpsQ(1.0, 2), 64))
        EXPECT_NEAR(pt.norm(), 1.0, 1e-15);
    EXPECT_THROW(epsq_ball_boundary(EpsQ(1.0, 2), 4), InvalidParameter);
}
