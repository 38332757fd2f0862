#pragma once

// Slow, independent reference computations used only by the tests.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

namespace oracle {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using Real = long double;

inline constexpr double inf = std::numeric_limits<double>::infinity();

inline Real lq(const std::vector<Real>& a, double q)
{
    Real m = 0;
    for (Real v : a)
        m = std::max(m, std::fabs(v));
    if (q == inf || m == 0)
        return m;
    Real s = 0;
    for (Real v : a)
        s += std::pow(std::fabs(v) / m, static_cast<Real>(q));
    return m * std::pow(s, 1 / static_cast<Real>(q));
}

inline double lq(const Vec& x, double q)
{
    return static_cast<double>(lq(std::vector<Real>(x.data(), x.data() + x.size()), q));
}

/// || S_{(1-eps) v}(x) ||_q - eps v, in extended precision.
inline Real epsq_residual(const Vec& x, double eps, double q, Real v)
{
    std::vector<Real> s(static_cast<std::size_t>(x.size()));
    for (Eigen::Index i = 0; i < x.size(); ++i)
        s[static_cast<std::size_t>(i)] = std::max<Real>(std::fabs(static_cast<Real>(x[i])) - (1 - static_cast<Real>(eps)) * v, 0);
    return lq(s, q) - static_cast<Real>(eps) * v;
}

/// Plain bisection on the defining equation over [0, ||x||_q / eps].
inline double epsq_norm(const Vec& x, double eps, double q)
{
    Real lo = 0, hi = static_cast<Real>(lq(x, q)) / static_cast<Real>(eps);
    if (hi == 0)
        return 0.0;
    for (int k = 0; k < 300 && hi - lo > 0; ++k) {
        const Real mid = (lo + hi) / 2;
        if (mid == lo || mid == hi)
            break;
        (epsq_residual(x, eps, q, mid) > 0 ? lo : hi) = mid;
    }
    return static_cast<double>((lo + hi) / 2);
}

template <class F>
Real bisect_decreasing(F f, Real lo, Real hi)
{
    for (int k = 0; k < 400; ++k) {
        const Real mid = (lo + hi) / 2;
        if (mid == lo || mid == hi)
            break;
        (f(mid) > 0 ? lo : hi) = mid;
    }
    return (lo + hi) / 2;
}

/// argmin_b 1/2 ||b - z||^2 + a ||b||_1 + c ||b||_alpha, from the optimality
/// conditions coordinate by coordinate (nested bisection on the group norm).
inline Vec prox_group(const Vec& z, double a_, double c_, double alpha)
{
    const Eigen::Index n = z.size();
    const Real a = a_, c = c_;
    std::vector<Real> s(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        s[static_cast<std::size_t>(i)] = std::max<Real>(std::fabs(static_cast<Real>(z[i])) - a, 0);
    auto signed_out = [&](const std::vector<Real>& b) {
        Vec out(n);
        for (Eigen::Index i = 0; i < n; ++i)
            out[i] = static_cast<double>(z[i] < 0 ? -b[static_cast<std::size_t>(i)] : b[static_cast<std::size_t>(i)]);
        return out;
    };
    if (c == 0)
        return signed_out(s);
    if (alpha == 1.0) {
        for (auto& v : s)
            v = std::max<Real>(v - c, 0);
        return signed_out(s);
    }
    const double alpha_dual = alpha == inf ? 1.0 : alpha / (alpha - 1.0);
    if (lq(s, alpha_dual) <= c)
        return signed_out(std::vector<Real>(s.size(), 0));
    if (alpha == inf) {
        // b_i = min(s_i, rho) with sum (s_i - rho)_+ = c
        Real hi = 0;
        for (Real v : s)
            hi = std::max(hi, v);
        const Real rho = bisect_decreasing([&](Real r) {
            Real t = 0;
            for (Real v : s)
                t += std::max<Real>(v - r, 0);
            return t - c;
        }, 0, hi);
        std::vector<Real> b(s.size());
        for (std::size_t i = 0; i < s.size(); ++i)
            b[i] = std::min(s[i], rho);
        return signed_out(b);
    }
    // For rho = ||b||_alpha: b_i + c (b_i / rho)^(alpha-1) = s_i.
    std::vector<Real> b(s.size());
    auto solve_b = [&](Real rho) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const Real si = s[i];
            b[i] = si == 0 ? 0 : bisect_decreasing([&](Real x) {
                return si - x - c * std::pow(x / rho, static_cast<Real>(alpha - 1));
            }, 0, si);
        }
    };
    const Real rho = bisect_decreasing([&](Real r) {
        solve_b(r);
        return lq(b, alpha) - r;
    }, 0, lq(s, alpha));
    solve_b(rho);
    return signed_out(b);
}

/// 1/2 ||b - z||^2 + a ||b||_1 + c ||b||_alpha
inline double prox_objective(const Vec& b, const Vec& z, double a, double c, double alpha)
{
    return 0.5 * (b - z).squaredNorm() + a * b.lpNorm<1>() + c * lq(b, alpha);
}

/// Cyclic coordinate descent for ||y - X b||^2 + lambda ||b||_1.
inline Vec lasso_cd(const Mat& X, const Vec& y, double lambda, int max_sweeps = 200000, double tol = 1e-15)
{
    const Eigen::Index p = X.cols();
    Vec b = Vec::Zero(p);
    Vec r = y;
    const Vec col_sq = X.colwise().squaredNorm();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        for (Eigen::Index j = 0; j < p; ++j) {
            const double rho = X.col(j).dot(r) + col_sq[j] * b[j];
            const double mag = std::max(std::abs(rho) - lambda / 2.0, 0.0);
            const double next = (rho < 0 ? -mag : mag) / col_sq[j];
            const double d = next - b[j];
            if (d != 0.0) {
                r -= d * X.col(j);
                b[j] = next;
                change = std::max(change, std::abs(d));
            }
        }
        if (change < tol)
            break;
    }
    return b;
}

/// Block coordinate proximal descent for ||y - X b||^2 + lambda sum_g w_g ||b_g||_2
/// over contiguous blocks.
inline Vec group_lasso_bcd(const Mat& X, const Vec& y, double lambda, const std::vector<int>& sizes,
                           const std::vector<double>& w, int max_sweeps = 500000, double tol = 1e-15)
{
    Vec b = Vec::Zero(X.cols());
    Vec r = y;
    std::vector<double> lip;
    for (std::size_t g = 0, off = 0; g < sizes.size(); off += static_cast<std::size_t>(sizes[g]), ++g) {
        const Mat Xg = X.middleCols(static_cast<Eigen::Index>(off), sizes[g]);
        Eigen::SelfAdjointEigenSolver<Mat> eig(Xg.transpose() * Xg, Eigen::EigenvaluesOnly);
        lip.push_back(2.0 * eig.eigenvalues().maxCoeff());
    }
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double change = 0.0;
        Eigen::Index off = 0;
        for (std::size_t g = 0; g < sizes.size(); off += sizes[g], ++g) {
            const auto Xg = X.middleCols(off, sizes[g]);
            const Vec old = b.segment(off, sizes[g]);
            const Vec step = old + 2.0 * Xg.transpose() * r / lip[g];
            const double nrm = step.norm();
            const double thr = lambda * w[g] / lip[g];
            const Vec next = nrm <= thr ? Vec::Zero(step.size()) : Vec(step * (1.0 - thr / nrm));
            const Vec d = next - old;
            r -= Xg * d;
            b.segment(off, sizes[g]) = next;
            change = std::max(change, d.cwiseAbs().maxCoeff());
        }
        if (change < tol)
            break;
    }
    return b;
}

/// max over the unit sphere of `norm` of <x, d>, in 2-d: dense angular grid
/// followed by golden-section refinement of the best cell.
inline double sup_over_ball_2d(const Eigen::Vector2d& x, const std::function<double(const Eigen::Vector2d&)>& norm,
                               int grid = 7200)
{
    const double two_pi = 2.0 * std::acos(-1.0);
    auto value = [&](double th) {
        const Eigen::Vector2d d(std::cos(th), std::sin(th));
        return x.dot(d) / norm(d);
    };
    int best = 0;
    double best_val = -inf;
    for (int i = 0; i < grid; ++i) {
        const double v = value(two_pi * i / grid);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    double lo = two_pi * (best - 1) / grid, hi = two_pi * (best + 1) / grid;
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double m1 = hi - g * (hi - lo), m2 = lo + g * (hi - lo);
    double f1 = value(m1), f2 = value(m2);
    for (int k = 0; k < 200; ++k) {
        if (f1 < f2) {
            lo = m1;
            m1 = m2;
            f1 = f2;
            m2 = lo + g * (hi - lo);
            f2 = value(m2);
        } else {
            hi = m2;
            m2 = m1;
            f2 = f1;
            m1 = hi - g * (hi - lo);
            f1 = value(m1);
        }
    }
    return std::max({best_val, f1, f2});
}

/// Random vector with occasional exact zeros and ties.
inline Vec random_vector(std::mt19937_64& rng, int p, double scale = 1.0)
{
    std::normal_distribution<double> normal(0.0, scale);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Vec x(p);
    for (int i = 0; i < p; ++i) {
        const double r = u(rng);
        x[i] = r < 0.1 ? 0.0 : (r < 0.15 && i > 0 ? -x[i - 1] : normal(rng));
    }
    return x;
}

} // namespace oracle
