#include "dsparse/norms.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>

namespace dsparse {

namespace {

void require_valid_exponent(double q, const char* who)
{
    if (!(q >= 1.0))
        throw InvalidParameter(std::string(who) + ": exponent q must be >= 1 (got "
                               + std::to_string(q) + ")");
}

void require_nonempty(VectorCRef x, const char* who)
{
    if (x.size() == 0)
        throw InvalidParameter(std::string(who) + ": empty vector");
}

// ||(a - shift)_+||_q for a >= 0 component-wise, finite q.
double positive_part_norm(const Vector& a, double shift, double q)
{
    double top = 0.0;
    for (double ai : a)
        top = std::max(top, ai - shift);
    if (top <= 0.0)
        return 0.0;
    if (q == 1.0) {
        double s = 0.0;
        for (double ai : a)
            s += std::max(ai - shift, 0.0);
        return s;
    }
    if (q == 2.0) {
        double s = 0.0;
        for (double ai : a) {
            const double d = std::max((ai - shift) / top, 0.0);
            s += d * d;
        }
        return top * std::sqrt(s);
    }
    double s = 0.0;
    for (double ai : a) {
        const double d = ai - shift;
        if (d > 0.0)
            s += std::pow(d / top, q);
    }
    return top * std::pow(s, 1.0 / q);
}

// Root of h(v) = ||(a - (1-eps) v)_+||_q - eps v for a >= 0, max(a) == 1.
double bisect_root(const Vector& a, double eps, double q)
{
    const double c = 1.0 - eps;
    auto h = [&](double v) { return positive_part_norm(a, c * v, q) - eps * v; };

    const double pq = std::pow(static_cast<double>(a.size()), 1.0 / q);
    const double lq = positive_part_norm(a, 0.0, q);
    const double denom = pq * c + eps;
    double lo = std::max(1.0, lq / denom) * (1.0 - 1e-12);
    double hi = std::min(lq, pq / denom) * (1.0 + 1e-12);
    if (!(h(lo) >= 0.0 && h(hi) <= 0.0)) {
        // h(0) = ||a||_q > 0 and h(1/c) = -eps/c < 0 always bracket the root.
        lo = 0.0;
        hi = 1.0 / c;
    }
    for (int it = 0; it < 400 && hi - lo > 1e-13 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (h(mid) > 0.0)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

// Exact root for q = 1 or q = 2 by scanning the breakpoints a_(k) / (1 - eps)
// of the sorted magnitudes; on each segment h is linear (q = 1) or the root
// of a quadratic (q = 2).
double scan_root(const Vector& a, double eps, double q)
{
    std::vector<double> s(a.begin(), a.end());
    std::sort(s.begin(), s.end(), std::greater<>());
    const double c = 1.0 - eps;
    const std::size_t p = s.size();
    constexpr double slack = 1e-12;
    double s1 = 0.0;
    double s2 = 0.0;
    // Running mean and sum of squared deviations of the active magnitudes, so
    // that k s2 - s1^2 = k m2 is formed without cancellation.
    double mean = 0.0;
    double m2 = 0.0;
    for (std::size_t k = 1; k <= p; ++k) {
        const double ak = s[k - 1];
        if (ak <= 0.0)
            break;
        s1 += ak;
        s2 += ak * ak;
        const double delta = ak - mean;
        mean += delta / static_cast<double>(k);
        m2 += delta * (ak - mean);
        const double next = k < p ? s[k] : 0.0;
        double v;
        if (q == 1.0) {
            v = s1 / (static_cast<double>(k) * c + eps);
        } else {
            // (k c^2 - eps^2) v^2 - 2 c s1 v + s2 = 0, smaller root in stable form.
            const double disc = eps * eps * s2 - c * c * static_cast<double>(k) * m2;
            if (disc < 0.0)
                continue;
            v = s2 / (c * s1 + std::sqrt(disc));
        }
        const double cut = c * v;
        if (cut >= next * (1.0 - slack) && cut <= ak * (1.0 + slack))
            return v;
    }
    return bisect_root(a, eps, q);
}

// Magnitudes scaled to unit max; returns the scale.
double unit_magnitudes(VectorCRef x, Vector& a)
{
    a = x.cwiseAbs();
    const double m = a.maxCoeff();
    if (m > 0.0)
        a /= m;
    return m;
}

} // namespace

double conjugate_exponent(double q)
{
    require_valid_exponent(q, "conjugate_exponent");
    if (q == 1.0)
        return kInf;
    if (q == kInf)
        return 1.0;
    return q / (q - 1.0);
}

double lq_norm(VectorCRef x, double q)
{
    require_valid_exponent(q, "lq_norm");
    require_nonempty(x, "lq_norm");
    const double m = x.cwiseAbs().maxCoeff();
    if (q == kInf || m == 0.0)
        return m;
    if (q == 1.0)
        return x.cwiseAbs().sum();
    if (q == 2.0)
        return m * (x / m).norm();
    double s = 0.0;
    for (double xi : x)
        s += std::pow(std::abs(xi) / m, q);
    return m * std::pow(s, 1.0 / q);
}

Vector soft_threshold(VectorCRef x, double a)
{
    if (!(a >= 0.0))
        throw InvalidParameter("soft_threshold: threshold must be nonnegative");
    Vector out(x.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double mag = std::abs(x[i]) - a;
        out[i] = mag > 0.0 ? std::copysign(mag, x[i]) : 0.0;
    }
    return out;
}

EpsQ::EpsQ(double epsilon, double q) : epsilon_(epsilon), q_(q)
{
    if (!(epsilon > 0.0 && epsilon <= 1.0))
        throw InvalidParameter("EpsQ: epsilon must lie in (0, 1] (got " + std::to_string(epsilon)
                               + "); use the l_inf norm for the epsilon -> 0 limit");
    require_valid_exponent(q, "EpsQ");
}

double epsq_norm(VectorCRef x, const EpsQ& p)
{
    require_nonempty(x, "epsq_norm");
    if (p.q_is_inf())
        return lq_norm(x, kInf);
    if (p.epsilon() == 1.0)
        return lq_norm(x, p.q());
    Vector a;
    const double m = unit_magnitudes(x, a);
    if (m == 0.0)
        return 0.0;
    if (p.q() == 1.0 || p.q() == 2.0)
        return m * scan_root(a, p.epsilon(), p.q());
    return m * bisect_root(a, p.epsilon(), p.q());
}

double epsq_norm_bisection(VectorCRef x, const EpsQ& p)
{
    require_nonempty(x, "epsq_norm_bisection");
    if (p.q_is_inf())
        return lq_norm(x, kInf);
    if (p.epsilon() == 1.0)
        return lq_norm(x, p.q());
    Vector a;
    const double m = unit_magnitudes(x, a);
    if (m == 0.0)
        return 0.0;
    return m * bisect_root(a, p.epsilon(), p.q());
}

Decomposition epsq_decompose(VectorCRef x, const EpsQ& p)
{
    Decomposition d;
    d.norm_value = epsq_norm(x, p);
    d.spiky = soft_threshold(x, (1.0 - p.epsilon()) * d.norm_value);
    d.flat = x - d.spiky;
    return d;
}

double epsq_dual_norm(VectorCRef y, const EpsQ& p)
{
    require_nonempty(y, "epsq_dual_norm");
    const double l1 = lq_norm(y, 1.0);
    if (p.q_is_inf())
        return l1;
    const double eps = p.epsilon();
    return eps * lq_norm(y, conjugate_exponent(p.q())) + (1.0 - eps) * l1;
}

std::vector<Eigen::Vector2d> epsq_ball_boundary(const EpsQ& p, int resolution)
{
    if (resolution < 8)
        throw InvalidParameter("epsq_ball_boundary: resolution must be >= 8");
    std::vector<Eigen::Vector2d> points;
    points.reserve(static_cast<std::size_t>(resolution));
    for (int i = 0; i < resolution; ++i) {
        const double theta = 2.0 * std::numbers::pi * i / resolution;
        // Exact axis directions keep the e_i points exact.
        Eigen::Vector2d d;
        switch ((4 * i) % resolution == 0 ? (4 * i) / resolution : -1) {
        case 0: d = {1.0, 0.0}; break;
        case 1: d = {0.0, 1.0}; break;
        case 2: d = {-1.0, 0.0}; break;
        case 3: d = {0.0, -1.0}; break;
        default: d = {std::cos(theta), std::sin(theta)}; break;
        }
        points.emplace_back(d / epsq_norm(d, p));
    }
    return points;
}

} // namespace dsparse
