#include "dsparse/prox.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>

#include <boost/math/tools/toms748_solve.hpp>

namespace dsparse {

namespace {

Vector clip(VectorCRef z, double r) { return z.cwiseMax(-r).cwiseMin(r); }

// Projection onto the l1 ball of radius r > 0 for ||z||_1 > r:
// soft-threshold at the theta with sum (|z_i| - theta)_+ = r.
Vector project_l1_ball(VectorCRef z, double r)
{
    std::vector<double> a(static_cast<std::size_t>(z.size()));
    for (Eigen::Index i = 0; i < z.size(); ++i)
        a[static_cast<std::size_t>(i)] = std::abs(z[i]);
    std::sort(a.begin(), a.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) {
        cumsum += a[k];
        const double candidate = (cumsum - r) / static_cast<double>(k + 1);
        if (k + 1 == a.size() || candidate >= a[k + 1]) {
            theta = candidate;
            break;
        }
    }
    return soft_threshold(z, std::max(theta, 0.0));
}

// General 1 < q < inf. KKT: p_i + mu p_i^(q-1) = |z_i|, with mu > 0 chosen so
// that ||p||_q = r. Works on magnitudes scaled to unit max.
Vector project_lq_general(VectorCRef z, double q, double r, double tol)
{
    using boost::math::tools::toms748_solve;
    const double m = z.cwiseAbs().maxCoeff();
    const Vector a = z.cwiseAbs() / m;
    const double radius = r / m;
    const Eigen::Index n = a.size();

    auto inner_tol = boost::math::tools::eps_tolerance<double>(52);
    auto outer_tol = [tol](double lo, double hi) {
        return std::abs(hi - lo) <= tol * std::max(std::abs(lo), std::abs(hi));
    };

    Vector p(n);
    auto solve_coordinates = [&](double mu) {
        for (Eigen::Index i = 0; i < n; ++i) {
            const double ai = a[i];
            if (ai == 0.0) {
                p[i] = 0.0;
                continue;
            }
            auto phi = [&](double x) { return x + mu * std::pow(x, q - 1.0) - ai; };
            std::uintmax_t iters = 200;
            const auto [lo, hi] = toms748_solve(phi, 0.0, ai, -ai, mu * std::pow(ai, q - 1.0),
                                                inner_tol, iters);
            p[i] = 0.5 * (lo + hi);
        }
    };
    auto excess = [&](double mu) {
        solve_coordinates(mu);
        return lq_norm(p, q) - radius;
    };

    // p_i <= (a_i / mu)^(1/(q-1)) gives a multiplier with ||p||_q <= radius.
    const Vector powered = a.array().pow(1.0 / (q - 1.0));
    double mu_hi = std::pow(lq_norm(powered, q) / radius, q - 1.0);
    double f_hi = excess(mu_hi);
    if (f_hi >= 0.0)
        return (p.array() * z.array().sign()).matrix() * m;

    std::uintmax_t iters = 500;
    const auto [lo, hi] = toms748_solve(excess, 0.0, mu_hi, lq_norm(a, q) - radius, f_hi, outer_tol, iters);
    excess(hi);
    return (p.array() * z.array().sign()).matrix() * m;
}

Vector group_shrink(VectorCRef z, double a)
{
    const double nrm = z.norm();
    if (nrm <= a)
        return Vector::Zero(z.size());
    return z * (1.0 - a / nrm);
}

} // namespace

void ProxSettings::validate() const
{
    if (max_alt_iters < 1)
        throw InvalidParameter("ProxSettings: max_alt_iters must be >= 1");
    if (!(alt_tol > 0.0) || !(lq_proj_tol > 0.0))
        throw InvalidParameter("ProxSettings: tolerances must be positive");
}

Vector project_lq_ball(VectorCRef z, double q, double r, double tol)
{
    if (!(r >= 0.0))
        throw InvalidParameter("project_lq_ball: radius must be nonnegative");
    if (!(q >= 1.0))
        throw InvalidParameter("project_lq_ball: exponent must be >= 1");
    if (z.size() == 0)
        return Vector(0);
    if (q == kInf)
        return clip(z, r);
    if (lq_norm(z, q) <= r)
        return z;
    if (r == 0.0)
        return Vector::Zero(z.size());
    if (q == 2.0)
        return z * (r / z.norm());
    if (q == 1.0)
        return project_l1_ball(z, r);
    return project_lq_general(z, q, r, tol);
}

MinkowskiProjection project_minkowski_sum(VectorCRef z, double q, double r1, double r2,
                                          const ProxSettings& settings,
                                          const std::optional<Vector>& initial_v)
{
    settings.validate();
    if (!(r1 >= 0.0) || !(r2 >= 0.0))
        throw InvalidParameter("project_minkowski_sum: radii must be nonnegative");
    if (initial_v && initial_v->size() != z.size())
        throw DimensionMismatch("project_minkowski_sum: initial_v has the wrong length");

    MinkowskiProjection out;
    out.v = initial_v ? clip(*initial_v, r2) : clip(z, r2);
    out.u = Vector::Zero(z.size());
    double previous = (z - out.v).squaredNorm();
    double decrease = 0.0;
    for (int sweep = 1; sweep <= settings.max_alt_iters; ++sweep) {
        out.u = project_lq_ball(z - out.v, q, r1, settings.lq_proj_tol);
        out.v = clip(z - out.u, r2);
        const double current = (z - out.u - out.v).squaredNorm();
        decrease = previous - current;
        previous = current;
        out.sweeps = sweep;
        // The first sweep only establishes a baseline for u.
        if (sweep > 1 && decrease < settings.alt_tol)
            return out;
    }
    throw IterationLimitError("project_minkowski_sum: no convergence within "
                                  + std::to_string(settings.max_alt_iters) + " sweeps",
                              out.u, out.v, decrease);
}

Vector prox_group(VectorCRef z, double t, double tau, double w, double alpha,
                  const ProxSettings& settings, ProxRoute route)
{
    if (!(t >= 0.0))
        throw InvalidParameter("prox_group: step t must be nonnegative");
    if (!(tau >= 0.0 && tau <= 1.0) || !(w > 0.0) || !(alpha >= 1.0))
        throw InvalidParameter("prox_group: invalid (tau, w, alpha)");
    if (t == 0.0)
        return z;
    if (route == ProxRoute::Auto) {
        if (tau == 1.0)
            return soft_threshold(z, t);
        if (alpha == 1.0)
            return soft_threshold(z, t * (tau + (1.0 - tau) * w));
        if (alpha == 2.0)
            return group_shrink(soft_threshold(z, t * tau), t * (1.0 - tau) * w);
    }
    // Moreau: prox = z - projection onto t * {dual ball}, and the dual ball of
    // tau ||.||_1 + (1 - tau) w ||.||_alpha is the sum of an l_{alpha*} ball of
    // radius (1 - tau) w and an l_inf ball of radius tau.
    const auto proj = project_minkowski_sum(z, conjugate_exponent(alpha), t * (1.0 - tau) * w,
                                            t * tau, settings);
    return z - proj.u - proj.v;
}

Vector prox_ds(VectorCRef z, double t, const DsParams& params, const ProxSettings& settings,
               ProxRoute route)
{
    const auto& groups = params.groups();
    if (z.size() != groups.dim())
        throw DimensionMismatch("prox_ds: vector length does not match the group structure");
    Vector out(z.size());
    for (int g = 0; g < groups.num_groups(); ++g)
        groups.block(out, g) = prox_group(groups.block(z, g), t, params.tau(), params.weight(g),
                                          params.alpha(g), settings, route);
    return out;
}

Vector project_ds_dual_ball(VectorCRef z, double t, const DsParams& params,
                            const ProxSettings& settings)
{
    const auto& groups = params.groups();
    if (z.size() != groups.dim())
        throw DimensionMismatch("project_ds_dual_ball: vector length does not match the group structure");
    if (!(t >= 0.0))
        throw InvalidParameter("project_ds_dual_ball: radius must be nonnegative");
    Vector out(z.size());
    const double tau = params.tau();
    for (int g = 0; g < groups.num_groups(); ++g) {
        const auto proj = project_minkowski_sum(groups.block(z, g), params.alpha_dual(g),
                                                t * (1.0 - tau) * params.weight(g), t * tau, settings);
        groups.block(out, g) = proj.u + proj.v;
    }
    return out;
}

} // namespace dsparse
