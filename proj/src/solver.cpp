#include "dsparse/solver.hpp"

#include <cmath>

namespace dsparse {

namespace {

struct GapEvaluation {
    double primal;
    double dual;
    double scaling;
};

// Primal/dual pair at b given the residual r = y - X b and X^T r.
GapEvaluation evaluate_gap(VectorCRef beta, VectorCRef residual, VectorCRef xt_residual,
                           const Problem& prob)
{
    const double lambda = prob.lambda;
    const double primal = residual.squaredNorm() + lambda * ds_norm(beta, prob.params);
    const double d = ds_dual_norm((2.0 / lambda) * xt_residual, prob.params);
    const double s = d > 1.0 ? 1.0 / d : 1.0;
    // lambda theta / 2 = s r
    const double dual = prob.y.squaredNorm() - (s * residual - prob.y).squaredNorm();
    return {primal, dual, s};
}

bool all_finite(MatrixCRef m) { return m.allFinite(); }

} // namespace

Problem::Problem(Matrix X_, Vector y_, double lambda_, DsParams params_)
    : X(std::move(X_)), y(std::move(y_)), lambda(lambda_), params(std::move(params_))
{
    if (X.rows() < 1)
        throw InvalidParameter("Problem: need at least one sample");
    if (X.cols() != params.dim())
        throw DimensionMismatch("Problem: X has " + std::to_string(X.cols())
                                + " columns but the group structure covers " + std::to_string(params.dim()));
    if (y.size() != X.rows())
        throw DimensionMismatch("Problem: y has length " + std::to_string(y.size()) + ", X has "
                                + std::to_string(X.rows()) + " rows");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidParameter("Problem: lambda must be positive and finite");
    if (!all_finite(X) || !all_finite(y))
        throw InputError("Problem: X and y must be finite");
}

double primal_objective(VectorCRef beta, const Problem& prob)
{
    if (beta.size() != prob.p())
        throw DimensionMismatch("primal_objective: beta has the wrong length");
    return (prob.y - prob.X * beta).squaredNorm() + prob.lambda * ds_norm(beta, prob.params);
}

double dual_objective(VectorCRef theta, const Problem& prob)
{
    if (theta.size() != prob.n())
        throw DimensionMismatch("dual_objective: theta has the wrong length");
    return prob.y.squaredNorm() - (0.5 * prob.lambda * theta - prob.y).squaredNorm();
}

DualCertificate dual_feasible_point(VectorCRef beta, const Problem& prob)
{
    if (beta.size() != prob.p())
        throw DimensionMismatch("dual_feasible_point: beta has the wrong length");
    const auto& params = prob.params;
    const auto& groups = params.groups();

    const Vector candidate = (2.0 / prob.lambda) * (prob.y - prob.X * beta);
    const Vector xt = prob.X.transpose() * candidate;
    const double d = ds_dual_norm(xt, params);

    DualCertificate cert;
    cert.scaling = d > 1.0 ? 1.0 / d : 1.0;
    cert.theta = cert.scaling * candidate;
    const Vector xt_theta = cert.scaling * xt;
    cert.u.reserve(static_cast<std::size_t>(groups.num_groups()));
    cert.v.reserve(static_cast<std::size_t>(groups.num_groups()));
    for (int g = 0; g < groups.num_groups(); ++g) {
        const Vector xg = groups.block(xt_theta, g);
        const double eps = params.epsilon(g);
        Vector u = eps == 0.0 ? Vector::Zero(xg.size())
                              : epsq_decompose(xg, EpsQ(eps, params.alpha_dual(g))).spiky;
        cert.v.push_back(xg - u);
        cert.u.push_back(std::move(u));
    }
    return cert;
}

double power_iteration_lambda_max(MatrixCRef X, int max_steps, double rel_tol)
{
    if (X.cols() == 0)
        return 0.0;
    Vector v = Vector::Constant(X.cols(), 1.0 / std::sqrt(static_cast<double>(X.cols())));
    double estimate = 0.0;
    for (int k = 0; k < max_steps; ++k) {
        Vector w = X.transpose() * (X * v);
        const double next = w.norm();
        if (next == 0.0)
            return 0.0;
        v = w / next;
        const bool done = std::abs(next - estimate) <= rel_tol * next;
        estimate = next;
        if (done)
            break;
    }
    return estimate;
}

SolveResult solve(const Problem& prob, const SolveOptions& options)
{
    if (!(options.tol > 0.0))
        throw InvalidParameter("solve: tol must be positive");
    if (options.max_iters < 1)
        throw InvalidParameter("solve: max_iters must be >= 1");
    if (options.step && !(*options.step > 0.0))
        throw InvalidParameter("solve: step must be positive");
    options.prox.validate();

    const Matrix& X = prob.X;
    const Vector& y = prob.y;
    const double lambda = prob.lambda;
    const auto& params = prob.params;
    const Eigen::Index p = prob.p();

    double lipschitz = options.step ? 1.0 / *options.step : 2.0 * power_iteration_lambda_max(X);
    if (!(lipschitz > 0.0))
        lipschitz = 1.0;

    // Gram form of the gradient when it is cheaper than two passes over X.
    const bool use_gram = prob.n() > p;
    Matrix gram;
    Vector xty;
    if (use_gram) {
        gram = X.transpose() * X;
        xty = X.transpose() * y;
    }
    auto gradient = [&](const Vector& b, const Vector& xb) -> Vector {
        if (use_gram)
            return 2.0 * (gram * b - xty);
        return 2.0 * (X.transpose() * (xb - y));
    };
    auto xt_residual = [&](const Vector& b, const Vector& residual) -> Vector {
        if (use_gram)
            return xty - gram * b;
        return X.transpose() * residual;
    };

    SolveResult result;
    Vector beta = Vector::Zero(p);
    Vector x_beta = Vector::Zero(prob.n());
    double objective = y.squaredNorm();

    auto check = [&](int iteration) {
        const Vector residual = y - x_beta;
        const auto ev = evaluate_gap(beta, residual, xt_residual(beta, residual), prob);
        result.primal_objective = ev.primal;
        result.dual_objective = ev.dual;
        result.duality_gap = ev.primal - ev.dual;
        result.iterations = iteration;
        if (options.record_trace)
            result.trace.push_back({iteration, ev.primal, ev.dual, result.duality_gap});
        return result.duality_gap <= options.tol;
    };

    if (check(0)) {
        result.converged = true;
        result.beta_hat = beta;
        return result;
    }

    Vector z = beta;
    Vector x_z = x_beta;
    double momentum_t = 1.0;
    bool momentum_active = false;

    for (int k = 1; k <= options.max_iters; ++k) {
        const Vector grad = gradient(z, x_z);
        const double f_z = (y - x_z).squaredNorm();

        Vector candidate;
        Vector x_candidate;
        double f_candidate = 0.0;
        for (;;) {
            candidate = prox_ds(z - grad / lipschitz, lambda / lipschitz, params, options.prox);
            x_candidate = X * candidate;
            f_candidate = (y - x_candidate).squaredNorm();
            const Vector step = candidate - z;
            const double model = f_z + grad.dot(step) + 0.5 * lipschitz * step.squaredNorm();
            if (f_candidate <= model + 1e-12 * std::max(1.0, f_z))
                break;
            lipschitz *= 2.0;
        }
        const double f_total = f_candidate + lambda * ds_norm(candidate, params);

        // A plain proximal step is monotone in exact arithmetic, so an increase
        // without momentum is rounding noise and the step is kept.
        if (f_total > objective && momentum_active) {
            ++result.restarts;
            momentum_t = 1.0;
            momentum_active = false;
            z = beta;
            x_z = x_beta;
            continue;
        }

        const double next_t = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * momentum_t * momentum_t));
        const double m = (momentum_t - 1.0) / next_t;
        z = candidate + m * (candidate - beta);
        x_z = x_candidate + m * (x_candidate - x_beta);
        beta = std::move(candidate);
        x_beta = std::move(x_candidate);
        objective = f_total;
        momentum_t = next_t;
        momentum_active = true;

        if (check(k)) {
            result.converged = true;
            break;
        }
    }
    result.beta_hat = beta;
    return result;
}

} // namespace dsparse
