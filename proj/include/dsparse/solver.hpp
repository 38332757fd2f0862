#pragma once

#include <optional>
#include <vector>

#include "dsparse/prox.hpp"

namespace dsparse {

/// minimise ||y - X b||_2^2 + lambda ||b||_ds
struct Problem {
    Problem(Matrix X, Vector y, double lambda, DsParams params);

    Matrix X;
    Vector y;
    double lambda;
    DsParams params;

    Eigen::Index n() const noexcept { return X.rows(); }
    Eigen::Index p() const noexcept { return X.cols(); }
};

/// Feasible point of the dual program: u_g + v_g = X_(g)^T theta,
/// ||u_g||_{alpha*_g} <= eps_g c_g and ||v_g||_inf <= (1 - eps_g) c_g.
struct DualCertificate {
    Vector theta;
    std::vector<Vector> u;
    std::vector<Vector> v;
    /// Factor applied to the raw candidate 2 (y - X b) / lambda.
    double scaling = 1.0;
};

struct TraceEntry {
    int iteration;
    double primal;
    double dual;
    double gap;
};

struct SolveOptions {
    double tol = 1e-8;
    int max_iters = 20000;
    /// Gradient step; defaults to 1 / (2 lambda_max(X^T X)) from power iteration.
    std::optional<double> step;
    bool record_trace = false;
    ProxSettings prox;
};

struct SolveResult {
    Vector beta_hat;
    double primal_objective = 0.0;
    double dual_objective = 0.0;
    double duality_gap = 0.0;
    int iterations = 0;
    bool converged = false;
    int restarts = 0;
    std::vector<TraceEntry> trace;
};

double primal_objective(VectorCRef beta, const Problem& prob);

/// ||y||^2 - ||lambda theta / 2 - y||^2.
double dual_objective(VectorCRef theta, const Problem& prob);

/// Rescales theta = 2 (y - X b) / lambda into the dual feasible set and splits
/// each X_(g)^T theta with the eps-decomposition.
DualCertificate dual_feasible_point(VectorCRef beta, const Problem& prob);

/// Largest eigenvalue of X^T X from at most `max_steps` power iterations.
double power_iteration_lambda_max(MatrixCRef X, int max_steps = 20, double rel_tol = 1e-6);

/// Accelerated proximal gradient with adaptive restart; stops on the duality gap.
SolveResult solve(const Problem& prob, const SolveOptions& options = {});

} // namespace dsparse
