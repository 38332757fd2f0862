#pragma once

#include <optional>
#include <stdexcept>

#include "dsparse/ds_norm.hpp"

namespace dsparse {

struct ProxSettings {
    int max_alt_iters = 10000;
    /// Stop alternating once the squared distance decreases by less than this.
    double alt_tol = 1e-12;
    /// Relative bracket width for the Lagrange multiplier of general l_q balls.
    double lq_proj_tol = 1e-14;

    void validate() const;
};

/// The alternating Minkowski projection ran out of iterations.
class IterationLimitError : public std::runtime_error {
public:
    IterationLimitError(const std::string& what, Vector last_u, Vector last_v, double residual)
        : std::runtime_error(what), last_u(std::move(last_u)), last_v(std::move(last_v)),
          residual(residual)
    {
    }

    Vector last_u;
    Vector last_v;
    /// Objective decrease of the final sweep.
    double residual;
};

/// Euclidean projection onto {u : ||u||_q <= r}. Closed forms for q in {2, inf},
/// sort-and-threshold for q = 1, nested scalar root finding otherwise.
Vector project_lq_ball(VectorCRef z, double q, double r, double tol = ProxSettings{}.lq_proj_tol);

struct MinkowskiProjection {
    Vector u; ///< ||u||_q <= r1
    Vector v; ///< ||v||_inf <= r2
    int sweeps = 0;
};

/// Projection of z onto {u + v : ||u||_q <= r1, ||v||_inf <= r2} by exact
/// alternating minimisation over u and v. The first sweep starts from
/// `initial_v`, or from clip(z, +-r2) when absent.
MinkowskiProjection project_minkowski_sum(VectorCRef z, double q, double r1, double r2,
                                          const ProxSettings& settings = {},
                                          const std::optional<Vector>& initial_v = std::nullopt);

enum class ProxRoute {
    Auto,    ///< closed forms for tau = 1, alpha in {1, 2}; Minkowski route otherwise
    Generic, ///< always z - projection onto the scaled dual ball
};

/// argmin_b 1/2 ||z - b||^2 + t (tau ||b||_1 + (1 - tau) w ||b||_alpha).
Vector prox_group(VectorCRef z, double t, double tau, double w, double alpha,
                  const ProxSettings& settings = {}, ProxRoute route = ProxRoute::Auto);

/// Prox of t * ||.||_ds, applied group by group.
Vector prox_ds(VectorCRef z, double t, const DsParams& params, const ProxSettings& settings = {},
               ProxRoute route = ProxRoute::Auto);

/// Projection of z onto {x : ||x||_ds^* <= t}, i.e. z - prox_ds(z, t).
Vector project_ds_dual_ball(VectorCRef z, double t, const DsParams& params,
                            const ProxSettings& settings = {});

} // namespace dsparse
