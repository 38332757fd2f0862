#pragma once

#include <limits>
#include <vector>

#include <Eigen/Core>

#include "dsparse/errors.hpp"

namespace dsparse {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorCRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixCRef = Eigen::Ref<const Eigen::MatrixXd>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Hölder conjugate q/(q-1), with 1 <-> inf.
double conjugate_exponent(double q);

/// (sum |x_i|^q)^(1/q), or max |x_i| when q is infinite. Requires q >= 1.
double lq_norm(VectorCRef x, double q);

/// Component-wise sgn(x_i) (|x_i| - a)_+. Entries with |x_i| == a map to 0.
Vector soft_threshold(VectorCRef x, double a);

/// Parameters (epsilon, q) of the eps-q norm family.
///
/// The value of the norm at x is the unique v >= 0 with
/// || S_{(1-eps) v}(x) ||_q = eps * v. epsilon = 1 gives the l_q norm and the
/// epsilon -> 0 limit is the l_inf norm; that limit is not representable here,
/// callers wanting it use lq_norm(x, kInf) directly.
class EpsQ {
public:
    EpsQ(double epsilon, double q);

    double epsilon() const noexcept { return epsilon_; }
    double q() const noexcept { return q_; }
    bool q_is_inf() const noexcept { return q_ == kInf; }

private:
    double epsilon_;
    double q_;
};

/// x = spiky + flat with ||spiky||_q = eps * v and ||flat||_inf = (1 - eps) * v.
struct Decomposition {
    Vector spiky;
    Vector flat;
    double norm_value = 0.0;
};

/// Value of the eps-q norm. Closed forms for eps = 1 and q = inf, exact
/// breakpoint scans for q in {1, 2}, bisection otherwise.
double epsq_norm(VectorCRef x, const EpsQ& p);

/// Bisection root of the defining equation for any q; the cross-check route
/// for the exact q = 1 and q = 2 scans.
double epsq_norm_bisection(VectorCRef x, const EpsQ& p);

Decomposition epsq_decompose(VectorCRef x, const EpsQ& p);

/// eps ||y||_{q/(q-1)} + (1 - eps) ||y||_1, or ||y||_1 for q = inf.
double epsq_dual_norm(VectorCRef y, const EpsQ& p);

/// Points on the 2-d unit sphere {||x||_{eps q} = 1}, one per direction
/// angle 2 pi i / resolution, i = 0 .. resolution - 1.
std::vector<Eigen::Vector2d> epsq_ball_boundary(const EpsQ& p, int resolution);

} // namespace dsparse
