#pragma once

#include <optional>

#include "dsparse/ds_norm.hpp"

namespace dsparse {

/// Gaussian random design: rows of X are N(0, Sigma), noise level sigma.
class DesignModel {
public:
    DesignModel(Matrix sigma_matrix, double noise_sigma);

    static DesignModel identity(int p, double noise_sigma);

    const Matrix& sigma_matrix() const noexcept { return sigma_; }
    double noise_sigma() const noexcept { return noise_sigma_; }
    /// Smallest eigenvalue of Sigma.
    double lambda_min() const noexcept { return lambda_min_; }
    int dim() const noexcept { return static_cast<int>(sigma_.rows()); }

private:
    Matrix sigma_;
    double noise_sigma_;
    double lambda_min_;
};

struct SparsityLevel {
    int s = 0;   ///< nonzero coefficients
    int s_G = 0; ///< nonzero groups
};

struct TheoryReport {
    double kappa1 = 0.0;
    double kappa2 = 0.0;
    /// sqrt(n)/4 * lambda_min(Sigma^(1/2)) - 3 kappa1 kappa2
    double re_constant = 0.0;
    double lambda_min_recommended = 0.0;
    double lambda_used = 0.0;
    /// ceil(144 kappa1^2 kappa2^2 / lambda_min(Sigma))
    long long n_min = 0;
    int n = 0;
    /// Bound on ||b_hat - b*||_2^2; empty when n <= n_min or re_constant <= 0.
    std::optional<double> l2_bound;

    bool precondition_violated() const noexcept { return !l2_bound.has_value(); }
};

double kappa1(const DsParams& params, const DesignModel& model);
double kappa2(const DsParams& params);

/// Smallest penalty level covered by the error bound.
double lambda_recommendation(const DsParams& params, int n, const DesignModel& model);

/// High-probability bound on ||X^T noise||_ds^* / n, evaluated in its own
/// 1/sqrt(n) form; equals lambda_recommendation / (2 n).
double noise_dual_bound(const DsParams& params, int n, const DesignModel& model);

TheoryReport l2_error_bound(const DsParams& params, const DesignModel& model, int n, double lambda,
                            const SparsityLevel& sparsity);

/// Inputs for the seven closed-form regimes. Case 1 uses p singleton groups
/// (group_sizes ignored); cases 2-4 force tau = 0; cases 5-7 use `tau`.
struct CaseInputs {
    std::vector<int> group_sizes;
    int p = 0;
    double tau = 0.5;
    /// Empty selects sqrt(p_g).
    std::vector<double> weights;
    int n = 100;
    double sigma = 1.0;
    /// Empty selects the identity.
    Matrix sigma_matrix;
    SparsityLevel sparsity;
};

struct CaseEvaluation {
    int case_id = 0;
    double tau = 0.0;
    double alpha = 0.0;
    double lambda_general = 0.0;
    /// The regime's own display for the penalty.
    double lambda_case = 0.0;
    /// Penalty at which the bounds are evaluated (half of lambda_case in case 1).
    double lambda_for_bound = 0.0;
    TheoryReport general;
    /// Closed-form squared bound where the regime states one with equality.
    std::optional<double> bound_case_exact;
    /// Rate expression (constant 1) for ||b_hat - b*||_2.
    double order_form = 0.0;
    /// sqrt(general bound) / order_form; empty when the general bound is.
    std::optional<double> order_factor;
};

/// Parameters the regime forces (tau, alpha, groups, weights).
DsParams case_params(int case_id, const CaseInputs& in);

CaseEvaluation case_specialization(int case_id, const CaseInputs& in);

} // namespace dsparse
