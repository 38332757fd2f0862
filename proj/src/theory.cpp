#include "dsparse/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

namespace dsparse {

namespace {

double positive(double x) { return x > 0.0 ? x : 0.0; }

// 1 / alpha with 1 / inf = 0.
double reciprocal(double alpha) { return alpha == kInf ? 0.0 : 1.0 / alpha; }

double log_or_zero(double x) { return x > 1.0 ? std::log(x) : 0.0; }

void require_model_dim(const DsParams& params, const DesignModel& model)
{
    if (model.dim() != params.dim())
        throw DimensionMismatch("theory: Sigma is " + std::to_string(model.dim()) + "x"
                                + std::to_string(model.dim()) + " but the groups cover "
                                + std::to_string(params.dim()) + " coordinates");
}

// The factor multiplying the min(...) term in the penalty level.
double penalty_prefactor(const DsParams& params, int g)
{
    const double pg = params.groups().size(g);
    const double eps = params.epsilon(g);
    const double inv_a = reciprocal(params.alpha(g));
    return eps * std::pow(pg, positive(inv_a - 0.5)) + (1.0 - eps) * std::sqrt(pg);
}

// min( p^{(1/2-1/a)_+} sqrt(p), p^{1/a*} sqrt(2 log p) / (p^{1/a*} (1 - eps) + eps) );
// the penalty level multiplies this by sqrt(n).
double penalty_min_term(const DsParams& params, int g)
{
    const double pg = params.groups().size(g);
    const double eps = params.epsilon(g);
    const double inv_a = reciprocal(params.alpha(g));
    const double inv_a_dual = 1.0 - inv_a;
    const double first = std::pow(pg, positive(0.5 - inv_a)) * std::sqrt(pg);
    const double pad = std::pow(pg, inv_a_dual);
    const double second = pad * std::sqrt(2.0 * log_or_zero(pg)) / (pad * (1.0 - eps) + eps);
    return std::min(first, second);
}

double sparsity_factor(const DsParams& params, const SparsityLevel& sp)
{
    double worst = 0.0;
    for (int g = 0; g < params.num_groups(); ++g) {
        const double pg = params.groups().size(g);
        worst = std::max(worst, params.weight(g) * std::pow(pg, positive(reciprocal(params.alpha(g)) - 0.5)));
    }
    const double tau = params.tau();
    return tau * std::sqrt(static_cast<double>(sp.s)) + (1.0 - tau) * std::sqrt(static_cast<double>(sp.s_G)) * worst;
}

void require_sparsity(const DsParams& params, const SparsityLevel& sp)
{
    if (sp.s < 0 || sp.s_G < 0)
        throw InvalidParameter("sparsity: s and s_G must be nonnegative");
    if (sp.s > params.dim() || sp.s_G > params.num_groups())
        throw InvalidParameter("sparsity: s must be <= p and s_G <= G");
    if ((sp.s == 0) != (sp.s_G == 0) || sp.s < sp.s_G)
        throw InvalidParameter("sparsity: every nonzero group holds at least one nonzero coefficient");
    std::vector<int> sizes = params.groups().sizes();
    std::sort(sizes.begin(), sizes.end(), std::greater<>());
    long long capacity = 0;
    for (int g = 0; g < sp.s_G; ++g)
        capacity += sizes[static_cast<std::size_t>(g)];
    if (sp.s > capacity)
        throw InvalidParameter("sparsity: s exceeds the size of the s_G largest groups");
}

} // namespace

DesignModel::DesignModel(Matrix sigma_matrix, double noise_sigma)
    : sigma_(std::move(sigma_matrix)), noise_sigma_(noise_sigma)
{
    if (sigma_.rows() < 1 || sigma_.rows() != sigma_.cols())
        throw InvalidParameter("DesignModel: Sigma must be a nonempty square matrix");
    if (!sigma_.allFinite())
        throw InputError("DesignModel: Sigma must be finite");
    if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw NotSpdError("DesignModel: Sigma is not symmetric");
    if (!(noise_sigma_ > 0.0) || !std::isfinite(noise_sigma_))
        throw InvalidParameter("DesignModel: noise sigma must be positive");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma_, Eigen::EigenvaluesOnly);
    lambda_min_ = eig.eigenvalues().minCoeff();
    if (!(lambda_min_ > 0.0))
        throw NotSpdError("DesignModel: Sigma is not positive definite");
}

DesignModel DesignModel::identity(int p, double noise_sigma)
{
    return DesignModel(Matrix::Identity(p, p), noise_sigma);
}

double kappa1(const DsParams& params, const DesignModel& model)
{
    require_model_dim(params, model);
    const auto& groups = params.groups();
    const Matrix& sigma = model.sigma_matrix();
    double best = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g) {
        const double pg = groups.size(g);
        const int off = groups.offset(g);
        const auto diag = sigma.diagonal().segment(off, groups.size(g));
        const double c = params.scale(g);
        const double eps = params.epsilon(g);
        const double inv_a = reciprocal(params.alpha(g));
        const double trace_branch = std::pow(pg, positive(0.5 - inv_a)) * std::sqrt(diag.sum()) / c;
        const double max_branch = 3.0 * std::sqrt(log_or_zero(pg) * diag.maxCoeff())
                                  / (c * (1.0 - eps + eps * std::pow(pg, inv_a - 1.0)));
        best = std::max(best, std::min(trace_branch, max_branch));
    }
    return best;
}

double kappa2(const DsParams& params)
{
    const auto& groups = params.groups();
    const double tau = params.tau();
    double best = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g) {
        const double pg = groups.size(g);
        const double inv_a = reciprocal(params.alpha(g));
        best = std::max(best, tau * std::sqrt(pg) + (1.0 - tau) * params.weight(g) * std::pow(pg, positive(inv_a - 0.5)));
    }
    return std::sqrt(static_cast<double>(groups.num_groups())) * best;
}

double lambda_recommendation(const DsParams& params, int n, const DesignModel& model)
{
    require_model_dim(params, model);
    if (n < 1)
        throw InvalidParameter("lambda_recommendation: n must be >= 1");
    const double nn = n;
    const double search = std::sqrt(6.0 * nn * log_or_zero(params.num_groups()));
    double best = 0.0;
    for (int g = 0; g < params.num_groups(); ++g) {
        const double term = penalty_prefactor(params, g) * std::sqrt(nn) * penalty_min_term(params, g) + search;
        best = std::max(best, term / params.scale(g));
    }
    return 2.0 * model.noise_sigma() * best;
}

double noise_dual_bound(const DsParams& params, int n, const DesignModel& model)
{
    require_model_dim(params, model);
    if (n < 1)
        throw InvalidParameter("noise_dual_bound: n must be >= 1");
    const double nn = n;
    const double search = std::sqrt(6.0 * log_or_zero(params.num_groups()) / nn);
    double best = 0.0;
    for (int g = 0; g < params.num_groups(); ++g) {
        const double term = penalty_prefactor(params, g) / std::sqrt(nn) * penalty_min_term(params, g) + search;
        best = std::max(best, term / params.scale(g));
    }
    return model.noise_sigma() * best;
}

TheoryReport l2_error_bound(const DsParams& params, const DesignModel& model, int n, double lambda,
                            const SparsityLevel& sparsity)
{
    require_model_dim(params, model);
    if (!(lambda > 0.0))
        throw InvalidParameter("l2_error_bound: lambda must be positive");
    if (n < 1)
        throw InvalidParameter("l2_error_bound: n must be >= 1");
    require_sparsity(params, sparsity);

    TheoryReport r;
    r.n = n;
    r.kappa1 = kappa1(params, model);
    r.kappa2 = kappa2(params);
    r.lambda_min_recommended = lambda_recommendation(params, n, model);
    r.lambda_used = lambda;
    const double lmin = model.lambda_min();
    r.re_constant = std::sqrt(static_cast<double>(n)) / 4.0 * std::sqrt(lmin) - 3.0 * r.kappa1 * r.kappa2;
    const double threshold = 144.0 * r.kappa1 * r.kappa1 * r.kappa2 * r.kappa2 / lmin;
    r.n_min = threshold < 9e18 ? static_cast<long long>(std::ceil(threshold))
                               : std::numeric_limits<long long>::max();
    if (static_cast<long long>(n) > r.n_min && r.re_constant > 0.0) {
        const double f = sparsity_factor(params, sparsity);
        const double re2 = r.re_constant * r.re_constant;
        r.l2_bound = 4.0 * lambda * lambda * f * f / (re2 * re2);
    }
    return r;
}

DsParams case_params(int case_id, const CaseInputs& in)
{
    if (case_id < 1 || case_id > 7)
        throw InvalidParameter("case_specialization: case id must be in 1..7");
    if (case_id == 1) {
        if (in.p < 1)
            throw InvalidParameter("case 1: p must be >= 1");
        GroupStructure singletons(std::vector<int>(static_cast<std::size_t>(in.p), 1));
        return DsParams(singletons, 1.0, std::vector<double>(static_cast<std::size_t>(in.p), 2.0));
    }
    GroupStructure groups(in.group_sizes);
    const double tau = case_id <= 4 ? 0.0 : in.tau;
    if (case_id >= 5 && !(tau > 0.0 && tau < 1.0))
        throw InvalidParameter("cases 5-7 need tau strictly inside (0, 1)");
    const double alpha = (case_id == 2 || case_id == 5) ? 1.0 : (case_id == 3 || case_id == 6) ? 2.0 : kInf;
    std::vector<double> alphas(static_cast<std::size_t>(groups.num_groups()), alpha);
    if (in.weights.empty())
        return DsParams(groups, tau, alphas);
    return DsParams(groups, tau, in.weights, alphas);
}

CaseEvaluation case_specialization(int case_id, const CaseInputs& in)
{
    const DsParams params = case_params(case_id, in);
    const auto& groups = params.groups();
    const int p = params.dim();
    const Matrix sigma_matrix = in.sigma_matrix.size() == 0 ? Matrix::Identity(p, p) : in.sigma_matrix;
    const DesignModel model(sigma_matrix, in.sigma);
    const double n = in.n;
    const double sigma = in.sigma;
    const double log_g = log_or_zero(groups.num_groups());
    const double tau = params.tau();

    CaseEvaluation ev;
    ev.case_id = case_id;
    ev.tau = tau;
    ev.alpha = params.alpha(0);
    ev.lambda_general = lambda_recommendation(params, in.n, model);

    double max_p = 0.0;
    for (int s : groups.sizes())
        max_p = std::max(max_p, static_cast<double>(s));

    // Regime displays; each is a max over groups.
    double lam = 0.0;
    double max_w2p = 0.0, max_w2 = 0.0, max_w = 0.0, max_wsqrtp = 0.0;
    double max_plogp = 0.0, max_p2logp = 0.0, max_mix = 0.0, max_mix_p = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g) {
        const double pg = groups.size(g);
        const double w = params.weight(g);
        const double c = params.scale(g);
        const double eps = params.epsilon(g);
        const double mix = eps + (1.0 - eps) * std::sqrt(pg);
        max_w2p = std::max(max_w2p, w * w * pg);
        max_w2 = std::max(max_w2, w * w);
        max_w = std::max(max_w, w);
        max_wsqrtp = std::max(max_wsqrtp, w * std::sqrt(pg));
        max_plogp = std::max(max_plogp, pg * log_or_zero(pg));
        max_p2logp = std::max(max_p2logp, pg * pg * log_or_zero(pg));
        max_mix = std::max(max_mix, mix);
        max_mix_p = std::max(max_mix_p, mix * pg);
        double term = 0.0;
        switch (case_id) {
        case 2: term = (std::sqrt(2.0 * pg * log_or_zero(pg)) + std::sqrt(6.0 * log_g)) / w; break;
        case 3: term = (std::sqrt(pg) + std::sqrt(6.0 * log_g)) / w; break;
        case 4: term = (pg + std::sqrt(6.0 * log_g)) / w; break;
        case 5: term = (std::sqrt(2.0 * pg * log_or_zero(pg)) + std::sqrt(6.0 * log_g)) / c; break;
        case 6: term = (mix * std::sqrt(pg) + std::sqrt(6.0 * log_g)) / c; break;
        case 7: term = (mix * pg + std::sqrt(6.0 * log_g)) / c; break;
        default: break;
        }
        lam = std::max(lam, term);
    }
    if (case_id == 1)
        ev.lambda_case = 2.0 * sigma * std::sqrt(6.0 * n * std::log(static_cast<double>(p)));
    else
        ev.lambda_case = 2.0 * sigma * std::sqrt(n) * lam;
    ev.lambda_for_bound = case_id == 1 ? 0.5 * ev.lambda_case : ev.lambda_case;

    SparsityLevel sp = in.sparsity;
    if (case_id == 1)
        sp.s_G = sp.s;
    ev.general = l2_error_bound(params, model, in.n, ev.lambda_for_bound, sp);

    const double s = sp.s;
    const double s_g = sp.s_G;
    const double lmin = model.lambda_min();
    if (ev.general.l2_bound) {
        const double re2 = ev.general.re_constant * ev.general.re_constant;
        const double l2 = ev.lambda_for_bound * ev.lambda_for_bound;
        switch (case_id) {
        case 1: ev.bound_case_exact = 6144.0 / (lmin * lmin) * sigma * sigma * s * std::log(static_cast<double>(p)) / n; break;
        case 2: ev.bound_case_exact = 4.0 * l2 * s_g * max_w2p / (re2 * re2); break;
        case 3:
        case 4: ev.bound_case_exact = 4.0 * l2 * s_g * max_w2 / (re2 * re2); break;
        default: break;
        }
    }

    const double sqn = std::sqrt(n);
    switch (case_id) {
    case 1: ev.order_form = sigma * std::sqrt(s * std::log(static_cast<double>(p)) / n); break;
    case 2: ev.order_form = sigma * std::sqrt(s_g) * (std::sqrt(max_p2logp / n) + std::sqrt(max_p * log_g / n)); break;
    case 3: ev.order_form = sigma * std::sqrt(s_g) * (std::sqrt(max_p / n) + std::sqrt(log_g / n)); break;
    case 4: ev.order_form = sigma * std::sqrt(s_g) * (std::sqrt(max_p * max_p / n) + std::sqrt(log_g / n)); break;
    case 5:
        ev.order_form = sigma * (std::sqrt(max_plogp / n) + std::sqrt(log_g / n))
                        * (tau * std::sqrt(s) + (1.0 - tau) * std::sqrt(s_g) * max_wsqrtp);
        break;
    case 6:
        ev.order_form = sigma / sqn * (max_mix + std::sqrt(log_g))
                        * (tau * std::sqrt(s) + (1.0 - tau) * std::sqrt(s_g) * max_w);
        break;
    case 7:
        ev.order_form = sigma / sqn * (max_mix_p + std::sqrt(6.0 * log_g))
                        * (tau * std::sqrt(s) + (1.0 - tau) * std::sqrt(s_g) * max_w);
        break;
    default: break;
    }
    if (ev.general.l2_bound && ev.order_form > 0.0)
        ev.order_factor = std::sqrt(*ev.general.l2_bound) / ev.order_form;
    return ev;
}

} // namespace dsparse
