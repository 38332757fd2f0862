#include "dsparse/ds_norm.hpp"

#include <algorithm>
#include <cmath>

namespace dsparse {

namespace {

void require_dim(VectorCRef x, const GroupStructure& groups, const char* who)
{
    if (x.size() != groups.dim())
        throw DimensionMismatch(std::string(who) + ": vector has length " + std::to_string(x.size())
                                + ", group structure covers " + std::to_string(groups.dim()));
}

nlohmann::json exponent_to_json(double a)
{
    if (a == kInf)
        return "inf";
    return a;
}

double exponent_from_json(const nlohmann::json& j)
{
    if (j.is_string()) {
        const auto s = j.get<std::string>();
        if (s == "inf" || s == "Inf" || s == "infinity")
            return kInf;
        throw InputError("alphas: unrecognised exponent \"" + s + "\"");
    }
    if (!j.is_number())
        throw InputError("alphas: entries must be numbers or \"inf\"");
    return j.get<double>();
}

} // namespace

GroupStructure::GroupStructure(std::vector<int> sizes) : sizes_(std::move(sizes))
{
    if (sizes_.empty())
        throw InvalidParameter("GroupStructure: at least one group is required");
    offsets_.reserve(sizes_.size() + 1);
    offsets_.push_back(0);
    for (int s : sizes_) {
        if (s < 1)
            throw InvalidParameter("GroupStructure: every group size must be >= 1");
        offsets_.push_back(offsets_.back() + s);
    }
}

GroupStructure GroupStructure::uniform(int num_groups, int group_size)
{
    if (num_groups < 1)
        throw InvalidParameter("GroupStructure: at least one group is required");
    return GroupStructure(std::vector<int>(static_cast<std::size_t>(num_groups), group_size));
}

DsParams::DsParams(GroupStructure groups, double tau, std::vector<double> weights,
                   std::vector<double> alphas)
    : groups_(std::move(groups)), tau_(tau), weights_(std::move(weights)), alphas_(std::move(alphas))
{
    const auto G = static_cast<std::size_t>(groups_.num_groups());
    if (!(tau_ >= 0.0 && tau_ <= 1.0))
        throw InvalidParameter("DsParams: tau must lie in [0, 1]");
    if (weights_.size() != G || alphas_.size() != G)
        throw DimensionMismatch("DsParams: weights and alphas need one entry per group");
    for (double w : weights_)
        if (!(w > 0.0) || !std::isfinite(w))
            throw InvalidParameter("DsParams: weights must be positive and finite");
    for (double a : alphas_)
        if (!(a >= 1.0))
            throw InvalidParameter("DsParams: alphas must be >= 1 (or inf)");
}

DsParams::DsParams(GroupStructure groups, double tau, std::vector<double> alphas)
    : DsParams(groups, tau, default_weights(groups), std::move(alphas))
{
}

std::vector<double> DsParams::default_weights(const GroupStructure& groups)
{
    std::vector<double> w;
    w.reserve(groups.sizes().size());
    for (int s : groups.sizes())
        w.push_back(std::sqrt(static_cast<double>(s)));
    return w;
}

double DsParams::alpha_dual(int g) const { return conjugate_exponent(alpha(g)); }

double DsParams::scale(int g) const { return tau_ + (1.0 - tau_) * weight(g); }

double DsParams::epsilon(int g) const { return (1.0 - tau_) * weight(g) / scale(g); }

double ds_norm(VectorCRef beta, const DsParams& params)
{
    const auto& groups = params.groups();
    require_dim(beta, groups, "ds_norm");
    double group_part = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g)
        group_part += params.weight(g) * lq_norm(groups.block(beta, g), params.alpha(g));
    return params.tau() * lq_norm(beta, 1.0) + (1.0 - params.tau()) * group_part;
}

double ds_norm_via_dual_identity(VectorCRef beta, const DsParams& params)
{
    const auto& groups = params.groups();
    require_dim(beta, groups, "ds_norm_via_dual_identity");
    double total = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g) {
        const auto b = groups.block(beta, g);
        const double eps = params.epsilon(g);
        total += params.scale(g) * (eps * lq_norm(b, params.alpha(g)) + (1.0 - eps) * lq_norm(b, 1.0));
    }
    return total;
}

double ds_dual_group(VectorCRef x_group, const DsParams& params, int g)
{
    const double eps = params.epsilon(g);
    const double inner = eps == 0.0 ? lq_norm(x_group, kInf)
                                    : epsq_norm(x_group, EpsQ(eps, params.alpha_dual(g)));
    return inner / params.scale(g);
}

double ds_dual_norm(VectorCRef x, const DsParams& params)
{
    const auto& groups = params.groups();
    require_dim(x, groups, "ds_dual_norm");
    double best = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g)
        best = std::max(best, ds_dual_group(groups.block(x, g), params, g));
    return best;
}

double mixed_norm(VectorCRef x, const GroupStructure& groups, OuterNorm outer, double inner)
{
    require_dim(x, groups, "mixed_norm");
    double acc = 0.0;
    for (int g = 0; g < groups.num_groups(); ++g) {
        const double v = lq_norm(groups.block(x, g), inner);
        acc = outer == OuterNorm::L1 ? acc + v : std::max(acc, v);
    }
    return acc;
}

nlohmann::json to_json(const DsParams& params)
{
    nlohmann::json alphas = nlohmann::json::array();
    for (double a : params.alphas())
        alphas.push_back(exponent_to_json(a));
    return {
        {"sizes", params.groups().sizes()},
        {"tau", params.tau()},
        {"weights", params.weights()},
        {"alphas", alphas},
    };
}

DsParams ds_params_from_json(const nlohmann::json& j)
{
    try {
        if (!j.is_object())
            throw InputError("params: expected a JSON object");
        if (!j.contains("sizes") || !j.contains("tau"))
            throw InputError("params: \"sizes\" and \"tau\" are required");
        GroupStructure groups(j.at("sizes").get<std::vector<int>>());
        const double tau = j.at("tau").get<double>();
        std::vector<double> alphas(static_cast<std::size_t>(groups.num_groups()), 2.0);
        if (j.contains("alphas")) {
            const auto& ja = j.at("alphas");
            if (!ja.is_array())
                throw InputError("params: \"alphas\" must be an array");
            alphas.clear();
            for (const auto& a : ja)
                alphas.push_back(exponent_from_json(a));
        }
        if (j.contains("weights"))
            return DsParams(groups, tau, j.at("weights").get<std::vector<double>>(), alphas);
        return DsParams(groups, tau, alphas);
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("params: ") + e.what());
    }
}

} // namespace dsparse
