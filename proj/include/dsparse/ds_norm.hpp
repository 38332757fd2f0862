#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dsparse/norms.hpp"

namespace dsparse {

/// Partition of {0, ..., p-1} into G contiguous blocks.
class GroupStructure {
public:
    explicit GroupStructure(std::vector<int> sizes);

    /// G groups of equal size.
    static GroupStructure uniform(int num_groups, int group_size);

    int num_groups() const noexcept { return static_cast<int>(sizes_.size()); }
    int dim() const noexcept { return offsets_.back(); }
    int size(int g) const { return sizes_[static_cast<std::size_t>(g)]; }
    int offset(int g) const { return offsets_[static_cast<std::size_t>(g)]; }
    const std::vector<int>& sizes() const noexcept { return sizes_; }

    /// Read-only view of block g of x.
    template <class Derived>
    auto block(const Eigen::MatrixBase<Derived>& x, int g) const
    {
        return x.segment(offset(g), size(g));
    }
    template <class Derived>
    auto block(Eigen::MatrixBase<Derived>& x, int g) const
    {
        return x.segment(offset(g), size(g));
    }

    bool operator==(const GroupStructure&) const = default;

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
};

/// Parameters of the double-sparsity norm
///   ||b||_ds = tau ||b||_1 + (1 - tau) sum_g w_g ||b_(g)||_{alpha_g}.
class DsParams {
public:
    DsParams(GroupStructure groups, double tau, std::vector<double> weights,
             std::vector<double> alphas);

    /// Weights default to sqrt(p_g).
    DsParams(GroupStructure groups, double tau, std::vector<double> alphas);

    static std::vector<double> default_weights(const GroupStructure& groups);

    const GroupStructure& groups() const noexcept { return groups_; }
    double tau() const noexcept { return tau_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    const std::vector<double>& alphas() const noexcept { return alphas_; }
    int num_groups() const noexcept { return groups_.num_groups(); }
    int dim() const noexcept { return groups_.dim(); }

    double weight(int g) const { return weights_[static_cast<std::size_t>(g)]; }
    double alpha(int g) const { return alphas_[static_cast<std::size_t>(g)]; }
    /// alpha_g / (alpha_g - 1), with 1 <-> inf.
    double alpha_dual(int g) const;
    /// tau + (1 - tau) w_g.
    double scale(int g) const;
    /// (1 - tau) w_g / (tau + (1 - tau) w_g), in [0, 1].
    double epsilon(int g) const;

private:
    GroupStructure groups_;
    double tau_;
    std::vector<double> weights_;
    std::vector<double> alphas_;
};

double ds_norm(VectorCRef beta, const DsParams& params);

/// Same value through sum_g c_g [eps_g ||b_(g)||_{alpha_g} + (1 - eps_g) ||b_(g)||_1],
/// c_g = tau + (1 - tau) w_g, i.e. the group-wise dual eps-q representation.
double ds_norm_via_dual_identity(VectorCRef beta, const DsParams& params);

/// ||x_(g)||_{eps_g, alpha*_g} / c_g for one group; eps_g = 0 uses l_inf.
double ds_dual_group(VectorCRef x_group, const DsParams& params, int g);

/// max_g ds_dual_group(x_(g)).
double ds_dual_norm(VectorCRef x, const DsParams& params);

enum class OuterNorm { L1, Linf };

/// Outer norm of the vector of per-group inner l_q norms.
double mixed_norm(VectorCRef x, const GroupStructure& groups, OuterNorm outer, double inner);

/// {"sizes": [...], "tau": t, "weights": [...], "alphas": [...]}; alphas may be "inf".
nlohmann::json to_json(const DsParams& params);
/// Missing "weights" selects the sqrt(p_g) default; missing "alphas" selects 2.
DsParams ds_params_from_json(const nlohmann::json& j);

} // namespace dsparse
