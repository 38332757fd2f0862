#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "dsparse/solver.hpp"
#include "dsparse/theory.hpp"

namespace dsparse {

struct InstanceSpec {
    int n = 0;
    GroupStructure groups{std::vector<int>{1}};
    /// Empty selects the identity.
    Matrix sigma_matrix;
    /// Zero generates noiseless responses.
    double noise_sigma = 1.0;
    SparsityLevel sparsity;
    double signal_magnitude = 1.0;
    std::uint64_t seed = 0;
};

struct Instance {
    Matrix X;
    Vector beta_star;
    Vector noise;
    Vector y;
};

/// Rows of X are N(0, Sigma); beta* is (s, s_G)-sparse with entries
/// +-signal_magnitude; y = X beta* + noise.
Instance gaussian_design(const InstanceSpec& spec);

/// Seed of trial `trial` at sample size n.
std::uint64_t trial_seed(std::uint64_t base_seed, int n, int trial);

enum class LambdaRule { Recommended, Fixed, Scaled };

struct ExperimentConfig {
    std::vector<int> n_grid;
    int trials_per_n = 1;
    DsParams params{GroupStructure{std::vector<int>{1}}, 1.0, std::vector<double>{2.0}};
    LambdaRule lambda_rule = LambdaRule::Recommended;
    /// Penalty for Fixed, multiplier for Scaled.
    double lambda_value = 1.0;
    /// Duality-gap tolerance relative to max(1, ||y||^2).
    double tol = 1e-8;
    int max_iters = 20000;
    std::uint64_t base_seed = 0;
    /// Worker threads; 0 uses the hardware concurrency.
    int threads = 0;
    /// Skip the solve and record only the noise statistics.
    bool solve = true;

    Matrix sigma_matrix;
    double noise_sigma = 1.0;
    SparsityLevel sparsity;
    double signal_magnitude = 1.0;

    void validate() const;
};

ExperimentConfig experiment_config_from_json(const nlohmann::json& j);

struct TrialRecord {
    int n = 0;
    int trial = 0;
    double error_l2 = 0.0;
    double gap = 0.0;
    double lambda = 0.0;
    /// ||X^T noise||_ds^* / n
    double noise_dual = 0.0;
    double noise_bound = 0.0;
    bool converged = true;
    int iterations = 0;
    /// Squared error bound; empty when its preconditions fail.
    std::optional<double> l2_bound;
    /// max_j ||X_j||_2 / sqrt(n)
    double column_scale = 0.0;
};

struct ExperimentRecord {
    std::vector<TrialRecord> trials;
};

ExperimentRecord run_experiment(const ExperimentConfig& cfg);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least-squares line through (log n, log median error).
RateFit rate_fit(const ExperimentRecord& record);

struct ExperimentSummary {
    std::vector<int> n_values;
    std::vector<double> median_error;
    std::optional<RateFit> fit;
    /// Fraction of trials with noise_dual <= noise_bound.
    double noise_event_fraction = 0.0;
    int bound_eligible = 0;
    /// Fraction of eligible trials whose squared error exceeds the bound.
    std::optional<double> bound_violation_fraction;
    int non_converged = 0;
};

ExperimentSummary summarize(const ExperimentRecord& record);

void write_record_csv(std::ostream& os, const ExperimentRecord& record);
nlohmann::json to_json(const ExperimentSummary& summary);

} // namespace dsparse
