#include <cmath>
#include <functional>
#include <random>
#include <set>
#include <sstream>

#include <gtest/gtest.h>

#include "dsparse/simulate.hpp"

using namespace dsparse;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.n_grid = {30, 60, 120};
    cfg.trials_per_n = 3;
    cfg.params = DsParams(GroupStructure::uniform(4, 3), 0.5, {2.0, 2.0, 2.0, 2.0});
    cfg.sparsity = {3, 2};
    cfg.base_seed = 99;
    cfg.threads = 1;
    return cfg;
}

ExperimentRecord synthetic(const std::vector<int>& ns, const std::function<double(int)>& err)
{
    ExperimentRecord r;
    for (int n : ns)
        for (int t = 0; t < 3; ++t) {
            TrialRecord tr;
            tr.n = n;
            tr.trial = t;
            tr.error_l2 = err(n) * (t == 1 ? 1.0 : (t == 0 ? 0.5 : 3.0));
            r.trials.push_back(tr);
        }
    return r;
}

} // namespace

TEST(GaussianDesign, EmpiricalCovariance)
{
    Matrix sigma(5, 5);
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 5; ++j)
            sigma(i, j) = std::pow(0.5, std::abs(i - j));
    InstanceSpec spec;
    spec.n = 100000;
    spec.groups = GroupStructure({2, 3});
    spec.sigma_matrix = sigma;
    spec.sparsity = {2, 1};
    spec.seed = 4;
    const Instance inst = gaussian_design(spec);
    const Matrix emp = inst.X.transpose() * inst.X / spec.n;
    EXPECT_LE((emp - sigma).cwiseAbs().maxCoeff(), 5.0 / std::sqrt(spec.n));
}

TEST(GaussianDesign, SupportSignsAndNoise)
{
    InstanceSpec spec;
    spec.n = 20;
    spec.groups = GroupStructure({3, 4, 2, 5, 3});
    spec.noise_sigma = 0.0;
    spec.signal_magnitude = 2.5;
    for (int k = 0; k < 50; ++k) {
        spec.seed = static_cast<std::uint64_t>(k);
        spec.sparsity = {2 + k % 4, 2};
        const Instance inst = gaussian_design(spec);
        EXPECT_EQ((inst.beta_star.array() != 0).count(), spec.sparsity.s);
        int active = 0;
        for (int g = 0; g < spec.groups.num_groups(); ++g)
            active += !spec.groups.block(inst.beta_star, g).isZero(0.0);
        EXPECT_EQ(active, spec.sparsity.s_G);
        EXPECT_TRUE((inst.beta_star.array() == 0 || inst.beta_star.array().abs() == 2.5).all());
        EXPECT_TRUE(inst.noise.isZero(0.0));
        EXPECT_EQ(inst.y, inst.X * inst.beta_star);
    }
}

TEST(GaussianDesign, DeterministicPerSeed)
{
    InstanceSpec spec;
    spec.n = 15;
    spec.groups = GroupStructure::uniform(3, 4);
    spec.sparsity = {4, 2};
    spec.seed = 123;
    const Instance a = gaussian_design(spec), b = gaussian_design(spec);
    EXPECT_EQ(a.X, b.X);
    EXPECT_EQ(a.y, b.y);
    spec.seed = 124;
    EXPECT_NE(gaussian_design(spec).X, a.X);
}

TEST(GaussianDesign, Validation)
{
    InstanceSpec spec;
    spec.n = 10;
    spec.groups = GroupStructure({1, 1, 4});
    spec.sparsity = {3, 2};
    EXPECT_THROW(gaussian_design(spec), InvalidParameter);
    spec.sparsity = {1, 0};
    EXPECT_THROW(gaussian_design(spec), InvalidParameter);
    spec.sparsity = {2, 2};
    spec.sigma_matrix = Matrix::Identity(3, 3);
    EXPECT_THROW(gaussian_design(spec), DimensionMismatch);
    spec.sigma_matrix = -Matrix::Identity(6, 6);
    EXPECT_THROW(gaussian_design(spec), NotSpdError);
    spec.sigma_matrix.resize(0, 0);
    spec.noise_sigma = -1;
    EXPECT_THROW(gaussian_design(spec), InvalidParameter);
}

TEST(TrialSeed, DistinctAcrossCells)
{
    std::set<std::uint64_t> seen;
    for (int n : {10, 20, 30})
        for (int t = 0; t < 100; ++t)
            seen.insert(trial_seed(7, n, t));
    EXPECT_EQ(seen.size(), 300u);
    EXPECT_EQ(trial_seed(7, 10, 3), trial_seed(7, 10, 3));
    EXPECT_NE(trial_seed(7, 10, 3), trial_seed(8, 10, 3));
}

TEST(RunExperiment, ReproducibleAndThreadIndependent)
{
    auto cfg = small_config();
    const auto a = run_experiment(cfg);
    cfg.threads = 3;
    const auto b = run_experiment(cfg);
    ASSERT_EQ(a.trials.size(), 9u);
    std::ostringstream sa, sb;
    write_record_csv(sa, a);
    write_record_csv(sb, b);
    EXPECT_EQ(sa.str(), sb.str());
    for (const auto& t : a.trials) {
        EXPECT_TRUE(t.converged);
        EXPECT_GT(t.error_l2, 0.0);
        EXPECT_LE(t.gap, cfg.tol * 1e6);
    }
    EXPECT_EQ(a.trials[4].n, 60);
    EXPECT_EQ(a.trials[4].trial, 1);
}

TEST(RunExperiment, LambdaRules)
{
    auto cfg = small_config();
    cfg.solve = false;
    const auto rec = run_experiment(cfg);
    cfg.lambda_rule = LambdaRule::Scaled;
    cfg.lambda_value = 0.5;
    const auto scaled = run_experiment(cfg);
    cfg.lambda_rule = LambdaRule::Fixed;
    cfg.lambda_value = 3.0;
    const auto fixed = run_experiment(cfg);
    for (std::size_t i = 0; i < rec.trials.size(); ++i) {
        EXPECT_DOUBLE_EQ(scaled.trials[i].lambda, 0.5 * rec.trials[i].lambda);
        EXPECT_EQ(fixed.trials[i].lambda, 3.0);
        EXPECT_NEAR(2.0 * rec.trials[i].n * rec.trials[i].noise_bound, rec.trials[i].lambda,
                    1e-12 * rec.trials[i].lambda);
    }
}

TEST(RunExperiment, ValidationErrors)
{
    auto cfg = small_config();
    cfg.n_grid = {60, 30};
    EXPECT_THROW(run_experiment(cfg), InvalidParameter);
    cfg = small_config();
    cfg.trials_per_n = 0;
    EXPECT_THROW(run_experiment(cfg), InvalidParameter);
    cfg = small_config();
    cfg.sparsity = {7, 2};
    EXPECT_THROW(run_experiment(cfg), InvalidParameter);
}

TEST(RateFit, SyntheticSlopes)
{
    const std::vector<int> ns{100, 200, 400, 800};
    const auto fit = rate_fit(synthetic(ns, [](int n) { return 3.0 / std::sqrt(n); }));
    EXPECT_NEAR(fit.slope, -0.5, 1e-12);
    EXPECT_NEAR(fit.intercept, std::log(3.0), 1e-12);
    EXPECT_NEAR(rate_fit(synthetic(ns, [](int) { return 0.7; })).slope, 0.0, 1e-12);
    EXPECT_THROW(rate_fit(synthetic({100, 200}, [](int) { return 1.0; })), InvalidParameter);
    EXPECT_THROW(rate_fit(synthetic(ns, [](int) { return 0.0; })), InvalidParameter);
}

TEST(Summarize, CountsAndJson)
{
    auto r = synthetic({100, 200, 400}, [](int n) { return 1.0 / n; });
    r.trials[0].noise_dual = 2.0;
    r.trials[0].noise_bound = 1.0;
    r.trials[1].converged = false;
    r.trials[2].l2_bound = 1e-12;
    r.trials[3].l2_bound = 1.0;
    const auto s = summarize(r);
    EXPECT_EQ(s.n_values, (std::vector<int>{100, 200, 400}));
    EXPECT_DOUBLE_EQ(s.median_error[0], 0.01);
    ASSERT_TRUE(s.fit);
    EXPECT_NEAR(s.fit->slope, -1.0, 1e-12);
    EXPECT_NEAR(s.noise_event_fraction, 8.0 / 9.0, 1e-15);
    EXPECT_EQ(s.non_converged, 1);
    EXPECT_EQ(s.bound_eligible, 2);
    EXPECT_DOUBLE_EQ(*s.bound_violation_fraction, 0.5);
    const auto j = to_json(s);
    EXPECT_EQ(j.at("non_converged_trials"), 1);
    EXPECT_TRUE(j.at("rate_fit").is_object());

    const auto empty = summarize(ExperimentRecord{});
    EXPECT_FALSE(empty.fit);
    EXPECT_TRUE(to_json(empty).at("bound_violation_fraction").is_null());
}

TEST(ExperimentConfigJson, ParsesAndRejects)
{
    const auto j = nlohmann::json::parse(R"({
        "n_grid": [20, 40, 80], "trials_per_n": 2,
        "params": {"sizes": [2, 2], "tau": 0.5},
        "lambda": {"rule": "scaled", "value": 0.8},
        "sparsity": {"s": 2, "s_G": 1},
        "sigma_matrix": [[1,0,0,0],[0,1,0,0],[0,0,1,0],[0,0,0,1]],
        "base_seed": 5, "threads": 2})");
    const auto cfg = experiment_config_from_json(j);
    EXPECT_EQ(cfg.n_grid, (std::vector<int>{20, 40, 80}));
    EXPECT_EQ(cfg.lambda_rule, LambdaRule::Scaled);
    EXPECT_EQ(cfg.lambda_value, 0.8);
    EXPECT_EQ(cfg.sparsity.s_G, 1);
    EXPECT_EQ(cfg.sigma_matrix.rows(), 4);
    EXPECT_EQ(cfg.base_seed, 5u);

    auto bad = j;
    bad["lambda"] = "bogus";
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad.erase("n_grid");
    EXPECT_THROW(experiment_config_from_json(bad), InputError);
    bad = j;
    bad["sigma_matrix"] = nlohmann::json::parse("[[1,0],[0,1]]");
    EXPECT_THROW(experiment_config_from_json(bad), DimensionMismatch);
}
