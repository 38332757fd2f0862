#include "dsparse/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <random>
#include <thread>

#include <Eigen/Cholesky>

namespace dsparse {

namespace {

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Every choice of s_G groups must be able to hold s coordinates.
void require_placeable(const GroupStructure& groups, const SparsityLevel& sp)
{
    if (sp.s < 0 || sp.s_G < 0 || sp.s_G > groups.num_groups())
        throw InvalidParameter("sparsity: need 0 <= s_G <= G and s >= 0");
    if ((sp.s == 0) != (sp.s_G == 0) || sp.s < sp.s_G)
        throw InvalidParameter("sparsity: every nonzero group holds at least one nonzero coefficient");
    std::vector<int> sizes = groups.sizes();
    std::sort(sizes.begin(), sizes.end());
    const int room = std::accumulate(sizes.begin(), sizes.begin() + sp.s_G, 0);
    if (sp.s > room)
        throw InvalidParameter("sparsity: s = " + std::to_string(sp.s) + " does not fit into the "
                               + std::to_string(sp.s_G) + " smallest groups");
}

Matrix covariance_or_identity(const Matrix& sigma, int p)
{
    if (sigma.size() == 0)
        return Matrix::Identity(p, p);
    if (sigma.rows() != p || sigma.cols() != p)
        throw DimensionMismatch("Sigma is " + std::to_string(sigma.rows()) + "x" + std::to_string(sigma.cols())
                                + " but the groups cover " + std::to_string(p) + " coordinates");
    return sigma;
}

double median(std::vector<double> v)
{
    std::sort(v.begin(), v.end());
    const std::size_t m = v.size() / 2;
    return v.size() % 2 == 1 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

std::map<int, std::vector<double>> errors_by_n(const ExperimentRecord& record)
{
    std::map<int, std::vector<double>> by_n;
    for (const auto& t : record.trials)
        by_n[t.n].push_back(t.error_l2);
    return by_n;
}

} // namespace

std::uint64_t trial_seed(std::uint64_t base_seed, int n, int trial)
{
    std::uint64_t h = splitmix64(base_seed);
    h = splitmix64(h ^ static_cast<std::uint64_t>(n));
    return splitmix64(h ^ static_cast<std::uint64_t>(trial));
}

Instance gaussian_design(const InstanceSpec& spec)
{
    const auto& groups = spec.groups;
    const int p = groups.dim();
    if (spec.n < 1)
        throw InvalidParameter("gaussian_design: n must be >= 1");
    if (!(spec.noise_sigma >= 0.0) || !std::isfinite(spec.noise_sigma))
        throw InvalidParameter("gaussian_design: noise sigma must be finite and >= 0");
    if (!(spec.signal_magnitude > 0.0) || !std::isfinite(spec.signal_magnitude))
        throw InvalidParameter("gaussian_design: signal magnitude must be positive");
    require_placeable(groups, spec.sparsity);

    const Matrix sigma = covariance_or_identity(spec.sigma_matrix, p);
    if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw NotSpdError("gaussian_design: Sigma is not symmetric");
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success)
        throw NotSpdError("gaussian_design: Cholesky factorisation of Sigma failed");

    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    // Support: s_G groups uniformly without replacement, coordinates dealt
    // round-robin over them at random positions inside each group.
    std::vector<int> order(static_cast<std::size_t>(groups.num_groups()));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    const std::vector<int> chosen(order.begin(), order.begin() + spec.sparsity.s_G);

    std::vector<std::vector<int>> slots;
    for (int g : chosen) {
        std::vector<int> idx(static_cast<std::size_t>(groups.size(g)));
        std::iota(idx.begin(), idx.end(), groups.offset(g));
        std::shuffle(idx.begin(), idx.end(), rng);
        slots.push_back(std::move(idx));
    }
    Instance out;
    out.beta_star = Vector::Zero(p);
    std::vector<std::size_t> used(chosen.size(), 0);
    std::bernoulli_distribution coin(0.5);
    for (int k = 0, j = 0; k < spec.sparsity.s; j = (j + 1) % static_cast<int>(chosen.size())) {
        auto& slot = slots[static_cast<std::size_t>(j)];
        auto& u = used[static_cast<std::size_t>(j)];
        if (u == slot.size())
            continue;
        out.beta_star[slot[u++]] = coin(rng) ? spec.signal_magnitude : -spec.signal_magnitude;
        ++k;
    }

    Matrix W(spec.n, p);
    for (Eigen::Index j = 0; j < W.cols(); ++j)
        for (Eigen::Index i = 0; i < W.rows(); ++i)
            W(i, j) = normal(rng);
    out.X = W * llt.matrixU();

    out.noise = Vector::Zero(spec.n);
    if (spec.noise_sigma > 0.0)
        for (Eigen::Index i = 0; i < out.noise.size(); ++i)
            out.noise[i] = spec.noise_sigma * normal(rng);
    out.y = out.X * out.beta_star + out.noise;
    return out;
}

void ExperimentConfig::validate() const
{
    if (n_grid.empty())
        throw InvalidParameter("experiment: n_grid must be nonempty");
    for (std::size_t i = 0; i < n_grid.size(); ++i) {
        if (n_grid[i] < 1)
            throw InvalidParameter("experiment: n_grid entries must be positive");
        if (i > 0 && n_grid[i] <= n_grid[i - 1])
            throw InvalidParameter("experiment: n_grid must be strictly increasing");
    }
    if (trials_per_n < 1)
        throw InvalidParameter("experiment: trials_per_n must be >= 1");
    if (!(tol > 0.0) || max_iters < 1)
        throw InvalidParameter("experiment: need tol > 0 and max_iters >= 1");
    if (threads < 0)
        throw InvalidParameter("experiment: threads must be >= 0");
    if (lambda_rule != LambdaRule::Recommended && !(lambda_value > 0.0))
        throw InvalidParameter("experiment: lambda value must be positive");
    if (!(noise_sigma > 0.0) || !(signal_magnitude > 0.0))
        throw InvalidParameter("experiment: noise sigma and signal magnitude must be positive");
    covariance_or_identity(sigma_matrix, params.dim());
    require_placeable(params.groups(), sparsity);
}

ExperimentConfig experiment_config_from_json(const nlohmann::json& j)
{
    ExperimentConfig cfg;
    try {
        cfg.n_grid = j.at("n_grid").get<std::vector<int>>();
        cfg.trials_per_n = j.value("trials_per_n", 1);
        cfg.params = ds_params_from_json(j.at("params"));
        if (j.contains("lambda")) {
            const auto& lam = j.at("lambda");
            const std::string rule = lam.is_string() ? lam.get<std::string>() : lam.at("rule").get<std::string>();
            if (rule == "recommended")
                cfg.lambda_rule = LambdaRule::Recommended;
            else if (rule == "fixed")
                cfg.lambda_rule = LambdaRule::Fixed;
            else if (rule == "scaled")
                cfg.lambda_rule = LambdaRule::Scaled;
            else
                throw InputError("experiment: unknown lambda rule \"" + rule + "\"");
            if (lam.is_object())
                cfg.lambda_value = lam.value("value", 1.0);
        }
        cfg.tol = j.value("tol", cfg.tol);
        cfg.max_iters = j.value("max_iters", cfg.max_iters);
        cfg.base_seed = j.value("base_seed", cfg.base_seed);
        cfg.threads = j.value("threads", cfg.threads);
        cfg.solve = j.value("solve", cfg.solve);
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        cfg.signal_magnitude = j.value("signal_magnitude", cfg.signal_magnitude);
        if (j.contains("sparsity")) {
            cfg.sparsity.s = j.at("sparsity").at("s").get<int>();
            cfg.sparsity.s_G = j.at("sparsity").at("s_G").get<int>();
        }
        if (j.contains("sigma_matrix")) {
            const auto rows = j.at("sigma_matrix").get<std::vector<std::vector<double>>>();
            cfg.sigma_matrix.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.size()));
            for (std::size_t r = 0; r < rows.size(); ++r) {
                if (rows[r].size() != rows.size())
                    throw InputError("experiment: sigma_matrix must be square");
                for (std::size_t c = 0; c < rows.size(); ++c)
                    cfg.sigma_matrix(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw InputError(std::string("experiment config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg)
{
    cfg.validate();
    const auto& params = cfg.params;
    const int p = params.dim();
    const DesignModel model(covariance_or_identity(cfg.sigma_matrix, p), cfg.noise_sigma);

    struct PerN {
        double lambda;
        double noise_bound;
        std::optional<double> l2_bound;
    };
    std::vector<PerN> per_n;
    for (int n : cfg.n_grid) {
        const double rec = lambda_recommendation(params, n, model);
        double lambda = rec;
        if (cfg.lambda_rule == LambdaRule::Fixed)
            lambda = cfg.lambda_value;
        else if (cfg.lambda_rule == LambdaRule::Scaled)
            lambda = cfg.lambda_value * rec;
        const auto report = l2_error_bound(params, model, n, lambda, cfg.sparsity);
        per_n.push_back({lambda, noise_dual_bound(params, n, model), report.l2_bound});
    }

    const std::size_t trials = static_cast<std::size_t>(cfg.trials_per_n);
    ExperimentRecord record;
    record.trials.resize(cfg.n_grid.size() * trials);

    auto run_one = [&](std::size_t slot) {
        const std::size_t ni = slot / trials;
        const int trial = static_cast<int>(slot % trials);
        const int n = cfg.n_grid[ni];
        InstanceSpec spec;
        spec.n = n;
        spec.groups = params.groups();
        spec.sigma_matrix = model.sigma_matrix();
        spec.noise_sigma = cfg.noise_sigma;
        spec.sparsity = cfg.sparsity;
        spec.signal_magnitude = cfg.signal_magnitude;
        spec.seed = trial_seed(cfg.base_seed, n, trial);
        Instance inst = gaussian_design(spec);

        TrialRecord& r = record.trials[slot];
        r.n = n;
        r.trial = trial;
        r.lambda = per_n[ni].lambda;
        r.noise_bound = per_n[ni].noise_bound;
        r.l2_bound = per_n[ni].l2_bound;
        r.noise_dual = ds_dual_norm(inst.X.transpose() * inst.noise, params) / n;
        r.column_scale = inst.X.colwise().norm().maxCoeff() / std::sqrt(static_cast<double>(n));
        if (!cfg.solve) {
            r.error_l2 = inst.beta_star.norm();
            return;
        }
        SolveOptions opts;
        opts.tol = cfg.tol * std::max(1.0, inst.y.squaredNorm());
        opts.max_iters = cfg.max_iters;
        const Problem prob(std::move(inst.X), inst.y, r.lambda, params);
        const SolveResult res = solve(prob, opts);
        r.error_l2 = (res.beta_hat - inst.beta_star).norm();
        r.gap = res.duality_gap;
        r.converged = res.converged;
        r.iterations = res.iterations;
    };

    int workers = cfg.threads > 0 ? cfg.threads : static_cast<int>(std::thread::hardware_concurrency());
    workers = std::clamp(workers, 1, static_cast<int>(record.trials.size()));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (std::size_t slot = next++; slot < record.trials.size(); slot = next++) {
            try {
                run_one(slot);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure)
                    failure = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return record;
}

RateFit rate_fit(const ExperimentRecord& record)
{
    const auto by_n = errors_by_n(record);
    if (by_n.size() < 3)
        throw InvalidParameter("rate_fit: need at least 3 distinct sample sizes, got " + std::to_string(by_n.size()));
    std::vector<double> xs, ys;
    for (const auto& [n, errs] : by_n) {
        const double m = median(errs);
        if (!(m > 0.0) || !std::isfinite(m))
            throw InvalidParameter("rate_fit: median error at n = " + std::to_string(n) + " is not positive");
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(m));
    }
    const double k = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / k;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / k;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    RateFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    return fit;
}

ExperimentSummary summarize(const ExperimentRecord& record)
{
    ExperimentSummary s;
    for (const auto& [n, errs] : errors_by_n(record)) {
        s.n_values.push_back(n);
        s.median_error.push_back(median(errs));
    }
    const bool fittable = s.n_values.size() >= 3
                          && std::all_of(s.median_error.begin(), s.median_error.end(),
                                         [](double m) { return m > 0.0 && std::isfinite(m); });
    if (fittable)
        s.fit = rate_fit(record);
    int covered = 0, violations = 0;
    for (const auto& t : record.trials) {
        covered += t.noise_dual <= t.noise_bound;
        s.non_converged += !t.converged;
        if (t.l2_bound) {
            ++s.bound_eligible;
            violations += t.error_l2 * t.error_l2 > *t.l2_bound;
        }
    }
    if (!record.trials.empty())
        s.noise_event_fraction = static_cast<double>(covered) / static_cast<double>(record.trials.size());
    if (s.bound_eligible > 0)
        s.bound_violation_fraction = static_cast<double>(violations) / s.bound_eligible;
    return s;
}

void write_record_csv(std::ostream& os, const ExperimentRecord& record)
{
    const auto old_precision = os.precision(17);
    os << "n,trial,error_l2,gap,lambda,noise_dual,noise_bound,converged,iterations,l2_bound,column_scale\n";
    for (const auto& t : record.trials) {
        os << t.n << ',' << t.trial << ',' << t.error_l2 << ',' << t.gap << ',' << t.lambda << ','
           << t.noise_dual << ',' << t.noise_bound << ',' << (t.converged ? 1 : 0) << ',' << t.iterations << ',';
        if (t.l2_bound)
            os << *t.l2_bound;
        os << ',' << t.column_scale << '\n';
    }
    os.precision(old_precision);
}

nlohmann::json to_json(const ExperimentSummary& s)
{
    nlohmann::json j;
    j["n"] = s.n_values;
    j["median_error_l2"] = s.median_error;
    if (s.fit)
        j["rate_fit"] = {{"slope", s.fit->slope}, {"intercept", s.fit->intercept}};
    else
        j["rate_fit"] = nullptr;
    j["noise_event_fraction"] = s.noise_event_fraction;
    j["bound_eligible_trials"] = s.bound_eligible;
    j["bound_violation_fraction"] = s.bound_violation_fraction ? nlohmann::json(*s.bound_violation_fraction)
                                                               : nlohmann::json(nullptr);
    j["non_converged_trials"] = s.non_converged;
    return j;
}

} // namespace dsparse
