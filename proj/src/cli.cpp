#include "dsparse/cli.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dsparse/io.hpp"
#include "dsparse/simulate.hpp"

namespace dsparse {

namespace {

using nlohmann::json;

double parse_exponent(const std::string& s)
{
    if (s == "inf" || s == "Inf" || s == "infinity")
        return kInf;
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw InputError("");
        return v;
    } catch (const std::exception&) {
        throw InputError("\"" + s + "\" is not a number or \"inf\"");
    }
}

std::vector<std::string> split_list(const std::string& s)
{
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(item);
    return out;
}

std::vector<double> parse_exponent_list(const std::string& s)
{
    std::vector<double> out;
    for (const auto& item : split_list(s))
        out.push_back(parse_exponent(item));
    return out;
}

std::vector<int> parse_int_list(const std::string& s)
{
    std::vector<int> out;
    for (const auto& item : split_list(s)) {
        const double v = parse_exponent(item);
        if (v != std::floor(v) || v < 1 || v > 1e9)
            throw InputError("group sizes must be positive integers, got \"" + item + "\"");
        out.push_back(static_cast<int>(v));
    }
    return out;
}

json json_number(double v)
{
    if (v == kInf)
        return "inf";
    return v;
}

// Everything the structured subcommands share for describing the norm.
struct NormFlags {
    std::string params_file;
    std::string groups;
    double tau = 0.5;
    std::string weights;
    std::string alphas;

    DsParams build() const
    {
        if (!params_file.empty()) {
            if (!groups.empty() || !weights.empty() || !alphas.empty())
                throw InputError("--params cannot be combined with --groups, --weights or --alphas");
            return ds_params_from_json(read_json_file(params_file));
        }
        if (groups.empty())
            throw InputError("give either --params FILE or --groups SIZES");
        GroupStructure gs(parse_int_list(groups));
        std::vector<double> a = alphas.empty() ? std::vector<double>(static_cast<std::size_t>(gs.num_groups()), 2.0)
                                               : parse_exponent_list(alphas);
        if (a.size() == 1)
            a.assign(static_cast<std::size_t>(gs.num_groups()), a.front());
        if (weights.empty())
            return DsParams(gs, tau, std::move(a));
        return DsParams(gs, tau, parse_exponent_list(weights), std::move(a));
    }

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--params", params_file, "JSON file with sizes, tau, weights, alphas")->check(CLI::ExistingFile);
        cmd->add_option("--groups", groups, "comma-separated group sizes");
        cmd->add_option("--tau", tau, "l1 share tau in [0, 1]");
        cmd->add_option("--weights", weights, "comma-separated group weights (default sqrt(p_g))");
        cmd->add_option("--alphas", alphas, "comma-separated group exponents, or one for all (default 2)");
    }
};

struct CovarianceFlags {
    double sigma = 1.0;
    bool identity = false;
    std::string matrix_file;

    Matrix build(int p) const
    {
        if (!matrix_file.empty())
            return read_csv_matrix(matrix_file);
        return Matrix::Identity(p, p);
    }

    void attach(CLI::App* cmd)
    {
        cmd->add_option("--sigma", sigma, "noise level");
        auto* id = cmd->add_flag("--sigma-identity", identity, "design covariance is the identity");
        cmd->add_option("--sigma-matrix", matrix_file, "CSV with the design covariance")
            ->check(CLI::ExistingFile)
            ->excludes(id);
    }
};

void emit(const json& j, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    std::ofstream f(path);
    if (!f)
        throw InputError("cannot write \"" + path + "\"");
    f << j.dump(2) << '\n';
}

json report_json(const TheoryReport& r)
{
    json j;
    j["kappa1"] = r.kappa1;
    j["kappa2"] = r.kappa2;
    j["re_constant"] = r.re_constant;
    j["lambda_min_recommended"] = r.lambda_min_recommended;
    j["lambda"] = r.lambda_used;
    j["n"] = r.n;
    j["n_min"] = r.n_min;
    j["l2_bound"] = r.l2_bound ? json(*r.l2_bound) : json(nullptr);
    j["precondition_violated"] = r.precondition_violated();
    return j;
}

json solve_json(const SolveResult& r, double lambda)
{
    json j;
    j["beta_hat"] = vector_to_json(r.beta_hat);
    j["lambda"] = lambda;
    j["primal_objective"] = r.primal_objective;
    j["dual_objective"] = r.dual_objective;
    j["duality_gap"] = r.duality_gap;
    j["iterations"] = r.iterations;
    j["restarts"] = r.restarts;
    j["converged"] = r.converged;
    return j;
}

void write_trace_csv(const std::string& path, const std::vector<TraceEntry>& trace)
{
    std::ofstream f(path);
    if (!f)
        throw InputError("cannot write \"" + path + "\"");
    f << std::setprecision(17) << "iter,primal,dual,gap\n";
    for (const auto& e : trace)
        f << e.iteration << ',' << e.primal << ',' << e.dual << ',' << e.gap << '\n';
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Double-sparsity norms, proximal solver and error-bound calculator", "dsparse"};
    app.require_subcommand(1);

    // norm / decompose
    std::string x_file;
    double eps = 1.0;
    std::string q_text = "2";
    bool dual = false;
    bool as_json = false;
    auto* norm_cmd = app.add_subcommand("norm", "eps-q norm of a vector");
    auto* decompose_cmd = app.add_subcommand("decompose", "spiky/flat eps-decomposition of a vector");
    for (auto* cmd : {norm_cmd, decompose_cmd}) {
        cmd->add_option("x", x_file, "CSV with one row or one column")->required()->check(CLI::ExistingFile);
        cmd->add_option("--eps", eps, "epsilon in (0, 1]");
        cmd->add_option("--q", q_text, "exponent q >= 1 or inf");
    }
    norm_cmd->add_flag("--dual", dual, "dual norm instead");
    norm_cmd->add_flag("--json", as_json, "print value and decomposition as JSON");

    // solve
    std::string X_file, y_file, lambda_text, out_file, trace_file;
    double tol = 1e-8;
    int max_iters = 20000;
    NormFlags norm_flags;
    CovarianceFlags cov;
    auto* solve_cmd = app.add_subcommand("solve", "minimise ||y - X b||^2 + lambda ||b||_ds");
    solve_cmd->add_option("X", X_file, "design matrix, CSV or JSON")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("y", y_file, "response vector, CSV or JSON")->required()->check(CLI::ExistingFile);
    solve_cmd->add_option("--lambda", lambda_text, "penalty value or \"auto\"")->required();
    solve_cmd->add_option("--tol", tol, "duality-gap tolerance");
    solve_cmd->add_option("--max-iters", max_iters, "iteration cap");
    solve_cmd->add_option("--trace", trace_file, "write the per-iteration gap as CSV here");
    solve_cmd->add_option("--out", out_file, "write JSON here instead of stdout");
    norm_flags.attach(solve_cmd);
    cov.attach(solve_cmd);

    // theory
    int case_id = 0;
    int n = 100;
    int p = 0;
    SparsityLevel sparsity;
    std::string theory_lambda = "auto";
    auto* theory_cmd = app.add_subcommand("theory", "constants, penalty level and error bound");
    theory_cmd->add_option("--case", case_id, "closed-form regime 1..7")->check(CLI::Range(1, 7));
    theory_cmd->add_option("--n", n, "sample size")->check(CLI::PositiveNumber);
    theory_cmd->add_option("--p", p, "dimension (case 1)");
    theory_cmd->add_option("--s", sparsity.s, "nonzero coefficients");
    theory_cmd->add_option("--sg", sparsity.s_G, "nonzero groups");
    theory_cmd->add_option("--lambda", theory_lambda, "penalty value or \"auto\" (general mode)");
    theory_cmd->add_option("--out", out_file, "write JSON here instead of stdout");
    NormFlags theory_norm;
    CovarianceFlags theory_cov;
    theory_norm.attach(theory_cmd);
    theory_cov.attach(theory_cmd);

    // experiment
    std::string config_file;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    auto* exp_cmd = app.add_subcommand("experiment", "Monte Carlo runs over a grid of sample sizes");
    exp_cmd->add_option("config", config_file, "experiment JSON")->required()->check(CLI::ExistingFile);
    exp_cmd->add_option("--seed", seed, "override base_seed");
    exp_cmd->add_option("--threads", threads, "override the worker count");
    exp_cmd->add_option("--out", out_file, "prefix for PREFIX.csv and PREFIX.json");

    // ball
    int resolution = 360;
    auto* ball_cmd = app.add_subcommand("ball", "2-d unit sphere of the eps-q norm as CSV");
    ball_cmd->add_option("--eps", eps, "epsilon in (0, 1]");
    ball_cmd->add_option("--q", q_text, "exponent q >= 1 or inf");
    ball_cmd->add_option("--resolution", resolution, "number of directions")->check(CLI::Range(8, 10000000));
    ball_cmd->add_option("--out", out_file, "write CSV here instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitInput;
    }

    try {
        if (norm_cmd->parsed() || decompose_cmd->parsed()) {
            const Vector x = read_csv_vector(x_file);
            const EpsQ params(eps, parse_exponent(q_text));
            if (norm_cmd->parsed() && dual) {
                out << std::setprecision(17) << epsq_dual_norm(x, params) << '\n';
            } else if (norm_cmd->parsed() && !as_json) {
                out << std::setprecision(17) << epsq_norm(x, params) << '\n';
            } else {
                const Decomposition d = epsq_decompose(x, params);
                json j;
                j["epsilon"] = params.epsilon();
                j["q"] = json_number(params.q());
                j["norm"] = d.norm_value;
                j["spiky"] = vector_to_json(d.spiky);
                j["flat"] = vector_to_json(d.flat);
                out << j.dump(2) << '\n';
            }
            return kExitOk;
        }

        if (solve_cmd->parsed()) {
            const DsParams params = norm_flags.build();
            Matrix X = read_matrix_file(X_file);
            Vector y = read_vector_file(y_file);
            double lambda = 0.0;
            if (lambda_text == "auto") {
                if (!cov.identity && cov.matrix_file.empty())
                    throw InputError("--lambda auto needs --sigma with --sigma-identity or --sigma-matrix");
                const DesignModel model(cov.build(params.dim()), cov.sigma);
                lambda = lambda_recommendation(params, static_cast<int>(X.rows()), model);
            } else {
                lambda = parse_exponent(lambda_text);
            }
            SolveOptions opts;
            opts.tol = tol;
            opts.max_iters = max_iters;
            opts.record_trace = !trace_file.empty();
            const Problem prob(std::move(X), std::move(y), lambda, params);
            const SolveResult res = solve(prob, opts);
            emit(solve_json(res, lambda), out_file, out);
            if (!trace_file.empty())
                write_trace_csv(trace_file, res.trace);
            if (!res.converged) {
                err << "solve: duality gap " << res.duality_gap << " above tolerance after " << res.iterations
                    << " iterations\n";
                return kExitNumerical;
            }
            return kExitOk;
        }

        if (theory_cmd->parsed()) {
            if (case_id != 0) {
                CaseInputs in;
                if (!theory_norm.groups.empty())
                    in.group_sizes = parse_int_list(theory_norm.groups);
                if (!theory_norm.weights.empty())
                    in.weights = parse_exponent_list(theory_norm.weights);
                in.p = p;
                in.tau = theory_norm.tau;
                in.n = n;
                in.sigma = theory_cov.sigma;
                if (!theory_cov.matrix_file.empty())
                    in.sigma_matrix = read_csv_matrix(theory_cov.matrix_file);
                in.sparsity = sparsity;
                const CaseEvaluation ev = case_specialization(case_id, in);
                json j;
                j["case"] = ev.case_id;
                j["tau"] = ev.tau;
                j["alpha"] = json_number(ev.alpha);
                j["lambda_general"] = ev.lambda_general;
                j["lambda_case"] = ev.lambda_case;
                j["lambda_for_bound"] = ev.lambda_for_bound;
                j["report"] = report_json(ev.general);
                j["bound_case_exact"] = ev.bound_case_exact ? json(*ev.bound_case_exact) : json(nullptr);
                j["order_form"] = ev.order_form;
                j["order_factor"] = ev.order_factor ? json(*ev.order_factor) : json(nullptr);
                emit(j, out_file, out);
                return kExitOk;
            }
            const DsParams params = theory_norm.build();
            const DesignModel model(theory_cov.build(params.dim()), theory_cov.sigma);
            const double lambda = theory_lambda == "auto" ? lambda_recommendation(params, n, model)
                                                          : parse_exponent(theory_lambda);
            json j = report_json(l2_error_bound(params, model, n, lambda, sparsity));
            j["noise_dual_bound"] = noise_dual_bound(params, n, model);
            emit(j, out_file, out);
            return kExitOk;
        }

        if (exp_cmd->parsed()) {
            ExperimentConfig cfg = experiment_config_from_json(read_json_file(config_file));
            if (seed)
                cfg.base_seed = *seed;
            if (threads)
                cfg.threads = *threads;
            const ExperimentRecord record = run_experiment(cfg);
            const ExperimentSummary summary = summarize(record);
            if (out_file.empty()) {
                write_record_csv(out, record);
            } else {
                std::ofstream csv(out_file + ".csv");
                if (!csv)
                    throw InputError("cannot write \"" + out_file + ".csv\"");
                write_record_csv(csv, record);
                emit(to_json(summary), out_file + ".json", out);
            }
            if (summary.non_converged > 0) {
                err << "experiment: " << summary.non_converged << " trial(s) did not reach the gap tolerance\n";
                return kExitNumerical;
            }
            return kExitOk;
        }

        if (ball_cmd->parsed()) {
            const auto points = epsq_ball_boundary(EpsQ(eps, parse_exponent(q_text)), resolution);
            Matrix m(static_cast<Eigen::Index>(points.size()), 2);
            for (std::size_t i = 0; i < points.size(); ++i)
                m.row(static_cast<Eigen::Index>(i)) = points[i].transpose();
            std::ofstream f;
            if (!out_file.empty()) {
                f.open(out_file);
                if (!f)
                    throw InputError("cannot write \"" + out_file + "\"");
            }
            std::ostream& os = out_file.empty() ? out : f;
            os << "x,y\n";
            write_csv_matrix(os, m);
            return kExitOk;
        }
    } catch (const IterationLimitError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::invalid_argument& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NotSpdError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInput;
}

} // namespace dsparse
