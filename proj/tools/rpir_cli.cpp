// rpir: command-line front end for the regularized randomized B-spline fitter.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "rpir/config.hpp"
#include "rpir/csv_io.hpp"
#include "rpir/datasets.hpp"
#include "rpir/error.hpp"
#include "rpir/experiment.hpp"

namespace {

using namespace rpir;

// Flags shared by every experiment subcommand. Only flags actually given
// override the config file.
struct Overrides {
    std::string config;
    std::string problem, generator, input, lambda, solver, inner_solver, output;
    long long m = 0, p = 0, n1 = 0, n2 = 0, block = 0, block_v = 0;
    double noise = 0, penalty = 0, tolerance = 0, alpha = 0, eps = 0, sweep_min = 0, sweep_max = 0;
    std::size_t max_iter = 0, lag = 0, workers = 0, head = 0, sweep_points = 0, max_outer = 0;
    std::vector<std::uint64_t> seeds;
    std::vector<std::pair<CLI::Option*, std::function<void(ExperimentConfig&)>>> apply;

    template <typename T>
    void flag(CLI::App* app, const std::string& name, T& target, const std::string& help,
              std::function<void(ExperimentConfig&)> fn) {
        apply.emplace_back(app->add_option(name, target, help), std::move(fn));
    }

    void attach(CLI::App* app) {
        app->add_option("-c,--config", config, "YAML experiment config");
        flag(app, "--problem", problem, "curve or surface", [this](auto& c) { c.problem = parse_problem_kind(problem); });
        flag(app, "--generator", generator, "rose, blob or boy", [this](auto& c) { c.generator = generator; });
        flag(app, "--input", input, "points CSV instead of a generator", [this](auto& c) { c.input_file = input; });
        flag(app, "--m", m, "data points per curve / rows of the grid, minus one", [this](auto& c) { c.m = m; });
        flag(app, "--p", p, "grid columns minus one", [this](auto& c) { c.p = p; });
        flag(app, "--n1", n1, "control points minus one (u)", [this](auto& c) { c.n1 = n1; });
        flag(app, "--n2", n2, "control points minus one (v)", [this](auto& c) { c.n2 = n2; });
        flag(app, "--block-size", block, "columns per block", [this](auto& c) {
            c.block_size = block;
            c.block_size_v = block;
        });
        flag(app, "--block-size-v", block_v, "columns per block along v", [this](auto& c) { c.block_size_v = block_v; });
        flag(app, "--noise", noise, "noise amplitude", [this](auto& c) { c.noise = noise; });
        flag(app, "--penalty-scale", penalty, "difference matrix scale C", [this](auto& c) { c.penalty_scale = penalty; });
        flag(app, "--lambda", lambda, "a value, 'estimate' or 'self-consistent'", [this](auto& c) {
            try {
                std::size_t used = 0;
                c.lambda = std::stod(lambda, &used);
                if (used != lambda.size()) throw std::invalid_argument(lambda);
                c.lambda_mode = LambdaMode::Explicit;
            } catch (const std::logic_error&) {
                c.lambda_mode = parse_lambda_mode(lambda);
            }
        });
        flag(app, "--solver", solver, "rpia or direct", [this](auto& c) { c.solver = parse_solver_kind(solver); });
        flag(app, "--inner-solver", inner_solver, "solver inside the self-consistent loop",
             [this](auto& c) { c.inner_solver = parse_solver_kind(inner_solver); });
        flag(app, "--tolerance", tolerance, "relative-change stopping tolerance (<= 0: fixed count)",
             [this](auto& c) { c.tolerance = tolerance; });
        flag(app, "--max-iterations", max_iter, "iteration cap", [this](auto& c) { c.max_iterations = max_iter; });
        flag(app, "--lag", lag, "steps between stopping checks (0: block count)", [this](auto& c) { c.lag = lag; });
        flag(app, "--seeds", seeds, "seed list", [this](auto& c) { c.seeds = seeds; });
        flag(app, "--workers", workers, "concurrent seeds (0: all cores)", [this](auto& c) { c.workers = workers; });
        flag(app, "--head-count", head, "eigenvalues in the decay fit", [this](auto& c) { c.head_count = head; });
        flag(app, "--alpha", alpha, "decay exponent override", [this](auto& c) { c.alpha = alpha; });
        flag(app, "--eps-lambda", eps, "self-consistent relative tolerance", [this](auto& c) { c.eps_lambda = eps; });
        flag(app, "--max-outer", max_outer, "self-consistent iteration cap", [this](auto& c) { c.max_outer = max_outer; });
        flag(app, "--sweep-min", sweep_min, "smallest sweep lambda", [this](auto& c) { c.sweep.min = sweep_min; });
        flag(app, "--sweep-max", sweep_max, "largest sweep lambda", [this](auto& c) { c.sweep.max = sweep_max; });
        flag(app, "--sweep-points", sweep_points, "sweep grid size", [this](auto& c) { c.sweep.points = sweep_points; });
        flag(app, "-o,--output", output, "output directory for the report bundle",
             [this](auto& c) { c.output_dir = output; });
    }

    ExperimentConfig build() const {
        ExperimentConfig c;
        if (!config.empty()) {
            c = load_config(config);
        } else {
            c = default_config(problem.empty() ? ProblemKind::Curve : parse_problem_kind(problem));
        }
        for (const auto& [opt, fn] : apply) {
            if (opt->count() > 0) fn(c);
        }
        validate(c);
        return c;
    }
};

void print_report(const FitReport& r) {
    for (const auto& s : r.seeds) {
        std::printf("seed %llu  lambda %.6g  E %.6f  iterations %zu (%s)\n", static_cast<unsigned long long>(s.seed),
                    s.lambda, s.error, s.iterations, s.stop_reason.c_str());
    }
    for (const auto& row : r.sweep) {
        std::printf("%-8s lambda %.4e  mean E %.6f  std %.6f\n", row.kind.c_str(), row.lambda, row.mean_error,
                    row.std_error);
    }
    if (!r.seeds.empty()) std::printf("mean E %.6f  std %.6f  (%zu seeds)\n", r.mean_error, r.std_error, r.seeds.size());
}

void finish(const FitReport& r, const ExperimentConfig& c) {
    print_report(r);
    if (!c.output_dir.empty()) {
        write_bundle(r, c, c.output_dir);
        std::printf("wrote %s\n", c.output_dir.string().c_str());
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Regularized randomized progressive iterative approximation for B-spline fitting"};
    app.require_subcommand(1);

    Overrides fit_o, sweep_o, est_o, sc_o, spec_o;
    auto* fit = app.add_subcommand("fit", "fit with an explicit or estimated lambda over all seeds");
    fit_o.attach(fit);
    auto* sweep = app.add_subcommand("sweep", "mean error over a log-spaced lambda grid");
    sweep_o.attach(sweep);
    auto* est = app.add_subcommand("estimate-lambda", "lambda from the spectral decay and the noise level");
    est_o.attach(est);
    auto* sc = app.add_subcommand("self-consistent", "per-seed fixed-point lambda iteration");
    sc_o.attach(sc);
    auto* spec = app.add_subcommand("spectrum", "eigenvalues of Q^T Q and the fitted decay exponent");
    spec_o.attach(spec);

    auto* gen = app.add_subcommand("gen-data", "write a generated dataset as CSV");
    std::string gen_name = "rose";
    std::string gen_out;
    long long gen_m = 1000;
    long long gen_p = 60;
    double gen_noise = 0.0;
    std::uint64_t gen_seed = 1;
    gen->add_option("--generator", gen_name, "rose, blob or boy");
    gen->add_option("--m", gen_m, "samples minus one (rows for boy)");
    gen->add_option("--p", gen_p, "columns minus one (boy)");
    gen->add_option("--noise", gen_noise, "noise amplitude, 0 for clean data");
    gen->add_option("--seed", gen_seed, "noise seed");
    gen->add_option("-o,--output", gen_out, "CSV path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (fit->parsed()) {
            ExperimentConfig c = fit_o.build();
            if (c.lambda_mode == LambdaMode::Sweep) c.lambda_mode = LambdaMode::Explicit;
            const FitReport r = run_experiment(c);
            if (r.estimate) std::printf("estimated lambda %.6e (alpha %.4f)\n", r.estimate->lambda, r.estimate->alpha);
            finish(r, c);
        } else if (sweep->parsed()) {
            ExperimentConfig c = sweep_o.build();
            c.lambda_mode = LambdaMode::Sweep;
            finish(sweep_lambda(c), c);
        } else if (sc->parsed()) {
            ExperimentConfig c = sc_o.build();
            c.lambda_mode = LambdaMode::SelfConsistent;
            const FitReport r = run_experiment(c);
            for (const auto& s : r.seeds) {
                std::printf("seed %llu lambda trajectory:", static_cast<unsigned long long>(s.seed));
                for (const auto& it : s.lambda_log) std::printf(" %.4e", it.lambda);
                std::printf(" -> %.4e\n", s.next_lambda);
            }
            finish(r, c);
        } else if (est->parsed()) {
            const ExperimentConfig c = est_o.build();
            const LambdaEstimate e = estimate_lambda(c);
            std::printf("alpha %.6f (fitted %.6f over %zu eigenvalues, rms %.3g)\n", e.alpha, e.decay.alpha,
                        e.decay.head_count, e.decay.fit_residual);
            std::printf("sigma2 %.6e  n %lld  penalty_norm2 %.6e  epsilon_norm2 %.6e\n", e.noise.sigma2,
                        static_cast<long long>(e.n), e.penalty_norm2, e.noise.epsilon_norm2);
            std::printf("lambda %.6e\n", e.lambda);
        } else if (spec->parsed()) {
            const ExperimentConfig c = spec_o.build();
            const SpectralDecayFit fit_result = problem_spectrum(c);
            std::printf("alpha %.6f over %zu eigenvalues (rms %.3g)\n", fit_result.alpha, fit_result.head_count,
                        fit_result.fit_residual);
            if (!c.output_dir.empty()) {
                std::filesystem::create_directories(c.output_dir);
                const auto path = c.output_dir / "spectrum.csv";
                std::FILE* f = std::fopen(path.string().c_str(), "w");
                if (!f) throw Error(ErrorCode::IoError, "cannot write " + path.string());
                std::fprintf(f, "k,eigenvalue\n");
                for (std::size_t k = 0; k < fit_result.eigenvalues.size(); ++k) {
                    std::fprintf(f, "%zu,%.17g\n", k + 1, fit_result.eigenvalues[k]);
                }
                std::fclose(f);
                std::printf("wrote %s\n", path.string().c_str());
            } else {
                for (std::size_t k = 0; k < fit_result.head_count; ++k) {
                    std::printf("%zu %.6e\n", k + 1, fit_result.eigenvalues[k]);
                }
            }
        } else if (gen->parsed()) {
            if (gen_name == "boy") {
                PointGrid g = boy_surface(gen_m, gen_p).grid;
                if (gen_noise > 0.0) g = add_noise(g, {gen_noise, gen_seed}).grid;
                save_surface_points(gen_out, g);
            } else {
                SampledCurve s;
                if (gen_name == "rose") s = rose_curve(gen_m);
                else if (gen_name == "blob") s = blob_curve(gen_m);
                else throw Error(ErrorCode::InvalidConfig, "unknown generator '" + gen_name + "'");
                Eigen::MatrixXd pts = s.points;
                if (gen_noise > 0.0) pts = add_noise(pts, {gen_noise, gen_seed}).points;
                save_curve_points(gen_out, pts);
            }
            std::printf("wrote %s\n", gen_out.c_str());
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return exit_code_for(ErrorCode::IoError);
    }
    return 0;
}
