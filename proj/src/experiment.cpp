#include "rpir/experiment.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "rpir/csv_io.hpp"
#include "rpir/datasets.hpp"
#include "rpir/error.hpp"
#include "rpir/oracle.hpp"
#include "rpir/rpia_surface.hpp"

namespace rpir {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

const char* stop_name(StopReason r) { return r == StopReason::Tolerance ? "tolerance" : "max_iterations"; }

StoppingRule stopping_rule(const ExperimentConfig& c) { return {c.tolerance, c.max_iterations, c.lag}; }

/// Runs fn(i) for i in [0, count) on up to `workers` threads; results go to
/// indexed slots so aggregation order never depends on scheduling. The first
/// failure (lowest index) is rethrown after all workers stop.
template <typename Fn>
void parallel_for(std::size_t count, std::size_t workers, Fn fn) {
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, count);
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

Eigen::MatrixXd curve_data(const ExperimentConfig& c) {
    if (!c.input_file.empty()) return load_curve_points(c.input_file);
    if (c.generator == "rose") return rose_curve(c.m).points;
    if (c.generator == "blob") return blob_curve(c.m).points;
    throw Error(ErrorCode::InvalidConfig, "generator '" + c.generator + "' is not a curve");
}

PointGrid surface_data(const ExperimentConfig& c) {
    if (!c.input_file.empty()) return load_surface_points(c.input_file);
    if (c.generator == "boy") return boy_surface(c.m, c.p).grid;
    throw Error(ErrorCode::InvalidConfig, "generator '" + c.generator + "' is not a surface");
}

double epsilon_energy(const CurveProblem& pr) { return (pr.reference - pr.clean).squaredNorm(); }

double epsilon_energy(const SurfaceProblem& pr) {
    double s = 0.0;
    for (std::size_t c = 0; c < pr.clean.dims(); ++c) s += (pr.reference[c] - pr.clean[c]).squaredNorm();
    return s;
}

double resolve_alpha(const ExperimentConfig& c) { return c.alpha > 0.0 ? c.alpha : problem_spectrum(c).alpha; }

// ---- per-seed fits ----

struct CurveFit {
    Eigen::MatrixXd control_points;
    double lambda_echo = 0.0;
    std::size_t iterations = 0;
    std::string stop_reason;
    std::vector<TrajectorySample> trajectory;
};

CurveFit solve_curve(const CurveProblem& pr, const ExperimentConfig& c, const Eigen::MatrixXd& noisy, double lambda,
                     SolverKind kind, std::uint64_t seed, bool keep_trajectory) {
    const AugmentedCurveSystem system = augment_curve(pr.a, pr.gamma, noisy, lambda);
    CurveFit fit;
    fit.lambda_echo = system.lambda;
    if (kind == SolverKind::Direct) {
        fit.control_points = solve_curve_direct(system).control_points;
        fit.stop_reason = "direct";
        return fit;
    }
    const BlockPartition partition = make_partition(system.a_hat, c.block_size);
    const RpiaCurve solver(system, partition);
    RunOptions options;
    options.trajectory_stride = keep_trajectory ? c.trajectory_stride : 0;
    options.reference = &pr.reference;
    CurveFitResult r = solver.run(initial_control_points(noisy, c.n1), stopping_rule(c), seed, options);
    fit.control_points = std::move(r.control_points);
    fit.iterations = r.iterations;
    fit.stop_reason = stop_name(r.stop_reason);
    fit.trajectory = std::move(r.trajectory);
    return fit;
}

struct SurfaceFit {
    PointGrid control_grid;
    double lambda_echo = 0.0;
    std::size_t iterations = 0;
    std::string stop_reason;
    std::vector<TrajectorySample> trajectory;
};

SurfaceFit solve_surface(const SurfaceProblem& pr, const ExperimentConfig& c, const PointGrid& noisy, double lambda,
                         SolverKind kind, std::uint64_t seed, bool keep_trajectory) {
    const AugmentedSurfaceSystem system = augment_surface(pr.a, pr.b, pr.l_u, pr.l_v, noisy, lambda);
    SurfaceFit fit;
    fit.lambda_echo = system.lambda;
    if (kind == SolverKind::Direct) {
        fit.control_grid = solve_surface_direct(system).control_grid;
        fit.stop_reason = "direct";
        return fit;
    }
    const BlockPartition rows = make_partition(system.a_hat, c.block_size);
    const BlockPartition cols = make_partition(system.b_hat, c.block_size_v);
    const RpiaSurface solver(system, rows, cols);
    RunOptions options;
    options.trajectory_stride = keep_trajectory ? c.trajectory_stride : 0;
    SurfaceFitResult r =
        solver.run(initial_control_grid(noisy, c.n1, c.n2), stopping_rule(c), seed, options, &pr.reference);
    fit.control_grid = std::move(r.control_grid);
    fit.iterations = r.iterations;
    fit.stop_reason = stop_name(r.stop_reason);
    fit.trajectory = std::move(r.trajectory);
    return fit;
}

// A batch at a fixed lambda, or per-seed self-consistent lambdas when
// `alpha` is set.
struct Batch {
    std::vector<SeedResult> seeds;
    Eigen::MatrixXd first_control_points;
    PointGrid first_control_grid;
};

Batch run_curve_batch(const CurveProblem& pr, const ExperimentConfig& c, double lambda, std::optional<double> alpha,
                      bool keep_trajectory) {
    Batch batch;
    batch.seeds.resize(c.seeds.size());
    std::vector<Eigen::MatrixXd> controls(c.seeds.size());
    parallel_for(c.seeds.size(), c.workers, [&](std::size_t i) {
        const auto t0 = Clock::now();
        const std::uint64_t seed = c.seeds[i];
        SeedResult& out = batch.seeds[i];
        out.seed = seed;
        const Eigen::MatrixXd noisy = add_noise(pr.clean, {c.noise, seed}).points;
        CurveFit fit;
        if (alpha) {
            SelfConsistentOptions o;
            o.alpha = *alpha;
            o.eps_lambda = c.eps_lambda;
            o.max_outer = c.max_outer;
            CurveFit last;
            const CurveSolver inner = [&](double lam) {
                last = solve_curve(pr, c, noisy, lam, c.inner_solver, seed, keep_trajectory);
                return last.control_points;
            };
            CurveSelfConsistentResult sc = self_consistent_curve(pr.a, pr.gamma, noisy, inner, o);
            fit = std::move(last);
            out.lambda = sc.lambda;
            out.next_lambda = sc.next_lambda;
            out.lambda_log = std::move(sc.log);
            out.iterations = out.lambda_log.size();
        } else {
            fit = solve_curve(pr, c, noisy, lambda, c.solver, seed, keep_trajectory);
            out.lambda = lambda;
            out.iterations = fit.iterations;
        }
        out.lambda_echo = fit.lambda_echo;
        out.stop_reason = fit.stop_reason;
        out.trajectory = std::move(fit.trajectory);
        out.squared_error = squared_fit_error(pr.a, fit.control_points, pr.p_bar);
        out.error = std::sqrt(out.squared_error);
        controls[i] = std::move(fit.control_points);
        out.wall_seconds = seconds_since(t0);
    });
    batch.first_control_points = std::move(controls.front());
    return batch;
}

Batch run_surface_batch(const SurfaceProblem& pr, const ExperimentConfig& c, double lambda,
                        std::optional<double> alpha, bool keep_trajectory) {
    Batch batch;
    batch.seeds.resize(c.seeds.size());
    std::vector<PointGrid> controls(c.seeds.size());
    parallel_for(c.seeds.size(), c.workers, [&](std::size_t i) {
        const auto t0 = Clock::now();
        const std::uint64_t seed = c.seeds[i];
        SeedResult& out = batch.seeds[i];
        out.seed = seed;
        const PointGrid noisy = add_noise(pr.clean, {c.noise, seed}).grid;
        SurfaceFit fit;
        if (alpha) {
            SelfConsistentOptions o;
            o.alpha = *alpha;
            o.eps_lambda = c.eps_lambda;
            o.max_outer = c.max_outer;
            SurfaceFit last;
            const SurfaceSolver inner = [&](double lam) {
                last = solve_surface(pr, c, noisy, lam, c.inner_solver, seed, keep_trajectory);
                return last.control_grid;
            };
            SurfaceSelfConsistentResult sc = self_consistent_surface(pr.a, pr.b, pr.l_u, pr.l_v, noisy, inner, o);
            fit = std::move(last);
            out.lambda = sc.lambda;
            out.next_lambda = sc.next_lambda;
            out.lambda_log = std::move(sc.log);
            out.iterations = out.lambda_log.size();
        } else {
            fit = solve_surface(pr, c, noisy, lambda, c.solver, seed, keep_trajectory);
            out.lambda = lambda;
            out.iterations = fit.iterations;
        }
        out.lambda_echo = fit.lambda_echo;
        out.stop_reason = fit.stop_reason;
        out.trajectory = std::move(fit.trajectory);
        out.squared_error = squared_fit_error(pr.a, pr.b, fit.control_grid, pr.p_bar);
        out.error = std::sqrt(out.squared_error);
        controls[i] = std::move(fit.control_grid);
        out.wall_seconds = seconds_since(t0);
    });
    batch.first_control_grid = std::move(controls.front());
    return batch;
}

Batch run_batch(const ExperimentConfig& c, const CurveProblem* curve, const SurfaceProblem* surface, double lambda,
                std::optional<double> alpha, bool keep_trajectory) {
    return curve ? run_curve_batch(*curve, c, lambda, alpha, keep_trajectory)
                 : run_surface_batch(*surface, c, lambda, alpha, keep_trajectory);
}

void summarize(FitReport& report) {
    std::vector<double> e;
    std::vector<double> e2;
    for (const auto& s : report.seeds) {
        e.push_back(s.error);
        e2.push_back(s.squared_error);
    }
    std::tie(report.mean_error, report.std_error) = mean_std(e);
    report.mean_squared_error = mean_std(e2).first;
}

FitReport new_report(const ExperimentConfig& c) {
    FitReport r;
    r.name = c.name;
    r.problem = c.problem;
    r.lambda_mode = c.lambda_mode;
    r.solver = c.solver;
    return r;
}

LambdaEstimate estimate_from(const ExperimentConfig& c, const CurveProblem* curve, const SurfaceProblem* surface) {
    LambdaEstimate est;
    est.decay = problem_spectrum(c);
    est.alpha = c.alpha > 0.0 ? c.alpha : est.decay.alpha;
    if (curve) {
        est.n = curve->a.cols();
        est.penalty_norm2 = curve_penalty_norm2(curve->gamma, curve->p_bar);
        est.noise.sigma2 = c.noise * c.noise / static_cast<double>(curve->clean.size());
        est.noise.epsilon_norm2 = epsilon_energy(*curve);
    } else {
        est.n = surface->a.cols() * surface->b.cols();
        est.penalty_norm2 = surface_penalty_norm2(surface->a, surface->b, surface->l_u, surface->l_v, surface->p_bar);
        est.noise.sigma2 = c.noise * c.noise / static_cast<double>(surface->clean.size());
        est.noise.epsilon_norm2 = epsilon_energy(*surface);
    }
    est.lambda = optimal_lambda(est.alpha, est.noise, est.n, est.penalty_norm2);
    return est;
}

std::string fmt17(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

std::ofstream open_out(const std::filesystem::path& p) {
    std::ofstream out(p);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + p.string());
    return out;
}

}  // namespace

CurveProblem build_curve_problem(const ExperimentConfig& c) {
    CurveProblem pr;
    pr.clean = curve_data(c);
    pr.params = chord_length_params(pr.clean, &pr.warnings);
    pr.knots = build_knots(pr.params, static_cast<std::size_t>(c.n1));
    pr.a = assemble_collocation(pr.knots, pr.params);
    pr.gamma = difference_matrix(c.n1 + 1, c.penalty_scale);
    pr.p_bar = solve_curve_direct(augment_curve(pr.a, pr.gamma, pr.clean, 0.0)).control_points;
    pr.reference = pr.a * pr.p_bar;
    return pr;
}

SurfaceProblem build_surface_problem(const ExperimentConfig& c) {
    SurfaceProblem pr;
    pr.clean = surface_data(c);
    std::tie(pr.params_u, pr.params_v) = surface_params(pr.clean, &pr.warnings);
    pr.knots_u = build_knots(pr.params_u, static_cast<std::size_t>(c.n1));
    pr.knots_v = build_knots(pr.params_v, static_cast<std::size_t>(c.n2));
    pr.a = assemble_collocation(pr.knots_u, pr.params_u);
    pr.b = assemble_collocation(pr.knots_v, pr.params_v);
    pr.l_u = difference_matrix(c.n1 + 1, c.penalty_scale);
    pr.l_v = difference_matrix(c.n2 + 1, c.penalty_scale);
    pr.p_bar = solve_surface_direct(augment_surface(pr.a, pr.b, pr.l_u, pr.l_v, pr.clean, 0.0)).control_grid;
    pr.reference = PointGrid();
    for (std::size_t k = 0; k < pr.p_bar.dims(); ++k) pr.reference.slices.push_back(pr.a * pr.p_bar[k] * pr.b.transpose());
    return pr;
}

SpectralDecayFit problem_spectrum(const ExperimentConfig& c) {
    if (c.problem == ProblemKind::Curve) {
        const CurveProblem pr = build_curve_problem(c);
        return spectral_decay(build_q(pr.a, pr.gamma), c.head_count);
    }
    const SurfaceProblem pr = build_surface_problem(c);
    return surface_spectral_decay(pr.a, pr.b, pr.l_u, pr.l_v, c.head_count);
}

LambdaEstimate estimate_lambda(const ExperimentConfig& c) {
    validate(c);
    if (c.problem == ProblemKind::Curve) {
        const CurveProblem pr = build_curve_problem(c);
        return estimate_from(c, &pr, nullptr);
    }
    const SurfaceProblem pr = build_surface_problem(c);
    return estimate_from(c, nullptr, &pr);
}

std::pair<double, double> mean_std(const std::vector<double>& values) {
    if (values.empty()) return {0.0, 0.0};
    double sum = 0.0;
    for (double v : values) sum += v;
    const double mean = sum / static_cast<double>(values.size());
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / static_cast<double>(values.size()))};
}

FitReport run_experiment(const ExperimentConfig& c) {
    validate(c);
    if (c.lambda_mode == LambdaMode::Sweep) return sweep_lambda(c);
    const auto t0 = Clock::now();
    std::optional<CurveProblem> curve;
    std::optional<SurfaceProblem> surface;
    if (c.problem == ProblemKind::Curve) curve = build_curve_problem(c);
    else surface = build_surface_problem(c);
    const CurveProblem* cp = curve ? &*curve : nullptr;
    const SurfaceProblem* sp = surface ? &*surface : nullptr;

    FitReport report = new_report(c);
    report.warnings = cp ? cp->warnings : sp->warnings;
    report.epsilon_norm2 = cp ? epsilon_energy(*cp) : epsilon_energy(*sp);

    double lambda = c.lambda;
    std::optional<double> alpha;
    if (c.lambda_mode == LambdaMode::Estimate) {
        report.estimate = estimate_from(c, cp, sp);
        lambda = report.estimate->lambda;
    } else if (c.lambda_mode == LambdaMode::SelfConsistent) {
        alpha = resolve_alpha(c);
    }
    Batch batch = run_batch(c, cp, sp, lambda, alpha, true);
    report.seeds = std::move(batch.seeds);
    report.first_control_points = std::move(batch.first_control_points);
    report.first_control_grid = std::move(batch.first_control_grid);
    summarize(report);
    report.wall_seconds = seconds_since(t0);
    return report;
}

FitReport sweep_lambda(const ExperimentConfig& c) {
    validate(c);
    const auto t0 = Clock::now();
    std::optional<CurveProblem> curve;
    std::optional<SurfaceProblem> surface;
    if (c.problem == ProblemKind::Curve) curve = build_curve_problem(c);
    else surface = build_surface_problem(c);
    const CurveProblem* cp = curve ? &*curve : nullptr;
    const SurfaceProblem* sp = surface ? &*surface : nullptr;

    FitReport report = new_report(c);
    report.lambda_mode = LambdaMode::Sweep;
    report.warnings = cp ? cp->warnings : sp->warnings;
    report.epsilon_norm2 = cp ? epsilon_energy(*cp) : epsilon_energy(*sp);

    auto add_row = [&](double lambda, const char* kind) {
        Batch b = run_batch(c, cp, sp, lambda, std::nullopt, false);
        std::vector<double> e;
        for (const auto& s : b.seeds) e.push_back(s.error);
        const auto [mean, sd] = mean_std(e);
        report.sweep.push_back({lambda, mean, sd, kind});
        return b;
    };
    for (double lambda : c.sweep.values()) add_row(lambda, "grid");
    if (c.noise > 0.0) {
        report.estimate = estimate_from(c, cp, sp);
        Batch b = add_row(report.estimate->lambda, "estimate");
        report.seeds = std::move(b.seeds);
        report.first_control_points = std::move(b.first_control_points);
        report.first_control_grid = std::move(b.first_control_grid);
        summarize(report);
    }
    report.wall_seconds = seconds_since(t0);
    return report;
}

Eigen::MatrixXd sample_curve(const KnotVector& knots, const Eigen::MatrixXd& control_points, Eigen::Index count) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(count, control_points.cols());
    for (Eigen::Index j = 0; j < count; ++j) {
        const double x = count > 1 ? static_cast<double>(j) / static_cast<double>(count - 1) : 0.0;
        for (const auto& bv : eval_basis(knots, x)) {
            out.row(j) += bv.value * control_points.row(static_cast<Eigen::Index>(bv.index));
        }
    }
    return out;
}

PointGrid sample_surface(const KnotVector& knots_u, const KnotVector& knots_v, const PointGrid& control_grid,
                         Eigen::Index rows, Eigen::Index cols) {
    auto basis_matrix = [](const KnotVector& kv, Eigen::Index count) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(count, static_cast<Eigen::Index>(kv.basis_count()));
        for (Eigen::Index j = 0; j < count; ++j) {
            const double x = count > 1 ? static_cast<double>(j) / static_cast<double>(count - 1) : 0.0;
            for (const auto& bv : eval_basis(kv, x)) m(j, static_cast<Eigen::Index>(bv.index)) = bv.value;
        }
        return m;
    };
    const Eigen::MatrixXd bu = basis_matrix(knots_u, rows);
    const Eigen::MatrixXd bv = basis_matrix(knots_v, cols);
    PointGrid out;
    for (std::size_t c = 0; c < control_grid.dims(); ++c) out.slices.push_back(bu * control_grid[c] * bv.transpose());
    return out;
}

std::string report_json(const FitReport& r, const ExperimentConfig& c) {
    using nlohmann::json;
    json j;
    j["name"] = r.name;
    j["problem"] = to_string(r.problem);
    j["lambda_mode"] = to_string(r.lambda_mode);
    j["solver"] = to_string(r.solver);
    j["config"] = {{"m", c.m},
                   {"p", c.p},
                   {"n1", c.n1},
                   {"n2", c.n2},
                   {"block_size", c.block_size},
                   {"block_size_v", c.block_size_v},
                   {"noise", c.noise},
                   {"penalty_scale", c.penalty_scale},
                   {"tolerance", c.tolerance},
                   {"max_iterations", c.max_iterations},
                   {"lag", c.lag},
                   {"generator", c.input_file.empty() ? c.generator : std::string()},
                   {"input_file", c.input_file.string()},
                   {"inner_solver", to_string(c.inner_solver)},
                   {"eps_lambda", c.eps_lambda}};
    j["mean_error"] = r.mean_error;
    j["std_error"] = r.std_error;
    j["mean_squared_error"] = r.mean_squared_error;
    j["epsilon_norm2"] = r.epsilon_norm2;
    json seeds = json::array();
    json timing_seeds = json::array();
    for (const auto& s : r.seeds) {
        json js = {{"seed", s.seed},
                   {"lambda", s.lambda},
                   {"lambda_echo", s.lambda_echo},
                   {"error", s.error},
                   {"squared_error", s.squared_error},
                   {"iterations", s.iterations},
                   {"stop_reason", s.stop_reason}};
        if (!s.lambda_log.empty()) {
            json log = json::array();
            for (const auto& it : s.lambda_log) {
                log.push_back({{"k", it.k}, {"lambda", it.lambda}, {"misfit", it.misfit}, {"penalty", it.penalty}});
            }
            js["lambda_log"] = log;
            js["next_lambda"] = s.next_lambda;
        }
        seeds.push_back(js);
        timing_seeds.push_back({{"seed", s.seed}, {"wall_seconds", s.wall_seconds}});
    }
    j["seeds"] = seeds;
    if (r.estimate) {
        const auto& e = *r.estimate;
        j["estimate"] = {{"alpha", e.alpha},
                         {"fitted_alpha", e.decay.alpha},
                         {"head_count", e.decay.head_count},
                         {"fit_residual", e.decay.fit_residual},
                         {"sigma2", e.noise.sigma2},
                         {"epsilon_norm2", e.noise.epsilon_norm2},
                         {"n", e.n},
                         {"penalty_norm2", e.penalty_norm2},
                         {"lambda", e.lambda}};
    }
    if (!r.sweep.empty()) {
        json rows = json::array();
        for (const auto& row : r.sweep) {
            rows.push_back({{"lambda", row.lambda}, {"mean_error", row.mean_error}, {"std_error", row.std_error}, {"kind", row.kind}});
        }
        j["sweep"] = rows;
    }
    j["warnings"] = r.warnings;
    j["timing"] = {{"wall_seconds", r.wall_seconds}, {"seeds", timing_seeds}};
    return j.dump(2) + "\n";
}

void write_bundle(const FitReport& r, const ExperimentConfig& c, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());

    {
        auto out = open_out(dir / "report.json");
        out << report_json(r, c);
    }
    {
        auto out = open_out(dir / "summary.txt");
        out << r.name << " (" << to_string(r.problem) << ", lambda " << to_string(r.lambda_mode) << ", solver "
            << to_string(r.solver) << ")\n";
        if (r.estimate) {
            out << "alpha " << fmt6(r.estimate->alpha) << "  sigma2 " << fmt6(r.estimate->noise.sigma2)
                << "  penalty_norm2 " << fmt6(r.estimate->penalty_norm2) << "  estimated lambda "
                << fmt6(r.estimate->lambda) << '\n';
        }
        for (const auto& s : r.seeds) {
            out << "seed " << s.seed << "  lambda " << fmt6(s.lambda) << "  E " << fmt6(s.error) << "  E^2 "
                << fmt6(s.squared_error) << "  iterations " << s.iterations << " (" << s.stop_reason << ")\n";
        }
        if (!r.seeds.empty()) {
            out << "mean E " << fmt6(r.mean_error) << "  std " << fmt6(r.std_error) << "  mean E^2 "
                << fmt6(r.mean_squared_error) << '\n';
        }
        for (const auto& row : r.sweep) {
            out << "sweep " << row.kind << "  lambda " << fmt6(row.lambda) << "  mean E " << fmt6(row.mean_error)
                << "  std " << fmt6(row.std_error) << '\n';
        }
        for (const auto& w : r.warnings) out << "warning: " << w << '\n';
        out << "wall time " << fmt6(r.wall_seconds) << " s\n";
    }
    {
        auto out = open_out(dir / "trajectory.csv");
        out << "seed,iteration,residual_norm,error\n";
        for (const auto& s : r.seeds) {
            for (const auto& t : s.trajectory) {
                out << s.seed << ',' << t.iteration << ',' << fmt17(t.residual_norm) << ','
                    << (std::isnan(t.error) ? std::string() : fmt17(t.error)) << '\n';
            }
        }
    }
    if (!r.sweep.empty()) {
        auto out = open_out(dir / "sweep.csv");
        out << "lambda,mean_error,std_error,kind\n";
        for (const auto& row : r.sweep) {
            out << fmt17(row.lambda) << ',' << fmt17(row.mean_error) << ',' << fmt17(row.std_error) << ',' << row.kind
                << '\n';
        }
    }
    if (r.seeds.empty()) return;
    if (r.problem == ProblemKind::Curve) {
        const CurveProblem pr = build_curve_problem(c);
        save_curve_points(dir / "fitted_curve.csv", sample_curve(pr.knots, r.first_control_points, 5 * pr.clean.rows()));
    } else {
        const SurfaceProblem pr = build_surface_problem(c);
        save_surface_points(dir / "fitted_surface.csv", sample_surface(pr.knots_u, pr.knots_v, r.first_control_grid,
                                                                       5 * pr.clean.rows(), 5 * pr.clean.cols()));
    }
}

}  // namespace rpir
