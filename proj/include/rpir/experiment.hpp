#pragma once

// Experiment orchestration: data, parametrization, assembly, lambda choice,
// per-seed fits, scoring and the report bundle.

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rpir/assembly.hpp"
#include "rpir/bspline.hpp"
#include "rpir/config.hpp"
#include "rpir/points.hpp"
#include "rpir/regparam.hpp"
#include "rpir/rpia_curve.hpp"

namespace rpir {

/// Everything that does not depend on the seed. The parametrization, knots and
/// collocation matrices come from the clean data, so every seed is scored
/// against the same reference A p_bar.
struct CurveProblem {
    Eigen::MatrixXd clean;
    ParamSequence params;
    KnotVector knots;
    CollocationMatrix a;
    DifferenceMatrix gamma;
    Eigen::MatrixXd p_bar;      // unregularized LS fit of the clean data
    Eigen::MatrixXd reference;  // A p_bar
    std::vector<std::string> warnings;
};

struct SurfaceProblem {
    PointGrid clean;
    ParamSequence params_u;
    ParamSequence params_v;
    KnotVector knots_u;
    KnotVector knots_v;
    CollocationMatrix a;
    CollocationMatrix b;
    DifferenceMatrix l_u;
    DifferenceMatrix l_v;
    PointGrid p_bar;
    PointGrid reference;
    std::vector<std::string> warnings;
};

CurveProblem build_curve_problem(const ExperimentConfig& config);
SurfaceProblem build_surface_problem(const ExperimentConfig& config);

/// Inputs and output of the noise-level rule.
struct LambdaEstimate {
    SpectralDecayFit decay;
    double alpha = 0.0;  // the exponent used (fitted unless overridden)
    NoiseModel noise;
    Eigen::Index n = 0;
    double penalty_norm2 = 0.0;
    double lambda = 0.0;
};

SpectralDecayFit problem_spectrum(const ExperimentConfig& config);
LambdaEstimate estimate_lambda(const ExperimentConfig& config);

struct SeedResult {
    std::uint64_t seed = 0;
    double lambda = 0.0;       // as requested
    double lambda_echo = 0.0;  // as stored in the assembled system
    double error = 0.0;
    double squared_error = 0.0;
    std::size_t iterations = 0;
    std::string stop_reason;
    double wall_seconds = 0.0;
    std::vector<TrajectorySample> trajectory;
    std::vector<LambdaIterate> lambda_log;  // self-consistent runs only
    double next_lambda = 0.0;               // self-consistent runs only
};

struct SweepRow {
    double lambda = 0.0;
    double mean_error = 0.0;
    double std_error = 0.0;
    std::string kind;  // "grid" or "estimate"
};

struct FitReport {
    std::string name;
    ProblemKind problem = ProblemKind::Curve;
    LambdaMode lambda_mode = LambdaMode::Explicit;
    SolverKind solver = SolverKind::Rpia;
    std::vector<SeedResult> seeds;
    double mean_error = 0.0;
    double std_error = 0.0;
    double mean_squared_error = 0.0;
    std::optional<LambdaEstimate> estimate;
    double epsilon_norm2 = 0.0;  // clean-data LS residual energy
    std::vector<SweepRow> sweep;
    std::vector<std::string> warnings;
    double wall_seconds = 0.0;
    // Controls of the first seed, for the fitted-geometry export.
    Eigen::MatrixXd first_control_points;
    PointGrid first_control_grid;
};

/// One fit batch at a fixed lambda (modes explicit and estimate resolve
/// lambda first; self-consistent resolves it per seed). Sweep mode delegates
/// to sweep_lambda.
FitReport run_experiment(const ExperimentConfig& config);

/// One batch per grid point plus a row for the rule-estimated lambda (when
/// noise > 0). The per-row seed results are not kept.
FitReport sweep_lambda(const ExperimentConfig& config);

/// Population mean and standard deviation, summed in seed order.
std::pair<double, double> mean_std(const std::vector<double>& values);

/// report.json, summary.txt, trajectory.csv, sweep.csv (sweeps only) and the
/// fitted geometry at 5x data density. Creates the directory.
void write_bundle(const FitReport& report, const ExperimentConfig& config, const std::filesystem::path& dir);

/// The JSON document written as report.json. Wall-clock fields live under
/// "timing" so everything else is reproducible byte for byte.
std::string report_json(const FitReport& report, const ExperimentConfig& config);

/// Evaluate a fitted curve at `count` uniform parameters in [0, 1].
Eigen::MatrixXd sample_curve(const KnotVector& knots, const Eigen::MatrixXd& control_points, Eigen::Index count);

/// Evaluate a fitted tensor-product surface on a uniform rows x cols grid.
PointGrid sample_surface(const KnotVector& knots_u, const KnotVector& knots_v, const PointGrid& control_grid,
                         Eigen::Index rows, Eigen::Index cols);

}  // namespace rpir
