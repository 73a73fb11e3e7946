#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace rpir {

enum class ProblemKind { Curve, Surface };

enum class LambdaMode { Explicit, Estimate, SelfConsistent, Sweep };

/// How a control-point fit is obtained: the randomized iteration or the
/// normal equations.
enum class SolverKind { Rpia, Direct };

struct SweepGrid {
    double min = 1e-9;
    double max = 1e-3;
    std::size_t points = 25;

    std::vector<double> values() const;  // log-spaced, both ends included
};

struct ExperimentConfig {
    std::string name = "experiment";
    ProblemKind problem = ProblemKind::Curve;

    // data
    std::string generator = "rose";  // rose | blob | boy, ignored when input_file is set
    std::filesystem::path input_file;
    Eigen::Index m = 1000;
    Eigen::Index p = 60;
    double noise = 10.0;

    // model
    Eigen::Index n1 = 100;
    Eigen::Index n2 = 20;
    Eigen::Index block_size = 5;
    Eigen::Index block_size_v = 5;
    double penalty_scale = 1600.0;

    // lambda
    LambdaMode lambda_mode = LambdaMode::Explicit;
    double lambda = 0.0;
    SweepGrid sweep;
    std::size_t head_count = 50;
    double alpha = 0.0;  // > 0 overrides the fitted exponent
    double eps_lambda = 0.01;
    std::size_t max_outer = 50;
    SolverKind inner_solver = SolverKind::Direct;  // inside the self-consistent loop

    // fitting
    SolverKind solver = SolverKind::Rpia;
    double tolerance = 1e-8;
    std::size_t max_iterations = 8000;
    std::size_t lag = 0;
    std::size_t trajectory_stride = 10;

    // run
    std::vector<std::uint64_t> seeds;
    std::size_t workers = 0;  // 0: hardware concurrency
    std::filesystem::path output_dir;
};

/// Defaults for the problem kind: the curve or the surface example sizes,
/// 10 or 3 seeds.
ExperimentConfig default_config(ProblemKind kind);

/// Reads a YAML file over the defaults for its `problem`. Unknown keys are
/// rejected. Throws InvalidConfig or IoError.
ExperimentConfig load_config(const std::filesystem::path& path);

/// Same, from YAML text.
ExperimentConfig parse_config(const std::string& yaml_text);

/// Throws InvalidConfig on the first violated constraint.
void validate(const ExperimentConfig& config);

const char* to_string(ProblemKind kind);
const char* to_string(LambdaMode mode);
const char* to_string(SolverKind kind);

ProblemKind parse_problem_kind(const std::string& s);
LambdaMode parse_lambda_mode(const std::string& s);
SolverKind parse_solver_kind(const std::string& s);

}  // namespace rpir
