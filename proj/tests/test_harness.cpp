#include <doctest.h>

#include <json.hpp>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

#include "rpir/config.hpp"
#include "rpir/csv_io.hpp"
#include "rpir/datasets.hpp"
#include "rpir/error.hpp"
#include "rpir/experiment.hpp"

using namespace rpir;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected an rpir::Error");
    return ErrorCode::IoError;
}

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("rpir_" + tag + "_" + std::to_string(::getpid()));
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string read_text(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

ExperimentConfig small_curve() {
    ExperimentConfig c = default_config(ProblemKind::Curve);
    c.m = 200;
    c.n1 = 40;
    c.noise = 2.0;
    c.lambda = 1e-6;
    c.max_iterations = 2000;
    c.trajectory_stride = 100;
    c.seeds = {1, 2, 3, 4};
    return c;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(RPIR_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string without_timing(const std::string& json_text) {
    auto j = nlohmann::json::parse(json_text);
    j.erase("timing");
    return j.dump();
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("curve CSV round trip is bit-identical") {
    TempDir dir("csv");
    const auto pts = rose_curve(100).points;
    save_curve_points(dir.path / "rose.csv", pts);
    const auto back = load_curve_points(dir.path / "rose.csv");
    REQUIRE(back.rows() == pts.rows());
    REQUIRE(back.cols() == pts.cols());
    for (Eigen::Index i = 0; i < pts.rows(); ++i) {
        for (Eigen::Index c = 0; c < pts.cols(); ++c) REQUIRE(back(i, c) == pts(i, c));
    }

    const auto grid = boy_surface(6, 5).grid;
    save_surface_points(dir.path / "boy.csv", grid);
    const auto g2 = load_surface_points(dir.path / "boy.csv");
    for (std::size_t c = 0; c < 3; ++c) CHECK(g2[c] == grid[c]);
}

TEST_CASE("CSV errors") {
    TempDir dir("csv_err");
    write_text(dir.path / "bad.csv", "x,y\n1,2\n3,oops\n5,6\n");
    try {
        load_curve_points(dir.path / "bad.csv");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find(":3:") != std::string::npos);
    }
    write_text(dir.path / "hole.csv", "row,col,x,y,z\n0,0,1,1,1\n0,1,1,1,1\n1,0,1,1,1\n");
    CHECK(code_of([&] { load_surface_points(dir.path / "hole.csv"); }) == ErrorCode::IncompleteGrid);
    write_text(dir.path / "dup.csv", "row,col,x,y,z\n0,0,1,1,1\n0,0,1,1,1\n");
    CHECK(code_of([&] { load_surface_points(dir.path / "dup.csv"); }) == ErrorCode::ParseError);
    CHECK(code_of([&] { load_curve_points(dir.path / "missing.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("config parsing") {
    const auto c = parse_config(R"(
name: t
problem: curve
data: {generator: blob, m: 300, noise: 5}
model: {n1: 30, block_size: 3, penalty_scale: 100}
lambda: 2.5e-7
solver: {kind: direct, max_iterations: 10}
seeds: [4, 5]
)");
    CHECK(c.name == "t");
    CHECK(c.generator == "blob");
    CHECK(c.m == 300);
    CHECK(c.n1 == 30);
    CHECK(c.block_size == 3);
    CHECK(c.lambda_mode == LambdaMode::Explicit);
    CHECK(c.lambda == 2.5e-7);
    CHECK(c.solver == SolverKind::Direct);
    CHECK(c.seeds == std::vector<std::uint64_t>{4, 5});

    const auto s = parse_config("problem: surface\nlambda: {mode: sweep, sweep: {min: 1e-9, max: 1e-3, points: 7}}\n");
    CHECK(s.problem == ProblemKind::Surface);
    CHECK(s.seeds.size() == 3);
    const auto grid = s.sweep.values();
    REQUIRE(grid.size() == 7);
    CHECK(grid.front() == doctest::Approx(1e-9));
    CHECK(grid.back() == doctest::Approx(1e-3));
    for (std::size_t k = 1; k < grid.size(); ++k) CHECK(grid[k] / grid[k - 1] == doctest::Approx(10.0));

    CHECK(code_of([] { parse_config("model: {n1: 30, colour: red}\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("bogus: 1\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("seeds: []\n"); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { parse_config("model: {n1: -3}\n"); }) == ErrorCode::InvalidConfig);

    for (const auto& entry : fs::directory_iterator(RPIR_CONFIG_DIR)) {
        CAPTURE(entry.path().string());
        CHECK_NOTHROW(load_config(entry.path()));
    }
}

TEST_CASE("reports are reproducible and seed order does not matter") {
    auto c = small_curve();
    const auto a = run_experiment(c);
    const auto b = run_experiment(c);
    CHECK(without_timing(report_json(a, c)) == without_timing(report_json(b, c)));

    auto single = c;
    single.workers = 1;
    CHECK(without_timing(report_json(run_experiment(single), single)) == without_timing(report_json(a, c)));

    auto perm = c;
    perm.seeds = {3, 1, 4, 2};
    const auto p = run_experiment(perm);
    CHECK(std::abs(p.mean_error - a.mean_error) <= 1e-15);
    CHECK(std::abs(p.std_error - a.std_error) <= 1e-15);
    for (const auto& s : p.seeds) {
        const auto it = std::find_if(a.seeds.begin(), a.seeds.end(), [&](const SeedResult& r) { return r.seed == s.seed; });
        REQUIRE(it != a.seeds.end());
        CHECK(it->error == s.error);
    }

    std::vector<double> errors;
    for (const auto& s : a.seeds) {
        CHECK(s.lambda_echo == s.lambda);
        CHECK(s.lambda == 1e-6);
        errors.push_back(s.error);
    }
    const auto [m, sd] = mean_std(errors);
    CHECK(a.mean_error == m);
    CHECK(a.std_error == sd);
}

TEST_CASE("zero iterations echo the initial error") {
    auto c = small_curve();
    c.max_iterations = 0;
    c.seeds = {7};
    const auto r = run_experiment(c);
    REQUIRE(r.seeds.size() == 1);
    CHECK(r.seeds[0].iterations == 0);

    const auto problem = build_curve_problem(c);
    const auto noisy = add_noise(problem.clean, {c.noise, 7}).points;
    const auto p0 = initial_control_points(noisy, c.n1);
    CHECK(r.seeds[0].error == doctest::Approx(fit_error(problem.a, p0, problem.p_bar)).epsilon(1e-12));
}

TEST_CASE("single-point sweep") {
    auto c = small_curve();
    c.lambda_mode = LambdaMode::Sweep;
    c.sweep.min = c.sweep.max = 1e-6;
    c.sweep.points = 1;
    c.noise = 0.0;
    c.seeds = {1, 2};
    const auto r = sweep_lambda(c);
    REQUIRE(r.sweep.size() == 1);
    CHECK(r.sweep[0].kind == "grid");
    CHECK(r.sweep[0].lambda == 1e-6);
}

TEST_CASE("output bundle") {
    TempDir dir("bundle");
    auto c = small_curve();
    c.seeds = {1, 2};
    const auto r = run_experiment(c);
    write_bundle(r, c, dir.path);
    for (const char* f : {"report.json", "summary.txt", "trajectory.csv", "fitted_curve.csv"}) {
        CAPTURE(f);
        CHECK(fs::exists(dir.path / f));
    }
    CHECK(!fs::exists(dir.path / "sweep.csv"));
    const auto fitted = load_curve_points(dir.path / "fitted_curve.csv");
    CHECK(fitted.rows() == 5 * 201);
    const auto j = nlohmann::json::parse(read_text(dir.path / "report.json"));
    CHECK(j["seeds"].size() == 2);
    CHECK(j["mean_error"].get<double>() == r.mean_error);
    CHECK(read_text(dir.path / "trajectory.csv").rfind("seed,iteration,residual_norm,error\n", 0) == 0);
}

TEST_CASE("command-line exit codes") {
    TempDir dir("cli");
    const std::string out = (dir.path / "pts.csv").string();
    CHECK(run_cli("gen-data --generator rose --m 50 -o " + out) == 0);
    CHECK(load_curve_points(out).rows() == 51);
    CHECK(run_cli("fit --input " + out + " --n1 10 --noise 0 --lambda 1e-6 --seeds 1 --max-iterations 200") == 0);
    CHECK(run_cli("fit --bogus-flag") == 2);
    CHECK(run_cli("fit --n1 -4") == 2);
    CHECK(run_cli("fit --input " + (dir.path / "nope.csv").string()) == 4);
    write_text(dir.path / "bad.yaml", "data: {m: 10, shape: round}\n");
    CHECK(run_cli("fit -c " + (dir.path / "bad.yaml").string()) == 2);
}

}  // TEST_SUITE
