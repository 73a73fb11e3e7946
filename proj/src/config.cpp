#include "rpir/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "rpir/error.hpp"

namespace rpir {

namespace {

[[noreturn]] void bad(const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); }

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) bad(where + " must be a mapping");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const auto key = kv.first.as<std::string>();
        if (!ok.count(key)) bad("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& where) {
    const YAML::Node v = node[key];
    if (!v) return;
    try {
        out = v.as<T>();
    } catch (const YAML::Exception&) {
        bad(where + "." + key + " has the wrong type");
    }
}

void read_index(const YAML::Node& node, const char* key, Eigen::Index& out, const std::string& where) {
    long long v = out;
    read(node, key, v, where);
    out = static_cast<Eigen::Index>(v);
}

void read_size(const YAML::Node& node, const char* key, std::size_t& out, const std::string& where) {
    long long v = static_cast<long long>(out);
    read(node, key, v, where);
    if (v < 0) bad(where + "." + key + " must be nonnegative");
    out = static_cast<std::size_t>(v);
}

void read_lambda(const YAML::Node& node, ExperimentConfig& c) {
    if (node.IsScalar()) {
        const auto s = node.as<std::string>();
        double v = 0.0;
        std::istringstream is(s);
        if (is >> v && is.eof()) {
            c.lambda_mode = LambdaMode::Explicit;
            c.lambda = v;
        } else {
            c.lambda_mode = parse_lambda_mode(s);
        }
        return;
    }
    check_keys(node, "lambda",
               {"mode", "value", "sweep", "head_count", "alpha", "eps", "max_outer", "inner_solver"});
    if (node["mode"]) c.lambda_mode = parse_lambda_mode(node["mode"].as<std::string>());
    read(node, "value", c.lambda, "lambda");
    if (const auto sw = node["sweep"]) {
        check_keys(sw, "lambda.sweep", {"min", "max", "points"});
        read(sw, "min", c.sweep.min, "lambda.sweep");
        read(sw, "max", c.sweep.max, "lambda.sweep");
        read_size(sw, "points", c.sweep.points, "lambda.sweep");
    }
    read_size(node, "head_count", c.head_count, "lambda");
    read(node, "alpha", c.alpha, "lambda");
    read(node, "eps", c.eps_lambda, "lambda");
    read_size(node, "max_outer", c.max_outer, "lambda");
    if (node["inner_solver"]) c.inner_solver = parse_solver_kind(node["inner_solver"].as<std::string>());
}

ExperimentConfig from_yaml(const YAML::Node& root) {
    if (!root || !root.IsMap()) bad("config must be a mapping");
    check_keys(root, "config", {"name", "problem", "data", "model", "lambda", "solver", "seeds", "run"});
    ProblemKind kind = ProblemKind::Curve;
    if (root["problem"]) kind = parse_problem_kind(root["problem"].as<std::string>());
    ExperimentConfig c = default_config(kind);
    read(root, "name", c.name, "config");

    if (const auto d = root["data"]) {
        check_keys(d, "data", {"generator", "input_file", "m", "p", "noise"});
        read(d, "generator", c.generator, "data");
        std::string input;
        read(d, "input_file", input, "data");
        c.input_file = input;
        read_index(d, "m", c.m, "data");
        read_index(d, "p", c.p, "data");
        read(d, "noise", c.noise, "data");
    }
    if (const auto mo = root["model"]) {
        check_keys(mo, "model", {"n1", "n2", "block_size", "block_size_v", "penalty_scale"});
        read_index(mo, "n1", c.n1, "model");
        read_index(mo, "n2", c.n2, "model");
        read_index(mo, "block_size", c.block_size, "model");
        c.block_size_v = c.block_size;
        read_index(mo, "block_size_v", c.block_size_v, "model");
        read(mo, "penalty_scale", c.penalty_scale, "model");
    }
    if (const auto l = root["lambda"]) read_lambda(l, c);
    if (const auto s = root["solver"]) {
        check_keys(s, "solver", {"kind", "tolerance", "max_iterations", "lag", "trajectory_stride"});
        if (s["kind"]) c.solver = parse_solver_kind(s["kind"].as<std::string>());
        read(s, "tolerance", c.tolerance, "solver");
        read_size(s, "max_iterations", c.max_iterations, "solver");
        read_size(s, "lag", c.lag, "solver");
        read_size(s, "trajectory_stride", c.trajectory_stride, "solver");
    }
    if (const auto s = root["seeds"]) {
        if (!s.IsSequence()) bad("seeds must be a list");
        c.seeds.clear();
        for (const auto& v : s) {
            try {
                c.seeds.push_back(v.as<std::uint64_t>());
            } catch (const YAML::Exception&) {
                bad("seeds must be nonnegative integers");
            }
        }
    }
    if (const auto r = root["run"]) {
        check_keys(r, "run", {"workers", "output_dir"});
        read_size(r, "workers", c.workers, "run");
        std::string out;
        read(r, "output_dir", out, "run");
        c.output_dir = out;
    }
    validate(c);
    return c;
}

}  // namespace

std::vector<double> SweepGrid::values() const {
    std::vector<double> out;
    if (points == 0) return out;
    if (points == 1) return {min};
    const double lo = std::log10(min);
    const double hi = std::log10(max);
    for (std::size_t i = 0; i < points; ++i) {
        out.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1)));
    }
    return out;
}

ExperimentConfig default_config(ProblemKind kind) {
    ExperimentConfig c;
    c.problem = kind;
    if (kind == ProblemKind::Surface) {
        c.generator = "boy";
        c.m = 60;
        c.p = 60;
        c.n1 = 20;
        c.n2 = 20;
        c.noise = 40.0;
        c.penalty_scale = 91.0;
        c.head_count = 100;
        c.max_iterations = 10000;
        c.seeds = {1, 2, 3};
    } else {
        c.seeds = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
    }
    return c;
}

ExperimentConfig parse_config(const std::string& yaml_text) {
    YAML::Node root;
    try {
        root = YAML::Load(yaml_text);
    } catch (const YAML::Exception& e) {
        bad(std::string("YAML: ") + e.what());
    }
    return from_yaml(root);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open config " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    try {
        return parse_config(ss.str());
    } catch (const Error& e) {
        if (e.code() != ErrorCode::InvalidConfig) throw;
        throw Error(ErrorCode::InvalidConfig, path.string() + ": " + e.what());
    }
}

void validate(const ExperimentConfig& c) {
    if (c.m < 1) bad("m must be positive");
    if (c.n1 < 3) bad("n1 must be at least 3");
    if (c.block_size < 1 || c.block_size_v < 1) bad("block sizes must be positive");
    if (c.problem == ProblemKind::Surface && (c.p < 1 || c.n2 < 3)) bad("surface needs p >= 1 and n2 >= 3");
    if (c.input_file.empty() && c.generator != "rose" && c.generator != "blob" && c.generator != "boy") {
        bad("unknown generator '" + c.generator + "'");
    }
    if (c.input_file.empty() && (c.generator == "boy") != (c.problem == ProblemKind::Surface)) {
        bad("generator '" + c.generator + "' does not match problem " + to_string(c.problem));
    }
    if (c.noise < 0.0) bad("noise must be nonnegative");
    if (!(c.penalty_scale > 0.0)) bad("penalty_scale must be positive");
    if (c.lambda < 0.0) bad("lambda must be nonnegative");
    if (c.lambda_mode == LambdaMode::Sweep) {
        if (c.sweep.points < 1) bad("sweep needs at least one point");
        if (!(c.sweep.min > 0.0) || (c.sweep.points > 1 && !(c.sweep.max > c.sweep.min))) {
            bad("sweep grid must satisfy 0 < min < max");
        }
    }
    if (c.head_count < 3) bad("head_count must be at least 3");
    if (c.alpha < 0.0) bad("alpha must be nonnegative");
    if (!(c.eps_lambda > 0.0)) bad("eps must be positive");
    if (c.max_outer < 1) bad("max_outer must be positive");
    if (c.seeds.empty()) bad("seeds must be nonempty");
}

const char* to_string(ProblemKind kind) { return kind == ProblemKind::Curve ? "curve" : "surface"; }

const char* to_string(LambdaMode mode) {
    switch (mode) {
        case LambdaMode::Explicit: return "explicit";
        case LambdaMode::Estimate: return "estimate";
        case LambdaMode::SelfConsistent: return "self-consistent";
        case LambdaMode::Sweep: return "sweep";
    }
    return "?";
}

const char* to_string(SolverKind kind) { return kind == SolverKind::Rpia ? "rpia" : "direct"; }

ProblemKind parse_problem_kind(const std::string& s) {
    if (s == "curve") return ProblemKind::Curve;
    if (s == "surface") return ProblemKind::Surface;
    bad("problem must be curve or surface, got '" + s + "'");
}

LambdaMode parse_lambda_mode(const std::string& s) {
    if (s == "explicit") return LambdaMode::Explicit;
    if (s == "estimate") return LambdaMode::Estimate;
    if (s == "self-consistent") return LambdaMode::SelfConsistent;
    if (s == "sweep") return LambdaMode::Sweep;
    bad("lambda mode must be explicit, estimate, self-consistent or sweep, got '" + s + "'");
}

SolverKind parse_solver_kind(const std::string& s) {
    if (s == "rpia") return SolverKind::Rpia;
    if (s == "direct") return SolverKind::Direct;
    bad("solver must be rpia or direct, got '" + s + "'");
}

}  // namespace rpir
