#include <doctest.h>

#include <Eigen/Cholesky>

#include <cmath>

#include "rpir/assembly.hpp"
#include "rpir/datasets.hpp"
#include "rpir/error.hpp"
#include "rpir/oracle.hpp"
#include "rpir/rpia_curve.hpp"
#include "support.hpp"

using namespace rpir;
using testing::random_matrix;

namespace {

struct Toy {
    Eigen::MatrixXd a;
    DifferenceMatrix gamma;
    Eigen::MatrixXd q;
    AugmentedCurveSystem sys;
    BlockPartition part;
};

Toy toy(Eigen::Index m, Eigen::Index n, Eigen::Index block, double lambda, std::uint64_t seed) {
    Toy t;
    t.a = random_matrix(m, n, seed);
    t.gamma = difference_matrix(n, 1.0);
    t.q = random_matrix(m, 2, seed + 1);
    t.sys = augment_curve(t.a, t.gamma, t.q, lambda);
    t.part = make_partition(t.sys.a_hat, block);
    return t;
}

struct Rose {
    CollocationMatrix a;
    Eigen::MatrixXd q;
    AugmentedCurveSystem sys;
    BlockPartition part;
};

Rose rose(Eigen::Index m, Eigen::Index n1, double lambda) {
    Rose r;
    r.q = rose_curve(m).points;
    const auto params = chord_length_params(r.q);
    r.a = assemble_collocation(build_knots(params, static_cast<std::size_t>(n1)), params);
    r.sys = augment_curve(r.a, difference_matrix(n1 + 1, 1600.0), r.q, lambda);
    r.part = make_partition(r.sys.a_hat, 5);
    return r;
}

}  // namespace

TEST_SUITE("rpia_curve") {

TEST_CASE("initial control points follow the floor rule") {
    Eigen::MatrixXd data(11, 2);
    for (int j = 0; j <= 10; ++j) data.row(j) << j, -j;
    const auto p = initial_control_points(data, 4);
    REQUIRE(p.rows() == 5);
    const int expect[] = {0, 2, 5, 7, 10};
    for (int i = 0; i < 5; ++i) CHECK(p(i, 0) == expect[i]);
}

TEST_CASE("init_state residual") {
    const auto t = toy(8, 4, 2, 0.5, 1);
    const RpiaCurve solver(t.sys, t.part);
    const auto zero = solver.init_state(Eigen::MatrixXd::Zero(4, 2), 3);
    CHECK(zero.residual == t.sys.q_hat);
    CHECK(zero.iteration == 0);
    const Eigen::MatrixXd p0 = random_matrix(4, 2, 9);
    const auto s = solver.init_state(p0, 3);
    CHECK((s.residual - (t.sys.q_hat - t.sys.a_hat * p0)).norm() < 1e-14);
    CHECK_THROWS_AS(solver.init_state(Eigen::MatrixXd::Zero(3, 2), 3), Error);
}

TEST_CASE("block selection frequencies match the norm distribution") {
    const auto r = rose(1000, 100, 1.646e-6);
    const RpiaCurve solver(r.sys, r.part);
    auto state = solver.init_state(Eigen::MatrixXd::Zero(101, 2), 2024);
    const int draws = 1000000;
    std::vector<int> counts(r.part.size(), 0);
    for (int i = 0; i < draws; ++i) ++counts[solver.select_block(state)];
    double chi2 = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        const double e = draws * r.part.probabilities[i];
        const double sd = std::sqrt(e * (1.0 - r.part.probabilities[i]));
        CHECK(std::abs(counts[i] - e) < 3.0 * sd + 1.0);
        chi2 += (counts[i] - e) * (counts[i] - e) / e;
    }
    CHECK(chi2 < 45.3);  // 99.9% quantile of chi-squared with 20 degrees of freedom

    const auto one = make_partition(r.sys.a_hat, 101);
    const RpiaCurve single(r.sys, one);
    auto s1 = single.init_state(Eigen::MatrixXd::Zero(101, 2), 1);
    for (int i = 0; i < 20; ++i) CHECK(single.select_block(s1) == 0);
}

TEST_CASE("one step matches a straight-line reimplementation") {
    const auto t = toy(6, 3, 1, 0.2, 21);
    const RpiaCurve solver(t.sys, t.part);
    const Eigen::MatrixXd p0 = random_matrix(3, 2, 22);
    auto state = solver.init_state(p0, 77);

    // Oracle: draw with an identically seeded generator, then update by formula.
    Philox4x32 rng(77, streams::kBlockSelection);
    const double u = rng.uniform01();
    std::size_t block = 0;
    double acc = 0.0;
    for (; block + 1 < t.part.size(); ++block) {
        acc += t.part.probabilities[block];
        if (u < acc) break;
    }
    const Eigen::VectorXd col = t.sys.a_hat.col(static_cast<Eigen::Index>(block));
    const Eigen::MatrixXd r0 = t.sys.q_hat - t.sys.a_hat * p0;
    Eigen::MatrixXd expect = p0;
    expect.row(static_cast<Eigen::Index>(block)) += (col.transpose() * r0) / col.squaredNorm();

    const auto adj = solver.step(state);
    CHECK(adj.block_index == block);
    CHECK((state.control_points - expect).cwiseAbs().maxCoeff() < 1e-14);
    CHECK((state.residual - (t.sys.q_hat - t.sys.a_hat * state.control_points)).norm() < 1e-13);
    CHECK(state.iteration == 1);
}

TEST_CASE("a single block covering every column is a Landweber step") {
    const auto t = toy(9, 4, 4, 0.1, 31);
    const RpiaCurve solver(t.sys, t.part);
    const Eigen::MatrixXd p0 = random_matrix(4, 2, 32);
    auto state = solver.init_state(p0, 5);
    solver.step(state);
    const Eigen::MatrixXd r0 = t.sys.q_hat - t.sys.a_hat * p0;
    const Eigen::MatrixXd expect = p0 + t.sys.a_hat.transpose() * r0 / t.sys.a_hat.squaredNorm();
    CHECK((state.control_points - expect).norm() < 1e-13);
}

TEST_CASE("the least-squares solution is a fixed point") {
    const auto t = toy(12, 5, 2, 0.4, 41);
    const RpiaCurve solver(t.sys, t.part);
    const auto direct = solve_curve_direct(t.sys);
    auto state = solver.init_state(direct.control_points, 8);
    for (std::size_t b = 0; b < t.part.size(); ++b) {
        const auto adj = solver.apply_block(state, b);
        CHECK(adj.delta.cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK(state.iteration == t.part.size());
}

TEST_CASE("block locality: untouched control points are bit-identical") {
    const auto r = rose(200, 40, 1e-6);
    const RpiaCurve solver(r.sys, r.part);
    auto state = solver.init_state(initial_control_points(r.q, 40), 3);
    for (int k = 0; k < 300; ++k) {
        const Eigen::MatrixXd before = state.control_points;
        const auto adj = solver.step(state);
        const auto& b = r.part.blocks[adj.block_index];
        for (Eigen::Index i = 0; i < before.rows(); ++i) {
            if (i >= b.begin && i < b.begin + b.size) continue;
            for (Eigen::Index c = 0; c < before.cols(); ++c) REQUIRE(state.control_points(i, c) == before(i, c));
        }
    }
}

TEST_CASE("run: determinism, zero iterations and residual consistency") {
    const auto r = rose(200, 40, 1e-6);
    const RpiaCurve solver(r.sys, r.part);
    const Eigen::MatrixXd p0 = initial_control_points(r.q, 40);
    StoppingRule stop{1e-8, 3000, 0};
    const auto a = solver.run(p0, stop, 9);
    const auto b = solver.run(p0, stop, 9);
    CHECK(a.control_points == b.control_points);
    CHECK(a.iterations == b.iterations);
    REQUIRE(a.trajectory.size() == b.trajectory.size());
    for (std::size_t i = 0; i < a.trajectory.size(); ++i) CHECK(a.trajectory[i].residual_norm == b.trajectory[i].residual_norm);
    const auto c = solver.run(p0, stop, 10);
    CHECK(c.control_points != a.control_points);

    const auto zero = solver.run(p0, StoppingRule{1e-8, 0, 0}, 9);
    CHECK(zero.control_points == p0);
    CHECK(zero.iterations == 0);

    auto state = solver.init_state(p0, 4);
    for (int k = 0; k < 1234; ++k) solver.step(state);
    const Eigen::MatrixXd exact = r.sys.q_hat - r.sys.a_hat * state.control_points;
    CHECK((state.residual - exact).norm() / exact.norm() < 1e-10);
}

TEST_CASE("run: fixed iteration count and stride sampling") {
    const auto t = toy(30, 8, 3, 0.1, 51);
    const RpiaCurve solver(t.sys, t.part);
    RunOptions opt;
    opt.trajectory_stride = 7;
    const Eigen::MatrixXd reference = t.a * solve_curve_direct(t.sys).control_points;
    opt.reference = &reference;
    const auto r = solver.run(Eigen::MatrixXd::Zero(8, 2), StoppingRule{0.0, 100, 0}, 3, opt);
    CHECK(r.iterations == 100);
    CHECK(r.stop_reason == StopReason::MaxIterations);
    CHECK(r.trajectory.front().iteration == 0);
    CHECK(r.trajectory[1].iteration == 7);
    CHECK(r.trajectory.back().iteration == 100);
    CHECK(r.trajectory.back().error < r.trajectory.front().error);
}

TEST_CASE("run: zero reference norm falls back to the absolute change") {
    const auto a = random_matrix(10, 4, 61);
    const auto sys = augment_curve(a, difference_matrix(4, 1.0), Eigen::MatrixXd::Zero(10, 2), 0.1);
    const auto part = make_partition(sys.a_hat, 2);
    const RpiaCurve solver(sys, part);
    const auto r = solver.run(Eigen::MatrixXd::Zero(4, 2), StoppingRule{1e-8, 100, 1}, 1);
    CHECK(r.absolute_fallback);
    CHECK(r.stop_reason == StopReason::Tolerance);
    CHECK(r.iterations == 1);
}

TEST_CASE("exact data without regularization converges to the direct fit") {
    const auto r = rose(200, 40, 0.0);
    const RpiaCurve solver(r.sys, r.part);
    const auto direct = solve_curve_direct(r.sys);
    const Eigen::MatrixXd ref = r.a * direct.control_points;
    const auto fit = solver.run(initial_control_points(r.q, 40), StoppingRule{0.0, 20000, 0}, 5);
    CHECK((r.a * fit.control_points - ref).norm() / ref.norm() < 1e-6);
}

TEST_CASE("mean iterate over many seeds approaches the solution") {
    const auto t = toy(10, 4, 2, 0.2, 71);
    const RpiaCurve solver(t.sys, t.part);
    const Eigen::MatrixXd p_star = solve_curve_direct(t.sys).control_points;
    const int seeds = 200;
    const std::size_t checkpoints[] = {0, 2, 5, 10, 20, 40, 80};
    std::vector<Eigen::MatrixXd> mean(7, Eigen::MatrixXd::Zero(4, 2));
    for (int s = 0; s < seeds; ++s) {
        auto state = solver.init_state(Eigen::MatrixXd::Zero(4, 2), static_cast<std::uint64_t>(s));
        std::size_t c = 0;
        for (std::size_t k = 0; c < 7; ++k) {
            if (k == checkpoints[c]) mean[c++] += state.control_points / seeds;
            solver.step(state);
        }
    }
    const double slack = 2.0 / std::sqrt(static_cast<double>(seeds));
    double prev = 1.0;
    for (int c = 0; c < 7; ++c) {
        const double err = (mean[static_cast<std::size_t>(c)] - p_star).norm() / p_star.norm();
        CHECK(err <= prev + slack);
        prev = err;
    }
    CHECK(prev < 0.5);
}

}  // TEST_SUITE
