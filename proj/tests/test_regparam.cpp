#include <doctest.h>

#include <Eigen/QR>

#include <cmath>
#include <functional>

#include "rpir/assembly.hpp"
#include "rpir/config.hpp"
#include "rpir/datasets.hpp"
#include "rpir/error.hpp"
#include "rpir/experiment.hpp"
#include "rpir/oracle.hpp"
#include "rpir/regparam.hpp"
#include "support.hpp"

using namespace rpir;
using testing::random_matrix;

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

// Q = U diag(sqrt(rho)) V^T, so Q^T Q has eigenvalues rho.
Eigen::MatrixXd synthetic_q(const std::vector<double>& rho, std::uint64_t seed) {
    const auto n = static_cast<Eigen::Index>(rho.size());
    Eigen::HouseholderQR<Eigen::MatrixXd> qu(random_matrix(n + 10, n, seed));
    Eigen::HouseholderQR<Eigen::MatrixXd> qv(random_matrix(n, n, seed + 1));
    const Eigen::MatrixXd u = Eigen::MatrixXd(qu.householderQ()).leftCols(n);
    const Eigen::MatrixXd v = qv.householderQ();
    Eigen::VectorXd s(n);
    for (Eigen::Index k = 0; k < n; ++k) s(k) = std::sqrt(rho[static_cast<std::size_t>(k)]);
    return u * s.asDiagonal() * v.transpose();
}

std::vector<double> power_law(std::size_t count, double alpha) {
    std::vector<double> rho;
    for (std::size_t k = 1; k <= count; ++k) rho.push_back(std::pow(static_cast<double>(k), -alpha));
    return rho;
}

struct NoisyRose {
    CurveProblem problem;
    Eigen::MatrixXd noisy;
    double sigma2 = 0.0;
};

NoisyRose noisy_rose(std::uint64_t seed) {
    NoisyRose r;
    r.problem = build_curve_problem(default_config(ProblemKind::Curve));
    const auto n = add_noise(r.problem.clean, {10.0, seed});
    r.noisy = n.points;
    r.sigma2 = n.sigma2;
    return r;
}

CurveSolver direct_solver(const CurveProblem& p, const Eigen::MatrixXd& q) {
    return [&p, &q](double lambda) { return solve_penalized_normal(p.a, p.gamma, q, lambda); };
}

}  // namespace

TEST_SUITE("regparam") {

TEST_CASE("build_q inverts the penalty") {
    const auto g = difference_matrix(5, 2.0);
    const Eigen::MatrixXd q = build_q(g.entries, g);
    CHECK((q - Eigen::MatrixXd::Identity(5, 5)).norm() < 1e-12);

    const Eigen::MatrixXd a = random_matrix(8, 5, 1);
    const Eigen::MatrixXd qa = build_q(a, g);
    CHECK((qa * g.entries - a).norm() < 1e-12 * a.norm());

    DifferenceMatrix singular{Eigen::MatrixXd::Zero(5, 5), 1.0};
    singular.entries(0, 0) = 1.0;
    CHECK(code_of([&] { build_q(a, singular); }) == ErrorCode::SingularPenalty);
    CHECK(code_of([&] { build_q(a, difference_matrix(4, 1.0)); }) == ErrorCode::DimensionMismatch);
}

TEST_CASE("exact power-law spectra are recovered") {
    const auto direct = fit_spectral_decay(power_law(40, 3.0), 20);
    CHECK(direct.alpha == doctest::Approx(3.0).epsilon(1e-8));
    CHECK(direct.fit_residual < 1e-10);

    for (double alpha0 : {1.0, 2.0, 4.0}) {
        const auto fit = spectral_decay(synthetic_q(power_law(30, alpha0), 7), 20);
        CHECK(std::abs(fit.alpha - alpha0) < 1e-6);
        for (std::size_t k = 1; k < fit.eigenvalues.size(); ++k) CHECK(fit.eigenvalues[k] <= fit.eigenvalues[k - 1]);
        CHECK(fit.eigenvalues.back() >= 0.0);
    }

    CHECK(code_of([] { fit_spectral_decay(power_law(10, 1.0), 2); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { fit_spectral_decay(power_law(10, 1.0), 11); }) == ErrorCode::InsufficientSpectrum);
    auto with_zeros = power_law(10, 1.0);
    with_zeros.resize(20, 0.0);
    CHECK(code_of([&] { fit_spectral_decay(with_zeros, 12); }) == ErrorCode::InsufficientSpectrum);
}

TEST_CASE("decay exponents of the rose and Boy systems") {
    auto curve = default_config(ProblemKind::Curve);
    curve.head_count = 50;
    CHECK(std::abs(problem_spectrum(curve).alpha - 4.13) <= 0.15);

    const auto surface = default_config(ProblemKind::Surface);
    REQUIRE(surface.head_count == 100);
    CHECK(std::abs(problem_spectrum(surface).alpha - 2.09) <= 0.15);
}

TEST_CASE("optimal lambda rule") {
    const NoiseModel unit{1.0, 0.0};
    CHECK(optimal_lambda(2.0, unit, 4, 0.25) == doctest::Approx(1.0));
    CHECK(optimal_lambda(1.0, NoiseModel{4.0, 0.0}, 1, 1.0) == doctest::Approx(2.0));

    double prev = 1.0;
    for (double s2 : {1e-2, 1e-4, 1e-8, 1e-16}) {
        const double l = optimal_lambda(3.0, NoiseModel{s2, 0.0}, 10, 1.0);
        CHECK(l < prev);
        prev = l;
    }
    CHECK(prev < 1e-10);

    const double limit = 0.3 / (7.0 * 2.0);
    CHECK(optimal_lambda(1e9, NoiseModel{0.3, 0.0}, 7, 2.0) == doctest::Approx(limit).epsilon(1e-6));

    // q -> cq, p_bar -> c p_bar, sigma -> c sigma
    const double c = 17.0;
    const double base = optimal_lambda(2.5, NoiseModel{0.01, 0.0}, 50, 3.0);
    CHECK(optimal_lambda(2.5, NoiseModel{0.01 * c * c, 0.0}, 50, 3.0 * c * c) == doctest::Approx(base).epsilon(1e-12));

    CHECK(code_of([] { optimal_lambda(0.0, NoiseModel{1.0, 0.0}, 1, 1.0); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { optimal_lambda(1.0, NoiseModel{0.0, 0.0}, 1, 1.0); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { optimal_lambda(1.0, NoiseModel{1.0, 0.0}, 0, 1.0); }) == ErrorCode::InvalidConfig);
    CHECK(code_of([] { optimal_lambda(1.0, NoiseModel{1.0, 0.0}, 1, -1.0); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("rose pipeline lands within a factor of three of the reference lambda") {
    auto cfg = default_config(ProblemKind::Curve);
    cfg.head_count = 50;
    const auto e = estimate_lambda(cfg);
    CHECK(e.n == 101);
    CHECK(e.noise.sigma2 == doctest::Approx(100.0 / 2002.0));
    CHECK(e.lambda > 1.646e-6 / 3.0);
    CHECK(e.lambda < 1.646e-6 * 3.0);

    // independent recomputation from the problem pieces
    const auto p = build_curve_problem(cfg);
    const double pn = (p.gamma.entries * p.p_bar).squaredNorm() / 101.0;
    const double expect = std::pow(100.0 / 2002.0 / (101.0 * pn), e.alpha / (e.alpha + 1.0));
    CHECK(e.lambda == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("a fixed point fed back in stops after one check") {
    const Eigen::MatrixXd a = random_matrix(12, 5, 31);
    const auto g = difference_matrix(5, 1.0);
    const Eigen::MatrixXd q = 30.0 * random_matrix(12, 2, 32);
    const Eigen::MatrixXd p = random_matrix(5, 2, 33);
    int calls = 0;
    const CurveSolver constant = [&](double) {
        ++calls;
        return p;
    };
    SelfConsistentOptions o;
    o.alpha = 2.0;
    const auto first = self_consistent_curve(a, g, q, constant, o);
    REQUIRE(first.log.size() == 2);
    o.initial_lambda = first.lambda;
    calls = 0;
    const auto again = self_consistent_curve(a, g, q, constant, o);
    CHECK(again.log.size() == 1);
    CHECK(calls == 1);
    CHECK(again.lambda == first.lambda);
    CHECK(again.control_points == p);
}

TEST_CASE("self-consistent loop errors") {
    const Eigen::MatrixXd a = random_matrix(12, 5, 41);
    const auto g = difference_matrix(5, 1.0);
    const Eigen::MatrixXd q = random_matrix(12, 2, 42);
    SelfConsistentOptions o;
    o.alpha = 2.0;
    const CurveSolver flat = [](double) { return Eigen::MatrixXd::Zero(5, 2).eval(); };
    CHECK(code_of([&] { self_consistent_curve(a, g, q, flat, o); }) == ErrorCode::ZeroPenalty);

    // alternates between two fits with very different misfit/penalty ratios
    int calls = 0;
    const CurveSolver drifting = [&](double) {
        return ((++calls % 2 ? 1.0 : 100.0) * Eigen::MatrixXd::Ones(5, 2)).eval();
    };
    o.max_outer = 3;
    CHECK(code_of([&] { self_consistent_curve(a, g, q, drifting, o); }) == ErrorCode::NonConvergence);

    o.alpha = 0.0;
    CHECK(code_of([&] { self_consistent_curve(a, g, q, flat, o); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("rose self-consistent iteration contracts after the second step") {
    const auto r = noisy_rose(1);
    SelfConsistentOptions o;
    o.alpha = 4.13;
    const auto res = self_consistent_curve(r.problem.a, r.problem.gamma, r.noisy, direct_solver(r.problem, r.noisy), o);
    std::vector<double> lambdas;
    for (const auto& it : res.log) lambdas.push_back(it.lambda);
    lambdas.push_back(res.next_lambda);
    CHECK(res.log.size() <= 10);
    CHECK(res.lambda == res.log.back().lambda);
    CHECK(std::abs(res.next_lambda - res.lambda) <= o.eps_lambda * res.lambda);
    std::vector<double> rel;
    for (std::size_t k = 0; k + 1 < lambdas.size(); ++k) rel.push_back(std::abs(lambdas[k + 1] - lambdas[k]) / lambdas[k]);
    for (std::size_t k = 2; k + 1 < rel.size(); ++k) CHECK(rel[k + 1] <= rel[k]);
    CHECK(res.lambda > 1e-7);
    CHECK(res.lambda < 1e-4);
}

TEST_CASE("noiseless surface data drives lambda down") {
    auto cfg = default_config(ProblemKind::Surface);
    cfg.m = cfg.p = 30;
    cfg.n1 = cfg.n2 = 10;
    const auto p = build_surface_problem(cfg);
    std::vector<double> seen;
    const SurfaceSolver solver = [&](double lambda) {
        seen.push_back(lambda);
        const auto sys = augment_surface(p.a, p.b, p.l_u, p.l_v, p.clean, lambda);
        return solve_surface_direct(sys).control_grid;
    };
    SelfConsistentOptions o;
    o.alpha = 2.0;
    o.max_outer = 5;
    o.eps_lambda = 1e-12;
    try {
        self_consistent_surface(p.a, p.b, p.l_u, p.l_v, p.clean, solver, o);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NonConvergence);
    }
    REQUIRE(seen.size() >= 3);
    for (std::size_t k = 1; k < seen.size(); ++k) CHECK(seen[k] < seen[k - 1]);
}

TEST_CASE("two-step denoising baseline") {
    const Eigen::MatrixXd a = random_matrix(12, 5, 51);
    const Eigen::MatrixXd q = random_matrix(12, 2, 52);
    const Eigen::MatrixXd l = difference_matrix(12, 1.0).entries;

    const Eigen::MatrixXd plain = two_step_denoise(q, 0.0, l, a);
    const Eigen::MatrixXd ls = a.colPivHouseholderQr().solve(q);
    CHECK((plain - ls).norm() < 1e-10 * ls.norm());

    const double lambda = 0.7;
    const Eigen::MatrixXd smoother = Eigen::MatrixXd::Identity(12, 12) + lambda * l.transpose() * l;
    const Eigen::MatrixXd u = smoother.colPivHouseholderQr().solve(q);
    const Eigen::MatrixXd expect = a.colPivHouseholderQr().solve(u);
    CHECK((two_step_denoise(q, lambda, l, a) - expect).norm() < 1e-10 * expect.norm());

    Eigen::MatrixXd dup = a;
    dup.col(4) = dup.col(3);
    CHECK(code_of([&] { two_step_denoise(q, lambda, l, dup); }) == ErrorCode::SingularNormalMatrix);
    CHECK(code_of([&] { two_step_denoise(q, -1.0, l, a); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("penalty norms") {
    const auto g = difference_matrix(4, 2.0);
    Eigen::MatrixXd p(4, 1);
    p << 1, 0, 0, 0;
    // Gamma p = 2 * (-2, 1, 0, 0)
    CHECK(curve_penalty_norm2(g, p) == doctest::Approx(20.0 / 4.0));
}

}  // TEST_SUITE
