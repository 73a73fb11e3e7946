#include "rpir/regparam.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

#include "rpir/error.hpp"

namespace rpir {

namespace {

Eigen::MatrixXd kron(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    Eigen::MatrixXd out(x.rows() * y.rows(), x.cols() * y.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < x.cols(); ++j) out.block(i * y.rows(), j * y.cols(), y.rows(), y.cols()) = x(i, j) * y;
    }
    return out;
}

double next_lambda(double ratio_over_n, double alpha) { return std::pow(ratio_over_n, alpha / (alpha + 1.0)); }

void check_options(const SelfConsistentOptions& o) {
    if (!(o.alpha > 0.0)) throw Error(ErrorCode::InvalidConfig, "alpha must be positive");
    if (!(o.eps_lambda > 0.0)) throw Error(ErrorCode::InvalidConfig, "eps_lambda must be positive");
    if (o.max_outer == 0) throw Error(ErrorCode::InvalidConfig, "max_outer must be at least 1");
}

// Shared outer loop. `evaluate` solves at lambda and returns (misfit, penalty).
template <typename Fit>
double fixed_point(double lambda, Eigen::Index n, const SelfConsistentOptions& o, std::vector<LambdaIterate>& log,
                   const std::function<std::pair<double, double>(double, Fit&)>& evaluate, Fit& fit) {
    for (std::size_t k = 1; k <= o.max_outer; ++k) {
        const auto [misfit, penalty] = evaluate(lambda, fit);
        if (!(penalty > 0.0)) throw Error(ErrorCode::ZeroPenalty, "fit at lambda=" + std::to_string(lambda) + " has zero penalty");
        log.push_back({k, lambda, misfit, penalty});
        const double next = next_lambda(misfit / penalty / static_cast<double>(n), o.alpha);
        if (std::abs(next - lambda) <= o.eps_lambda * lambda) return next;
        if (!(next > 0.0)) throw Error(ErrorCode::NonConvergence, "lambda update collapsed to zero");
        lambda = next;
    }
    throw Error(ErrorCode::NonConvergence,
                "lambda iteration did not settle within " + std::to_string(o.max_outer) + " outer iterations");
}

}  // namespace

Eigen::MatrixXd build_q(const CollocationMatrix& a, const DifferenceMatrix& gamma) {
    const Eigen::MatrixXd& g = gamma.entries;
    if (g.rows() != g.cols() || g.cols() != a.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "Gamma must be square with one row per column of A");
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(g);
    if (!lu.isInvertible()) throw Error(ErrorCode::SingularPenalty, "penalty matrix is numerically singular");
    const Eigen::MatrixXd inv = lu.solve(Eigen::MatrixXd::Identity(g.rows(), g.cols()));
    Eigen::MatrixXd q = a * inv;
    const double back = (q * g - a).norm() / a.norm();
    if (!(back < 1e-10)) {
        throw Error(ErrorCode::SingularPenalty, "Q Gamma reproduces A only to " + std::to_string(back));
    }
    return q;
}

SpectralDecayFit fit_spectral_decay(std::vector<double> eigenvalues, std::size_t head_count) {
    if (head_count < 3) throw Error(ErrorCode::InvalidConfig, "head_count must be at least 3");
    std::sort(eigenvalues.begin(), eigenvalues.end(), std::greater<>());
    const double floor = eigenvalues.empty() ? 0.0 : kSpectrumFloor * eigenvalues.front();
    std::size_t usable = 0;
    while (usable < eigenvalues.size() && eigenvalues[usable] > floor && eigenvalues[usable] > 0.0) ++usable;
    if (usable < head_count) {
        throw Error(ErrorCode::InsufficientSpectrum, "only " + std::to_string(usable) + " usable eigenvalues, " +
                                                         std::to_string(head_count) + " requested");
    }

    // log rho_k = c - alpha log k
    const auto h = static_cast<Eigen::Index>(head_count);
    Eigen::MatrixXd design(h, 2);
    Eigen::VectorXd y(h);
    for (Eigen::Index k = 0; k < h; ++k) {
        design(k, 0) = 1.0;
        design(k, 1) = -std::log(static_cast<double>(k + 1));
        y(k) = std::log(eigenvalues[static_cast<std::size_t>(k)]);
    }
    const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);

    SpectralDecayFit fit;
    fit.alpha = coef(1);
    fit.head_count = head_count;
    fit.fit_residual = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(h));
    fit.eigenvalues = std::move(eigenvalues);
    return fit;
}

SpectralDecayFit spectral_decay(const Eigen::MatrixXd& q, std::size_t head_count) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(q.transpose() * q, Eigen::EigenvaluesOnly);
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::vector<double> values(ev.data(), ev.data() + ev.size());
    for (double& v : values) v = std::max(v, 0.0);
    return fit_spectral_decay(std::move(values), head_count);
}

SpectralDecayFit surface_spectral_decay(const CollocationMatrix& a, const CollocationMatrix& b,
                                        const DifferenceMatrix& l_u, const DifferenceMatrix& l_v,
                                        std::size_t head_count) {
    const Eigen::MatrixXd ata = a.transpose() * a;
    const Eigen::MatrixXd btb = b.transpose() * b;
    const Eigen::MatrixXd luu = l_u.entries.transpose() * l_u.entries;
    const Eigen::MatrixXd lvv = l_v.entries.transpose() * l_v.entries;
    if (luu.rows() != ata.rows() || lvv.rows() != btb.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "penalty sizes do not match the collocation matrices");
    }
    const Eigen::MatrixXd gram = kron(btb, ata);
    const Eigen::MatrixXd penalty = kron(btb, luu) + kron(lvv, ata);
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, penalty, Eigen::EigenvaluesOnly | Eigen::Ax_lBx);
    if (es.info() != Eigen::Success) throw Error(ErrorCode::SingularPenalty, "surface penalty Gram is not definite");
    const Eigen::VectorXd& ev = es.eigenvalues();
    std::vector<double> values(ev.data(), ev.data() + ev.size());
    for (double& v : values) v = std::max(v, 0.0);
    return fit_spectral_decay(std::move(values), head_count);
}

double optimal_lambda(double alpha, const NoiseModel& noise, Eigen::Index n, double penalty_norm2) {
    if (!(alpha > 0.0) || !(noise.sigma2 > 0.0) || n <= 0 || !(penalty_norm2 > 0.0)) {
        throw Error(ErrorCode::InvalidConfig, "optimal_lambda needs positive alpha, sigma2, n and penalty norm");
    }
    return next_lambda(noise.sigma2 / (static_cast<double>(n) * penalty_norm2), alpha);
}

double curve_penalty_norm2(const DifferenceMatrix& gamma, const Eigen::MatrixXd& p) {
    return (gamma.entries * p).squaredNorm() / static_cast<double>(p.rows());
}

double surface_penalty_norm2(const CollocationMatrix& a, const CollocationMatrix& b, const DifferenceMatrix& l_u,
                             const DifferenceMatrix& l_v, const PointGrid& p) {
    double s = 0.0;
    for (std::size_t c = 0; c < p.dims(); ++c) {
        s += (a * p[c] * l_v.entries.transpose()).squaredNorm() + (l_u.entries * p[c] * b.transpose()).squaredNorm();
    }
    return s / static_cast<double>(p.rows() * p.cols());
}

CurveSelfConsistentResult self_consistent_curve(const CollocationMatrix& a, const DifferenceMatrix& gamma,
                                                const Eigen::MatrixXd& q_noise, const CurveSolver& solver,
                                                const SelfConsistentOptions& options) {
    check_options(options);
    if (q_noise.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "q_noise must have one row per row of A");
    const Eigen::Index n = a.cols();
    const double data_count = static_cast<double>(a.rows());
    double lambda = options.initial_lambda > 0.0 ? options.initial_lambda
                                                 : next_lambda(1.0 / static_cast<double>(n), options.alpha);

    CurveSelfConsistentResult result;
    std::function<std::pair<double, double>(double, Eigen::MatrixXd&)> evaluate = [&](double lam, Eigen::MatrixXd& p) {
        p = solver(lam);
        return std::make_pair((a * p - q_noise).squaredNorm() / data_count, curve_penalty_norm2(gamma, p));
    };
    result.next_lambda = fixed_point(lambda, n, options, result.log, evaluate, result.control_points);
    result.lambda = result.log.back().lambda;
    return result;
}

SurfaceSelfConsistentResult self_consistent_surface(const CollocationMatrix& a, const CollocationMatrix& b,
                                                    const DifferenceMatrix& l_u, const DifferenceMatrix& l_v,
                                                    const PointGrid& q_noise, const SurfaceSolver& solver,
                                                    const SelfConsistentOptions& options) {
    check_options(options);
    if (q_noise.rows() != a.rows() || q_noise.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "q_noise must be rows(A) x rows(B)");
    }
    const Eigen::Index n = a.cols() * b.cols();
    const double data_count = static_cast<double>(a.rows() * b.rows());
    double lambda = options.initial_lambda > 0.0 ? options.initial_lambda
                                                 : next_lambda(1.0 / static_cast<double>(n), options.alpha);

    SurfaceSelfConsistentResult result;
    std::function<std::pair<double, double>(double, PointGrid&)> evaluate = [&](double lam, PointGrid& p) {
        p = solver(lam);
        double misfit = 0.0;
        for (std::size_t c = 0; c < p.dims(); ++c) misfit += (a * p[c] * b.transpose() - q_noise[c]).squaredNorm();
        return std::make_pair(misfit / data_count, surface_penalty_norm2(a, b, l_u, l_v, p));
    };
    result.next_lambda = fixed_point(lambda, n, options, result.log, evaluate, result.control_grid);
    result.lambda = result.log.back().lambda;
    return result;
}

Eigen::MatrixXd two_step_denoise(const Eigen::MatrixXd& q_noise, double lambda, const Eigen::MatrixXd& l,
                                 const CollocationMatrix& a) {
    if (lambda < 0.0) throw Error(ErrorCode::InvalidConfig, "lambda must be nonnegative");
    if (l.cols() != q_noise.rows() || a.rows() != q_noise.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "L and A must act on the data rows");
    }
    const Eigen::Index m = q_noise.rows();
    const Eigen::MatrixXd smoother = Eigen::MatrixXd::Identity(m, m) + lambda * l.transpose() * l;
    const Eigen::MatrixXd u = smoother.llt().solve(q_noise);
    Eigen::LLT<Eigen::MatrixXd> normal(a.transpose() * a);
    if (normal.info() != Eigen::Success || normal.rcond() < 1e-14) {
        throw Error(ErrorCode::SingularNormalMatrix, "A^T A is numerically singular");
    }
    return normal.solve(a.transpose() * u);
}

}  // namespace rpir
