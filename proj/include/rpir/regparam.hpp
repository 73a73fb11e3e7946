#pragma once

// Regularization parameter selection: spectral decay of Q = A Gamma^-1, the
// noise-level rule for lambda, and the fixed-point iteration that replaces the
// unknown noise level by the current fit.

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <vector>

#include "rpir/assembly.hpp"
#include "rpir/points.hpp"

namespace rpir {

struct SpectralDecayFit {
    std::vector<double> eigenvalues;  // all of them, descending
    double alpha = 0.0;
    std::size_t head_count = 0;
    double fit_residual = 0.0;  // RMS of the log-log regression
};

struct NoiseModel {
    double sigma2 = 0.0;         // per-entry variance
    double epsilon_norm2 = 0.0;  // model error energy, informational
};

struct LambdaIterate {
    std::size_t k = 0;
    double lambda = 0.0;   // value the inner solve used
    double misfit = 0.0;   // ||fit - q_noise||^2 / data count
    double penalty = 0.0;  // penalty energy / control count
};

/// Eigenvalues below this fraction of the largest are treated as zero.
inline constexpr double kSpectrumFloor = 1e-14;

/// A Gamma^-1 by an LU solve against the identity.
Eigen::MatrixXd build_q(const CollocationMatrix& a, const DifferenceMatrix& gamma);

/// Eigenvalues of Q^T Q, then the power-law fit over the leading head_count.
SpectralDecayFit spectral_decay(const Eigen::MatrixXd& q, std::size_t head_count);

/// Power-law fit on a given spectrum (any order; sorted internally).
SpectralDecayFit fit_spectral_decay(std::vector<double> eigenvalues, std::size_t head_count);

/// Surface analogue. With the lambda^2 term dropped the penalized surface
/// problem is a curve problem in vec(P) with design B (x) A and penalty Gram
/// B^T B (x) Lu^T Lu + Lv^T Lv (x) A^T A; its spectrum is the generalized one
/// of the two Gram matrices, formed at control-grid size only.
SpectralDecayFit surface_spectral_decay(const CollocationMatrix& a, const CollocationMatrix& b,
                                        const DifferenceMatrix& l_u, const DifferenceMatrix& l_v,
                                        std::size_t head_count);

/// lambda = (sigma2 / (n * penalty_norm2))^(alpha / (alpha + 1)).
double optimal_lambda(double alpha, const NoiseModel& noise, Eigen::Index n, double penalty_norm2);

inline double optimal_lambda(const SpectralDecayFit& decay, const NoiseModel& noise, Eigen::Index n,
                             double penalty_norm2) {
    return optimal_lambda(decay.alpha, noise, n, penalty_norm2);
}

/// ||Gamma p||_F^2 / (n1+1).
double curve_penalty_norm2(const DifferenceMatrix& gamma, const Eigen::MatrixXd& p);

/// (||A P Lv^T||^2 + ||Lu P B^T||^2) / ((n1+1)(n2+1)), summed over coordinates.
double surface_penalty_norm2(const CollocationMatrix& a, const CollocationMatrix& b, const DifferenceMatrix& l_u,
                             const DifferenceMatrix& l_v, const PointGrid& p);

struct SelfConsistentOptions {
    double alpha = 0.0;
    double eps_lambda = 0.01;
    std::size_t max_outer = 50;
    double initial_lambda = 0.0;  // <= 0: lambda_1^(1+1/alpha) = 1/n
};

struct CurveSelfConsistentResult {
    double lambda = 0.0;       // the lambda of the returned fit
    double next_lambda = 0.0;  // the update computed from that fit
    Eigen::MatrixXd control_points;
    std::vector<LambdaIterate> log;
};

struct SurfaceSelfConsistentResult {
    double lambda = 0.0;
    double next_lambda = 0.0;
    PointGrid control_grid;
    std::vector<LambdaIterate> log;
};

/// Returns the penalized minimizer for a given lambda.
using CurveSolver = std::function<Eigen::MatrixXd(double lambda)>;
using SurfaceSolver = std::function<PointGrid(double lambda)>;

/// Stops at the first k with |lambda_{k+1} - lambda_k| <= eps * lambda_k.
/// Throws NonConvergence after max_outer solves, ZeroPenalty if the fit has
/// no curvature.
CurveSelfConsistentResult self_consistent_curve(const CollocationMatrix& a, const DifferenceMatrix& gamma,
                                                const Eigen::MatrixXd& q_noise, const CurveSolver& solver,
                                                const SelfConsistentOptions& options);

/// Same loop; the lambda^2 penalty term is left out of the update.
SurfaceSelfConsistentResult self_consistent_surface(const CollocationMatrix& a, const CollocationMatrix& b,
                                                    const DifferenceMatrix& l_u, const DifferenceMatrix& l_v,
                                                    const PointGrid& q_noise, const SurfaceSolver& solver,
                                                    const SelfConsistentOptions& options);

/// Smooth the data first, u = (I + lambda L^T L)^-1 q, then fit u by plain
/// least squares.
Eigen::MatrixXd two_step_denoise(const Eigen::MatrixXd& q_noise, double lambda, const Eigen::MatrixXd& l,
                                 const CollocationMatrix& a);

}  // namespace rpir
