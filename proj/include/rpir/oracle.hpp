#pragma once

// Deterministic reference computations. Every stochastic claim the solvers
// make is checked against something in here.

#include <Eigen/Core>

#include "rpir/assembly.hpp"
#include "rpir/points.hpp"

namespace rpir {

struct DirectSolution {
    Eigen::MatrixXd control_points;  // curve: (n1+1) x d
    PointGrid control_grid;          // surface only
    double residual_norm = 0.0;      // sqrt of the objective at the minimizer
    double condition_estimate = 0.0;
    bool used_qr_fallback = false;
};

/// Minimizer of ||A_hat p - q_hat||_F. Cholesky on the normal matrix, falling
/// back to column-pivoted QR on A_hat itself when the condition estimate
/// exceeds 1e12. Throws RankDeficient when the QR reports lost rank.
DirectSolution solve_curve_direct(const AugmentedCurveSystem& system);

/// P* = (A^T A)^-1 A^T Q B (B^T B)^-1 per coordinate, on the hatted matrices.
DirectSolution solve_surface_direct(const AugmentedSurfaceSystem& system);

/// (A^T A + lambda Gamma^T Gamma)^-1 A^T q, solved independently of the
/// augmented system. Used to cross-check it.
Eigen::MatrixXd solve_penalized_normal(const CollocationMatrix& a, const DifferenceMatrix& gamma,
                                       const Eigen::MatrixXd& q, double lambda);

/// Both sides of the one-step expectation identity for the curve iteration.
struct ExpectationMap {
    Eigen::MatrixXd enumerated;   // sum_i P(i) (I - A_U A_U^T / ||A_U||^2) z
    Eigen::MatrixXd closed_form;  // (I - A A^T / ||A||^2) z
};

/// Cap on (#blocks x rows) for the enumeration.
inline constexpr Eigen::Index kExpectationSizeCap = 10000;

ExpectationMap expectation_map_curve(const AugmentedCurveSystem& system, const BlockPartition& partition,
                                     const Eigen::MatrixXd& z);

ExpectationMap expectation_map_surface(const AugmentedSurfaceSystem& system, const BlockPartition& row_partition,
                                       const BlockPartition& col_partition, const Eigen::MatrixXd& z);

/// rho(I - A^T A / ||A||_F^2).
double contraction_curve(const Eigen::MatrixXd& a_hat);

/// rho(I - (B^T B / ||B||^2) (x) (A^T A / ||A||^2)), materialized; only for
/// (n1+1)(n2+1) <= 400.
double contraction_surface(const Eigen::MatrixXd& a_hat, const Eigen::MatrixXd& b_hat);

inline constexpr Eigen::Index kKroneckerSizeCap = 400;

}  // namespace rpir
