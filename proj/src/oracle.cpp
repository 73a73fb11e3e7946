#include "rpir/oracle.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>
#include <string>

#include "rpir/error.hpp"

namespace rpir {

namespace {

constexpr double kConditionLimit = 1e12;

double condition_of(const Eigen::MatrixXd& normal) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(normal, Eigen::EigenvaluesOnly);
    const auto& ev = es.eigenvalues();
    const double lo = std::abs(ev.minCoeff());
    const double hi = std::abs(ev.maxCoeff());
    return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

// Solves min ||M x - rhs|| columnwise given M^T rhs; QR on M when the normal
// matrix is too ill-conditioned for Cholesky.
struct LeastSquares {
    explicit LeastSquares(const Eigen::MatrixXd& m) : matrix(m), normal(m.transpose() * m) {
        condition = condition_of(normal);
        llt.compute(normal);
        use_qr = llt.info() != Eigen::Success || condition > kConditionLimit;
        if (use_qr) {
            qr.compute(matrix);
            if (qr.rank() < matrix.cols()) {
                throw Error(ErrorCode::RankDeficient, "matrix has rank " + std::to_string(qr.rank()) + " < " +
                                                          std::to_string(matrix.cols()) + " columns");
            }
        }
    }

    // (M^T M)^-1 rhs_normal, where rhs_normal = M^T y.
    Eigen::MatrixXd apply_inverse_normal(const Eigen::MatrixXd& rhs_normal) const {
        if (!use_qr) return llt.solve(rhs_normal);
        // (M^T M)^-1 = R^-1 R^-T up to the column permutation.
        const Eigen::Index n = matrix.cols();
        const Eigen::MatrixXd r = qr.matrixR().topLeftCorner(n, n).triangularView<Eigen::Upper>();
        const Eigen::MatrixXd permuted = qr.colsPermutation().transpose() * rhs_normal;
        Eigen::MatrixXd y = r.transpose().triangularView<Eigen::Lower>().solve(permuted);
        y = r.triangularView<Eigen::Upper>().solve(y);
        return qr.colsPermutation() * y;
    }

    const Eigen::MatrixXd& matrix;
    Eigen::MatrixXd normal;
    Eigen::LLT<Eigen::MatrixXd> llt;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr;
    double condition = 0.0;
    bool use_qr = false;
};

}  // namespace

DirectSolution solve_curve_direct(const AugmentedCurveSystem& system) {
    LeastSquares ls(system.a_hat);
    DirectSolution sol;
    sol.condition_estimate = ls.condition;
    sol.used_qr_fallback = ls.use_qr;
    sol.control_points = ls.use_qr ? Eigen::MatrixXd(ls.qr.solve(system.q_hat))
                                   : Eigen::MatrixXd(ls.llt.solve(system.a_hat.transpose() * system.q_hat));
    sol.residual_norm = (system.a_hat * sol.control_points - system.q_hat).norm();
    return sol;
}

DirectSolution solve_surface_direct(const AugmentedSurfaceSystem& system) {
    LeastSquares left(system.a_hat);
    LeastSquares right(system.b_hat);
    DirectSolution sol;
    sol.condition_estimate = left.condition * right.condition;
    sol.used_qr_fallback = left.use_qr || right.use_qr;
    double objective = 0.0;
    for (std::size_t c = 0; c < system.q_hat.dims(); ++c) {
        const Eigen::MatrixXd rhs = system.a_hat.transpose() * system.q_hat[c] * system.b_hat;
        const Eigen::MatrixXd half = left.apply_inverse_normal(rhs);
        Eigen::MatrixXd p = right.apply_inverse_normal(half.transpose()).transpose();
        objective += (system.a_hat * p * system.b_hat.transpose() - system.q_hat[c]).squaredNorm();
        sol.control_grid.slices.push_back(std::move(p));
    }
    sol.residual_norm = std::sqrt(objective);
    return sol;
}

Eigen::MatrixXd solve_penalized_normal(const CollocationMatrix& a, const DifferenceMatrix& gamma,
                                       const Eigen::MatrixXd& q, double lambda) {
    const Eigen::MatrixXd normal = a.transpose() * a + lambda * gamma.entries.transpose() * gamma.entries;
    Eigen::LDLT<Eigen::MatrixXd> ldlt(normal);
    if (ldlt.info() != Eigen::Success) throw Error(ErrorCode::SingularNormalMatrix, "penalized normal matrix");
    return ldlt.solve(a.transpose() * q);
}

ExpectationMap expectation_map_curve(const AugmentedCurveSystem& system, const BlockPartition& partition,
                                     const Eigen::MatrixXd& z) {
    const Eigen::MatrixXd& a = system.a_hat;
    if (z.rows() != a.rows()) throw Error(ErrorCode::DimensionMismatch, "z must have one row per row of A_hat");
    if (static_cast<Eigen::Index>(partition.size()) * a.rows() > kExpectationSizeCap) {
        throw Error(ErrorCode::TooLarge, "expectation enumeration is restricted to toy sizes");
    }
    ExpectationMap out;
    out.enumerated = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    for (std::size_t i = 0; i < partition.size(); ++i) {
        const auto& b = partition.blocks[i];
        const auto cols = a.middleCols(b.begin, b.size);
        const Eigen::MatrixXd next = z - cols * (cols.transpose() * z) / partition.block_norms[i];
        out.enumerated += partition.probabilities[i] * next;
    }
    out.closed_form = z - a * (a.transpose() * z) / a.squaredNorm();
    return out;
}

ExpectationMap expectation_map_surface(const AugmentedSurfaceSystem& system, const BlockPartition& row_partition,
                                       const BlockPartition& col_partition, const Eigen::MatrixXd& z) {
    const Eigen::MatrixXd& a = system.a_hat;
    const Eigen::MatrixXd& b = system.b_hat;
    if (z.rows() != a.rows() || z.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "Z must be rows(A_hat) x rows(B_hat)");
    }
    const auto pairs = static_cast<Eigen::Index>(row_partition.size() * col_partition.size());
    if (pairs * std::max(z.rows(), z.cols()) > kExpectationSizeCap) {
        throw Error(ErrorCode::TooLarge, "expectation enumeration is restricted to toy sizes");
    }
    ExpectationMap out;
    out.enumerated = Eigen::MatrixXd::Zero(z.rows(), z.cols());
    for (std::size_t i = 0; i < row_partition.size(); ++i) {
        const auto& u = row_partition.blocks[i];
        const auto au = a.middleCols(u.begin, u.size);
        for (std::size_t j = 0; j < col_partition.size(); ++j) {
            const auto& v = col_partition.blocks[j];
            const auto bv = b.middleCols(v.begin, v.size);
            const double weight = row_partition.probabilities[i] * col_partition.probabilities[j];
            const double scale = row_partition.block_norms[i] * col_partition.block_norms[j];
            const Eigen::MatrixXd next = z - au * (au.transpose() * z * bv) * bv.transpose() / scale;
            out.enumerated += weight * next;
        }
    }
    out.closed_form = z - a * (a.transpose() * z * b) * b.transpose() / (a.squaredNorm() * b.squaredNorm());
    return out;
}

double contraction_curve(const Eigen::MatrixXd& a_hat) {
    const Eigen::Index n = a_hat.cols();
    const Eigen::MatrixXd m =
        Eigen::MatrixXd::Identity(n, n) - a_hat.transpose() * a_hat / a_hat.squaredNorm();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

double contraction_surface(const Eigen::MatrixXd& a_hat, const Eigen::MatrixXd& b_hat) {
    const Eigen::Index na = a_hat.cols();
    const Eigen::Index nb = b_hat.cols();
    if (na * nb > kKroneckerSizeCap) {
        throw Error(ErrorCode::TooLarge, "Kronecker contraction check limited to " +
                                             std::to_string(kKroneckerSizeCap) + " control points");
    }
    const Eigen::MatrixXd ga = a_hat.transpose() * a_hat / a_hat.squaredNorm();
    const Eigen::MatrixXd gb = b_hat.transpose() * b_hat / b_hat.squaredNorm();
    Eigen::MatrixXd k(na * nb, na * nb);
    for (Eigen::Index i = 0; i < nb; ++i) {
        for (Eigen::Index j = 0; j < nb; ++j) k.block(i * na, j * na, na, na) = gb(i, j) * ga;
    }
    const Eigen::MatrixXd m = Eigen::MatrixXd::Identity(na * nb, na * nb) - k;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace rpir
