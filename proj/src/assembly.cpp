#include "rpir/assembly.hpp"

#include <cmath>
#include <string>

#include "rpir/error.hpp"

namespace rpir {

namespace {

std::string shape(const Eigen::MatrixXd& m) {
    return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace

CollocationMatrix assemble_collocation(const KnotVector& knots, const ParamSequence& params) {
    const auto rows = static_cast<Eigen::Index>(params.size());
    const auto cols = static_cast<Eigen::Index>(knots.basis_count());
    CollocationMatrix a = CollocationMatrix::Zero(rows, cols);
    for (Eigen::Index j = 0; j < rows; ++j) {
        for (const auto& bv : eval_basis(knots, params[static_cast<std::size_t>(j)])) {
            a(j, static_cast<Eigen::Index>(bv.index)) = bv.value;
        }
    }
    return a;
}

DifferenceMatrix difference_matrix(Eigen::Index size, double scale) {
    if (size < 2) throw Error(ErrorCode::InvalidConfig, "difference matrix size must be >= 2");
    if (!(scale > 0.0)) throw Error(ErrorCode::InvalidConfig, "difference matrix scale must be positive");
    DifferenceMatrix d;
    d.scale = scale;
    d.entries = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index i = 0; i < size; ++i) {
        d.entries(i, i) = -2.0 * scale;
        if (i > 0) d.entries(i, i - 1) = scale;
        if (i + 1 < size) d.entries(i, i + 1) = scale;
    }
    return d;
}

AugmentedCurveSystem augment_curve(const CollocationMatrix& a, const DifferenceMatrix& gamma, const Eigen::MatrixXd& q,
                                   double lambda) {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be nonnegative");
    if (gamma.entries.cols() != a.cols() || gamma.entries.rows() != a.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "penalty " + shape(gamma.entries) + " vs design " + shape(a));
    }
    if (q.rows() != a.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "data " + shape(q) + " vs design " + shape(a));
    }
    AugmentedCurveSystem sys;
    sys.lambda = lambda;
    sys.data_rows = a.rows();
    sys.a_hat.resize(a.rows() + gamma.entries.rows(), a.cols());
    sys.a_hat.topRows(a.rows()) = a;
    sys.a_hat.bottomRows(gamma.entries.rows()) = std::sqrt(lambda) * gamma.entries;
    sys.q_hat = Eigen::MatrixXd::Zero(sys.a_hat.rows(), q.cols());
    sys.q_hat.topRows(q.rows()) = q;
    return sys;
}

AugmentedSurfaceSystem augment_surface(const CollocationMatrix& a, const CollocationMatrix& b,
                                       const DifferenceMatrix& l_u, const DifferenceMatrix& l_v, const PointGrid& q,
                                       double lambda) {
    if (!(lambda >= 0.0)) throw Error(ErrorCode::InvalidConfig, "lambda must be nonnegative");
    if (l_u.entries.rows() != a.cols() || l_u.entries.cols() != a.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "L_u " + shape(l_u.entries) + " vs A " + shape(a));
    }
    if (l_v.entries.rows() != b.cols() || l_v.entries.cols() != b.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "L_v " + shape(l_v.entries) + " vs B " + shape(b));
    }
    if (q.dims() == 0 || q.rows() != a.rows() || q.cols() != b.rows()) {
        throw Error(ErrorCode::DimensionMismatch, "data grid does not match collocation sizes");
    }
    const double root = std::sqrt(lambda);
    AugmentedSurfaceSystem sys;
    sys.lambda = lambda;
    sys.data_rows_u = a.rows();
    sys.data_rows_v = b.rows();
    sys.a_hat.resize(a.rows() + a.cols(), a.cols());
    sys.a_hat << a, root * l_u.entries;
    sys.b_hat.resize(b.rows() + b.cols(), b.cols());
    sys.b_hat << b, root * l_v.entries;
    sys.q_hat = PointGrid(sys.a_hat.rows(), sys.b_hat.rows(), q.dims());
    for (std::size_t c = 0; c < q.dims(); ++c) sys.q_hat[c].topLeftCorner(q.rows(), q.cols()) = q[c];
    return sys;
}

BlockPartition make_partition(const Eigen::MatrixXd& matrix, Eigen::Index block_size) {
    if (block_size < 1) throw Error(ErrorCode::InvalidConfig, "block size must be >= 1");
    if (matrix.cols() == 0) throw Error(ErrorCode::InvalidConfig, "cannot partition a matrix with no columns");
    BlockPartition part;
    double total = 0.0;
    for (Eigen::Index begin = 0; begin < matrix.cols(); begin += block_size) {
        const Eigen::Index size = std::min(block_size, matrix.cols() - begin);
        const double norm2 = matrix.middleCols(begin, size).squaredNorm();
        if (!(norm2 > 0.0)) {
            throw Error(ErrorCode::ZeroColumnBlock,
                        "column block starting at " + std::to_string(begin) + " has zero norm");
        }
        part.blocks.push_back({begin, size});
        part.block_norms.push_back(norm2);
        total += norm2;
    }
    part.probabilities.reserve(part.block_norms.size());
    for (double n : part.block_norms) part.probabilities.push_back(n / total);
    return part;
}

double surface_objective(const CollocationMatrix& a, const CollocationMatrix& b, const DifferenceMatrix& l_u,
                         const DifferenceMatrix& l_v, const PointGrid& q, const PointGrid& p, double lambda) {
    double total = 0.0;
    for (std::size_t c = 0; c < q.dims(); ++c) {
        const Eigen::MatrixXd ap = a * p[c];
        const Eigen::MatrixXd lp = l_u.entries * p[c];
        total += (ap * b.transpose() - q[c]).squaredNorm();
        total += lambda * (ap * l_v.entries.transpose()).squaredNorm();
        total += lambda * (lp * b.transpose()).squaredNorm();
        total += lambda * lambda * (lp * l_v.entries.transpose()).squaredNorm();
    }
    return total;
}

}  // namespace rpir
