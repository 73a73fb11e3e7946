#pragma once

#include <Eigen/Core>

#include <vector>

#include "rpir/bspline.hpp"
#include "rpir/points.hpp"

namespace rpir {

/// Basis values at the data parameters: entry (j, i) = mu_i(x_j).
using CollocationMatrix = Eigen::MatrixXd;

/// C * tridiag(1, -2, 1): second-order differences with Dirichlet ends.
struct DifferenceMatrix {
    Eigen::MatrixXd entries;
    double scale = 1.0;
};

/// [A; sqrt(lambda) Gamma] with targets [q; 0]. Ordinary least squares on
/// this pair is the Tikhonov-penalized curve fit.
struct AugmentedCurveSystem {
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd q_hat;  // one column per coordinate
    double lambda = 0.0;
    Eigen::Index data_rows = 0;

    Eigen::Index control_count() const { return a_hat.cols(); }
    Eigen::Index dims() const { return q_hat.cols(); }
    auto design() const { return a_hat.topRows(data_rows); }
    auto data() const { return q_hat.topRows(data_rows); }
};

/// A_hat = [A; sqrt(lambda) L_u], B_hat = [B; sqrt(lambda) L_v], and per
/// coordinate Q_hat = [[Q, 0], [0, 0]].
struct AugmentedSurfaceSystem {
    Eigen::MatrixXd a_hat;
    Eigen::MatrixXd b_hat;
    PointGrid q_hat;
    double lambda = 0.0;
    Eigen::Index data_rows_u = 0;
    Eigen::Index data_rows_v = 0;

    auto design_u() const { return a_hat.topRows(data_rows_u); }
    auto design_v() const { return b_hat.topRows(data_rows_v); }
};

/// Contiguous column blocks with their squared Frobenius norms and the
/// selection probabilities those norms induce.
struct BlockPartition {
    struct Block {
        Eigen::Index begin = 0;
        Eigen::Index size = 0;
    };
    std::vector<Block> blocks;
    std::vector<double> block_norms;  // ||M_{:,U_i}||_F^2
    std::vector<double> probabilities;

    std::size_t size() const { return blocks.size(); }
    Eigen::Index column_count() const { return blocks.empty() ? 0 : blocks.back().begin + blocks.back().size; }
};

CollocationMatrix assemble_collocation(const KnotVector& knots, const ParamSequence& params);

DifferenceMatrix difference_matrix(Eigen::Index size, double scale);

AugmentedCurveSystem augment_curve(const CollocationMatrix& a, const DifferenceMatrix& gamma,
                                   const Eigen::MatrixXd& q, double lambda);

AugmentedSurfaceSystem augment_surface(const CollocationMatrix& a, const CollocationMatrix& b,
                                       const DifferenceMatrix& l_u, const DifferenceMatrix& l_v,
                                       const PointGrid& q, double lambda);

/// Blocks of `block_size` consecutive columns, the last one possibly shorter.
BlockPartition make_partition(const Eigen::MatrixXd& matrix, Eigen::Index block_size);

/// ||A P B^T - Q||^2 + lambda ||A P L_v^T||^2 + lambda ||L_u P B^T||^2 + lambda^2 ||L_u P L_v^T||^2
/// summed over coordinates; the objective the augmented surface system encodes.
double surface_objective(const CollocationMatrix& a, const CollocationMatrix& b, const DifferenceMatrix& l_u,
                         const DifferenceMatrix& l_v, const PointGrid& q, const PointGrid& p, double lambda);

}  // namespace rpir
