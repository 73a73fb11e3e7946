#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <utility>
#include <vector>

#include "rpir/assembly.hpp"
#include "rpir/points.hpp"
#include "rpir/random.hpp"
#include "rpir/rpia_curve.hpp"

namespace rpir {

struct SurfaceFitState {
    PointGrid control_grid;  // (n1+1) x (n2+1) per coordinate
    PointGrid residual;      // Q_hat - A_hat P B_hat^T per coordinate
    std::size_t iteration = 0;
    Philox4x32 rng;
    PointGrid checkpoint_fit;  // A P B^T at the last stopping-rule checkpoint
};

struct AdjustingBlock {
    std::size_t row_block = 0;
    std::size_t col_block = 0;
    std::vector<Eigen::MatrixXd> delta;  // |U| x |V| per coordinate
};

struct SurfaceFitResult {
    PointGrid control_grid;
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::MaxIterations;
    double last_relative_change = std::numeric_limits<double>::quiet_NaN();
    bool absolute_fallback = false;
    std::vector<TrajectorySample> trajectory;
};

/// P_ij = Q_{floor(m*i/n1), floor(p*j/n2)}.
PointGrid initial_control_grid(const PointGrid& data, Eigen::Index n1, Eigen::Index n2);

/// Doubly randomized block iteration on (A_hat, B_hat, Q_hat). A step draws a
/// row block U of A_hat and, independently, a column block V of B_hat, and moves
/// P_{U,V} by A_hat_{:,U}^T R B_hat_{:,V} / (||A_hat_{:,U}||^2 ||B_hat_{:,V}||^2).
/// All coordinates share the draw. The Kronecker product is never formed.
class RpiaSurface {
public:
    RpiaSurface(const AugmentedSurfaceSystem& system, const BlockPartition& row_partition,
                const BlockPartition& col_partition);
    RpiaSurface(AugmentedSurfaceSystem&&, const BlockPartition&, const BlockPartition&) = delete;

    SurfaceFitState init_state(const PointGrid& p0, std::uint64_t seed) const;

    std::pair<std::size_t, std::size_t> select_blocks(SurfaceFitState& state) const;

    AdjustingBlock apply_blocks(SurfaceFitState& state, std::size_t row_block, std::size_t col_block) const;

    AdjustingBlock step(SurfaceFitState& state) const;

    void refresh_residual(SurfaceFitState& state) const;

    /// A P B^T per coordinate.
    PointGrid fitted(const SurfaceFitState& state) const;

    SurfaceFitResult run(const PointGrid& p0, const StoppingRule& stop, std::uint64_t seed,
                         const RunOptions& options = {}, const PointGrid* reference = nullptr) const;

    const AugmentedSurfaceSystem& system() const { return system_; }

private:
    struct BlockSlice {
        std::vector<Eigen::Index> rows;
        Eigen::MatrixXd columns;
    };

    const AugmentedSurfaceSystem& system_;
    const BlockPartition& rows_;
    const BlockPartition& cols_;
    CategoricalSampler row_sampler_;
    CategoricalSampler col_sampler_;
    std::vector<BlockSlice> a_slices_;
    std::vector<BlockSlice> b_slices_;
};

}  // namespace rpir
