#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <limits>
#include <vector>

#include "rpir/assembly.hpp"
#include "rpir/random.hpp"

namespace rpir {

/// Termination for the randomized solvers.
///
/// The relative change ||A p(k) - A p(k-lag)||_F / ||A p(k-lag)||_F of the
/// unaugmented fit is compared with `tolerance` every `lag` iterations. lag = 1
/// is the one-step rule; lag = 0 picks one expected sweep (the number of blocks),
/// which is not fooled by a repeated draw of a single-column block (an exact
/// projection, hence a no-op the second time). tolerance <= 0 disables the test
/// and the solver runs exactly `max_iterations` steps.
struct StoppingRule {
    double tolerance = 1e-8;
    std::size_t max_iterations = 8000;
    std::size_t lag = 0;
};

enum class StopReason { Tolerance, MaxIterations };

struct TrajectorySample {
    std::size_t iteration = 0;
    double residual_norm = 0.0;  // ||q_hat - A_hat p||_F
    double error = std::numeric_limits<double>::quiet_NaN();  // vs RunOptions::reference, if given
};

struct RunOptions {
    std::size_t trajectory_stride = 10;  // 0 records nothing
    std::size_t refresh_interval = 500;  // full residual recomputation period; 0 never
    /// Reference geometry (A p_bar) for the error column of the trajectory.
    const Eigen::MatrixXd* reference = nullptr;
};

struct CurveFitState {
    Eigen::MatrixXd control_points;  // (n1+1) x d
    Eigen::MatrixXd residual;        // q_hat - A_hat p, ((m+1)+(n1+1)) x d
    std::size_t iteration = 0;
    Philox4x32 rng;
    Eigen::MatrixXd checkpoint_fit;  // A p at the last stopping-rule checkpoint
};

struct AdjustingVector {
    std::size_t block_index = 0;
    Eigen::MatrixXd delta;  // |U| x d
};

struct CurveFitResult {
    Eigen::MatrixXd control_points;
    std::size_t iterations = 0;
    StopReason stop_reason = StopReason::MaxIterations;
    double last_relative_change = std::numeric_limits<double>::quiet_NaN();
    bool absolute_fallback = false;  // ||A p|| was zero at some checkpoint
    std::vector<TrajectorySample> trajectory;
};

/// p_i = q_floor(m*i/n1) for i = 0..n1.
Eigen::MatrixXd initial_control_points(const Eigen::MatrixXd& data, Eigen::Index n1);

/// Randomized block iteration on an augmented curve system.
///
/// Each step draws block U with probability ||A_hat_{:,U}||_F^2 / ||A_hat||_F^2,
/// moves p_U by A_hat_{:,U}^T r / ||A_hat_{:,U}||_F^2 and updates the residual in
/// place; nothing outside U is touched. The solver keeps references to the
/// system and partition, which must outlive it.
class RpiaCurve {
public:
    RpiaCurve(const AugmentedCurveSystem& system, const BlockPartition& partition);
    RpiaCurve(AugmentedCurveSystem&&, const BlockPartition&) = delete;
    RpiaCurve(const AugmentedCurveSystem&, BlockPartition&&) = delete;

    CurveFitState init_state(const Eigen::MatrixXd& p0, std::uint64_t seed) const;

    std::size_t select_block(CurveFitState& state) const;

    /// One update on a given block, without drawing.
    AdjustingVector apply_block(CurveFitState& state, std::size_t block) const;

    AdjustingVector step(CurveFitState& state) const;

    void refresh_residual(CurveFitState& state) const;

    /// A p for the current control points, read off the residual.
    Eigen::MatrixXd fitted(const CurveFitState& state) const;

    CurveFitResult run(const Eigen::MatrixXd& p0, const StoppingRule& stop, std::uint64_t seed,
                       const RunOptions& options = {}) const;

    const AugmentedCurveSystem& system() const { return system_; }
    const BlockPartition& partition() const { return partition_; }

private:
    // Rows of A_hat where a block has nonzeros, and that compact slice.
    struct BlockSlice {
        std::vector<Eigen::Index> rows;
        Eigen::MatrixXd columns;
    };

    const AugmentedCurveSystem& system_;
    const BlockPartition& partition_;
    CategoricalSampler sampler_;
    std::vector<BlockSlice> slices_;
};

/// Nonzero rows of a column range, shared by both solvers.
std::vector<Eigen::Index> nonzero_rows(const Eigen::MatrixXd& m, Eigen::Index begin, Eigen::Index size);

}  // namespace rpir
