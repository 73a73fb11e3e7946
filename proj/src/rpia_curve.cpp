#include "rpir/rpia_curve.hpp"

#include <cmath>

#include "rpir/error.hpp"

namespace rpir {

std::vector<Eigen::Index> nonzero_rows(const Eigen::MatrixXd& m, Eigen::Index begin, Eigen::Index size) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        bool any = false;
        for (Eigen::Index c = begin; c < begin + size && !any; ++c) any = m(r, c) != 0.0;
        if (any) rows.push_back(r);
    }
    return rows;
}

Eigen::MatrixXd initial_control_points(const Eigen::MatrixXd& data, Eigen::Index n1) {
    if (n1 < 1 || data.rows() < 2) throw Error(ErrorCode::InvalidConfig, "need n1 >= 1 and at least two data points");
    const Eigen::Index m = data.rows() - 1;
    Eigen::MatrixXd p(n1 + 1, data.cols());
    for (Eigen::Index i = 0; i <= n1; ++i) p.row(i) = data.row((m * i) / n1);
    return p;
}

RpiaCurve::RpiaCurve(const AugmentedCurveSystem& system, const BlockPartition& partition)
    : system_(system), partition_(partition), sampler_(partition.probabilities) {
    if (partition.column_count() != system.a_hat.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "partition does not cover the columns of A_hat");
    }
    slices_.reserve(partition.size());
    for (const auto& b : partition.blocks) {
        BlockSlice s;
        s.rows = nonzero_rows(system.a_hat, b.begin, b.size);
        s.columns = system.a_hat(s.rows, Eigen::seqN(b.begin, b.size));
        slices_.push_back(std::move(s));
    }
}

CurveFitState RpiaCurve::init_state(const Eigen::MatrixXd& p0, std::uint64_t seed) const {
    if (p0.rows() != system_.a_hat.cols() || p0.cols() != system_.q_hat.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "initial control points have the wrong shape");
    }
    CurveFitState state;
    state.control_points = p0;
    state.residual = system_.q_hat - system_.a_hat * p0;
    state.iteration = 0;
    state.rng = Philox4x32(seed, streams::kBlockSelection);
    state.checkpoint_fit = fitted(state);
    return state;
}

std::size_t RpiaCurve::select_block(CurveFitState& state) const { return sampler_.sample(state.rng); }

AdjustingVector RpiaCurve::apply_block(CurveFitState& state, std::size_t block) const {
    const auto& b = partition_.blocks[block];
    const auto& slice = slices_[block];
    AdjustingVector adj;
    adj.block_index = block;
    adj.delta = slice.columns.transpose() * state.residual(slice.rows, Eigen::all) / partition_.block_norms[block];
    state.control_points.middleRows(b.begin, b.size) += adj.delta;
    state.residual(slice.rows, Eigen::all) -= slice.columns * adj.delta;
    ++state.iteration;
    return adj;
}

AdjustingVector RpiaCurve::step(CurveFitState& state) const { return apply_block(state, select_block(state)); }

void RpiaCurve::refresh_residual(CurveFitState& state) const {
    state.residual = system_.q_hat - system_.a_hat * state.control_points;
}

Eigen::MatrixXd RpiaCurve::fitted(const CurveFitState& state) const {
    return system_.data() - state.residual.topRows(system_.data_rows);
}

CurveFitResult RpiaCurve::run(const Eigen::MatrixXd& p0, const StoppingRule& stop, std::uint64_t seed,
                              const RunOptions& options) const {
    CurveFitState state = init_state(p0, seed);
    const std::size_t lag = stop.lag > 0 ? stop.lag : partition_.size();
    CurveFitResult result;

    auto record = [&] {
        TrajectorySample s;
        s.iteration = state.iteration;
        s.residual_norm = state.residual.norm();
        if (options.reference) {
            s.error = (fitted(state) - *options.reference).norm() / options.reference->norm();
        }
        result.trajectory.push_back(s);
    };
    if (options.trajectory_stride > 0) record();

    while (state.iteration < stop.max_iterations) {
        step(state);
        if (options.refresh_interval > 0 && state.iteration % options.refresh_interval == 0) refresh_residual(state);
        if (options.trajectory_stride > 0 && state.iteration % options.trajectory_stride == 0) record();
        if (stop.tolerance > 0.0 && state.iteration % lag == 0) {
            Eigen::MatrixXd current = fitted(state);
            const double change = (current - state.checkpoint_fit).norm();
            const double base = state.checkpoint_fit.norm();
            double rel = change;
            if (base > 0.0) rel = change / base;
            else result.absolute_fallback = true;
            result.last_relative_change = rel;
            state.checkpoint_fit = std::move(current);
            if (rel < stop.tolerance) {
                result.stop_reason = StopReason::Tolerance;
                break;
            }
        }
    }
    if (options.trajectory_stride > 0 && state.iteration % options.trajectory_stride != 0) record();

    result.iterations = state.iteration;
    result.control_points = std::move(state.control_points);
    return result;
}

}  // namespace rpir
