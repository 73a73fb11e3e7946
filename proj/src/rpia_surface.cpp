#include "rpir/rpia_surface.hpp"

#include <cmath>

#include "rpir/error.hpp"

namespace rpir {

namespace {

double distance(const PointGrid& a, const PointGrid& b) {
    double s = 0.0;
    for (std::size_t c = 0; c < a.dims(); ++c) s += (a[c] - b[c]).squaredNorm();
    return std::sqrt(s);
}

}  // namespace

PointGrid initial_control_grid(const PointGrid& data, Eigen::Index n1, Eigen::Index n2) {
    if (n1 < 1 || n2 < 1 || data.rows() < 2 || data.cols() < 2) {
        throw Error(ErrorCode::InvalidConfig, "need n1, n2 >= 1 and at least a 2x2 data grid");
    }
    const Eigen::Index m = data.rows() - 1;
    const Eigen::Index p = data.cols() - 1;
    PointGrid grid(n1 + 1, n2 + 1, data.dims());
    for (std::size_t c = 0; c < data.dims(); ++c) {
        for (Eigen::Index i = 0; i <= n1; ++i) {
            for (Eigen::Index j = 0; j <= n2; ++j) grid[c](i, j) = data[c]((m * i) / n1, (p * j) / n2);
        }
    }
    return grid;
}

RpiaSurface::RpiaSurface(const AugmentedSurfaceSystem& system, const BlockPartition& row_partition,
                         const BlockPartition& col_partition)
    : system_(system),
      rows_(row_partition),
      cols_(col_partition),
      row_sampler_(row_partition.probabilities),
      col_sampler_(col_partition.probabilities) {
    if (row_partition.column_count() != system.a_hat.cols() || col_partition.column_count() != system.b_hat.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "partitions do not cover the columns of A_hat / B_hat");
    }
    auto slice = [](const Eigen::MatrixXd& m, const BlockPartition& part, std::vector<BlockSlice>& out) {
        for (const auto& b : part.blocks) {
            BlockSlice s;
            s.rows = nonzero_rows(m, b.begin, b.size);
            s.columns = m(s.rows, Eigen::seqN(b.begin, b.size));
            out.push_back(std::move(s));
        }
    };
    slice(system.a_hat, row_partition, a_slices_);
    slice(system.b_hat, col_partition, b_slices_);
}

SurfaceFitState RpiaSurface::init_state(const PointGrid& p0, std::uint64_t seed) const {
    if (p0.dims() != system_.q_hat.dims() || p0.rows() != system_.a_hat.cols() || p0.cols() != system_.b_hat.cols()) {
        throw Error(ErrorCode::DimensionMismatch, "initial control grid has the wrong shape");
    }
    SurfaceFitState state;
    state.control_grid = p0;
    state.residual = PointGrid(system_.a_hat.rows(), system_.b_hat.rows(), p0.dims());
    state.rng = Philox4x32(seed, streams::kBlockSelection);
    refresh_residual(state);
    state.checkpoint_fit = fitted(state);
    return state;
}

std::pair<std::size_t, std::size_t> RpiaSurface::select_blocks(SurfaceFitState& state) const {
    const std::size_t t = row_sampler_.sample(state.rng);
    const std::size_t s = col_sampler_.sample(state.rng);
    return {t, s};
}

AdjustingBlock RpiaSurface::apply_blocks(SurfaceFitState& state, std::size_t row_block, std::size_t col_block) const {
    const auto& u = rows_.blocks[row_block];
    const auto& v = cols_.blocks[col_block];
    const auto& as = a_slices_[row_block];
    const auto& bs = b_slices_[col_block];
    const double scale = 1.0 / (rows_.block_norms[row_block] * cols_.block_norms[col_block]);

    AdjustingBlock adj;
    adj.row_block = row_block;
    adj.col_block = col_block;
    adj.delta.reserve(state.control_grid.dims());
    for (std::size_t c = 0; c < state.control_grid.dims(); ++c) {
        auto r = state.residual[c](as.rows, bs.rows);
        Eigen::MatrixXd delta = as.columns.transpose() * r * bs.columns * scale;
        state.control_grid[c].block(u.begin, v.begin, u.size, v.size) += delta;
        r -= (as.columns * delta) * bs.columns.transpose();
        adj.delta.push_back(std::move(delta));
    }
    ++state.iteration;
    return adj;
}

AdjustingBlock RpiaSurface::step(SurfaceFitState& state) const {
    const auto [t, s] = select_blocks(state);
    return apply_blocks(state, t, s);
}

void RpiaSurface::refresh_residual(SurfaceFitState& state) const {
    for (std::size_t c = 0; c < state.control_grid.dims(); ++c) {
        state.residual[c] = system_.q_hat[c] - system_.a_hat * state.control_grid[c] * system_.b_hat.transpose();
    }
}

PointGrid RpiaSurface::fitted(const SurfaceFitState& state) const {
    PointGrid out;
    out.slices.reserve(state.residual.dims());
    for (std::size_t c = 0; c < state.residual.dims(); ++c) {
        out.slices.push_back(system_.q_hat[c].topLeftCorner(system_.data_rows_u, system_.data_rows_v) -
                             state.residual[c].topLeftCorner(system_.data_rows_u, system_.data_rows_v));
    }
    return out;
}

SurfaceFitResult RpiaSurface::run(const PointGrid& p0, const StoppingRule& stop, std::uint64_t seed,
                                  const RunOptions& options, const PointGrid* reference) const {
    SurfaceFitState state = init_state(p0, seed);
    const std::size_t lag = stop.lag > 0 ? stop.lag : rows_.size() * cols_.size();
    const double reference_norm = reference ? std::sqrt(reference->squared_norm()) : 0.0;
    SurfaceFitResult result;

    auto record = [&] {
        TrajectorySample s;
        s.iteration = state.iteration;
        s.residual_norm = std::sqrt(state.residual.squared_norm());
        if (reference) s.error = distance(fitted(state), *reference) / reference_norm;
        result.trajectory.push_back(s);
    };
    if (options.trajectory_stride > 0) record();

    while (state.iteration < stop.max_iterations) {
        step(state);
        if (options.refresh_interval > 0 && state.iteration % options.refresh_interval == 0) refresh_residual(state);
        if (options.trajectory_stride > 0 && state.iteration % options.trajectory_stride == 0) record();
        if (stop.tolerance > 0.0 && state.iteration % lag == 0) {
            PointGrid current = fitted(state);
            const double change = distance(current, state.checkpoint_fit);
            const double base = std::sqrt(state.checkpoint_fit.squared_norm());
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
    result.control_grid = std::move(state.control_grid);
    return result;
}

}  // namespace rpir
