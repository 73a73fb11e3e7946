#pragma once

#include <Eigen/Core>

#include <vector>

namespace rpir {

/// A rectangular grid of points stored as one (rows x cols) slice per
/// coordinate. Surface data, control grids and residual tensors all use this.
struct PointGrid {
    std::vector<Eigen::MatrixXd> slices;

    PointGrid() = default;
    explicit PointGrid(std::vector<Eigen::MatrixXd> s) : slices(std::move(s)) {}
    PointGrid(Eigen::Index rows, Eigen::Index cols, std::size_t dims)
        : slices(dims, Eigen::MatrixXd::Zero(rows, cols)) {}

    std::size_t dims() const { return slices.size(); }
    Eigen::Index rows() const { return slices.empty() ? 0 : slices.front().rows(); }
    Eigen::Index cols() const { return slices.empty() ? 0 : slices.front().cols(); }

    Eigen::MatrixXd& operator[](std::size_t c) { return slices[c]; }
    const Eigen::MatrixXd& operator[](std::size_t c) const { return slices[c]; }

    double squared_norm() const {
        double s = 0.0;
        for (const auto& m : slices) s += m.squaredNorm();
        return s;
    }

    Eigen::Index size() const { return rows() * cols() * static_cast<Eigen::Index>(dims()); }
};

}  // namespace rpir
