#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>

#include "rpir/points.hpp"

namespace testing {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j) {
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = n(gen);
    }
    return m;
}

inline rpir::PointGrid random_grid(Eigen::Index rows, Eigen::Index cols, std::size_t dims, std::uint64_t seed) {
    rpir::PointGrid g;
    for (std::size_t c = 0; c < dims; ++c) g.slices.push_back(random_matrix(rows, cols, seed + 7919 * c));
    return g;
}

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace testing
