#pragma once

#include <Eigen/Core>

#include <filesystem>

#include "rpir/points.hpp"

namespace rpir {

// Curves: header x,y[,z] then one point per line.
// Surfaces: header row,col,x,y,z then one grid cell per line, any order.
// Values are written with 17 significant digits so a round trip is exact.

Eigen::MatrixXd load_curve_points(const std::filesystem::path& path);
void save_curve_points(const std::filesystem::path& path, const Eigen::MatrixXd& points);

PointGrid load_surface_points(const std::filesystem::path& path);
void save_surface_points(const std::filesystem::path& path, const PointGrid& grid);

}  // namespace rpir
