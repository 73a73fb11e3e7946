#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <utility>

#include "rpir/assembly.hpp"
#include "rpir/points.hpp"

namespace rpir {

struct SampledCurve {
    Eigen::MatrixXd points;  // (m+1) x 2
    std::string generator_tag;
    std::pair<double, double> parameter_range;
};

struct SampledSurface {
    PointGrid grid;  // (m+1) x (p+1), three coordinates
    std::string generator_tag;
    std::pair<double, double> t_range;
    std::pair<double, double> s_range;
};

struct NoiseSpec {
    double amplitude = 0.0;
    std::uint64_t seed = 0;
};

/// Noisy data plus the per-entry variance amplitude^2 / entry count.
struct NoisyCurve {
    Eigen::MatrixXd points;
    double sigma2 = 0.0;
};

struct NoisySurface {
    PointGrid grid;
    double sigma2 = 0.0;
};

/// r = sin(theta/4), theta in [0, 8 pi], m+1 uniform samples.
SampledCurve rose_curve(Eigen::Index m);

/// r = 1 + 2 cos(2 theta + 1/2) + 2 cos(3 theta + 1/2), theta in [0, 2 pi].
SampledCurve blob_curve(Eigen::Index m);

/// Boy's surface on a uniform (m+1) x (p+1) grid over [-pi, pi]^2, t along rows.
SampledSurface boy_surface(Eigen::Index m, Eigen::Index p);

/// data + amplitude * g / ||g||_F with g standard normal from the seed's noise
/// stream, drawn point by point with coordinates innermost.
NoisyCurve add_noise(const Eigen::MatrixXd& data, const NoiseSpec& spec);
NoisySurface add_noise(const PointGrid& data, const NoiseSpec& spec);

/// ||A p_fit - A p_bar||_F / ||A p_bar||_F.
double fit_error(const CollocationMatrix& a, const Eigen::MatrixXd& p_fit, const Eigen::MatrixXd& p_bar);

/// Square of fit_error.
double squared_fit_error(const CollocationMatrix& a, const Eigen::MatrixXd& p_fit, const Eigen::MatrixXd& p_bar);

/// Surface form with A P B^T, summed over coordinates.
double fit_error(const CollocationMatrix& a, const CollocationMatrix& b, const PointGrid& p_fit,
                 const PointGrid& p_bar);
double squared_fit_error(const CollocationMatrix& a, const CollocationMatrix& b, const PointGrid& p_fit,
                         const PointGrid& p_bar);

}  // namespace rpir
