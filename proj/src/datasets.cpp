#include "rpir/datasets.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "rpir/error.hpp"
#include "rpir/random.hpp"

namespace rpir {

namespace {

using std::numbers::pi;

template <typename Radius>
SampledCurve polar_curve(Eigen::Index m, double theta_max, Radius radius, const char* tag) {
    if (m < 1) throw Error(ErrorCode::InvalidConfig, "need m >= 1");
    SampledCurve out;
    out.points.resize(m + 1, 2);
    for (Eigen::Index j = 0; j <= m; ++j) {
        const double theta = theta_max * static_cast<double>(j) / static_cast<double>(m);
        const double r = radius(theta);
        out.points(j, 0) = r * std::cos(theta);
        out.points(j, 1) = r * std::sin(theta);
    }
    out.generator_tag = tag;
    out.parameter_range = {0.0, theta_max};
    return out;
}

double ratio_error(double diff2, double ref2) {
    if (!(ref2 > 0.0)) throw Error(ErrorCode::ZeroReference, "reference geometry has zero norm");
    return diff2 / ref2;
}

}  // namespace

SampledCurve rose_curve(Eigen::Index m) {
    return polar_curve(m, 8.0 * pi, [](double t) { return std::sin(t / 4.0); }, "rose");
}

SampledCurve blob_curve(Eigen::Index m) {
    return polar_curve(
        m, 2.0 * pi, [](double t) { return 1.0 + 2.0 * std::cos(2.0 * t + 0.5) + 2.0 * std::cos(3.0 * t + 0.5); },
        "blob");
}

SampledSurface boy_surface(Eigen::Index m, Eigen::Index p) {
    if (m < 1 || p < 1) throw Error(ErrorCode::InvalidConfig, "need m, p >= 1");
    const double r2 = std::numbers::sqrt2;
    SampledSurface out;
    out.grid = PointGrid(m + 1, p + 1, 3);
    for (Eigen::Index i = 0; i <= m; ++i) {
        const double t = -pi + 2.0 * pi * static_cast<double>(i) / static_cast<double>(m);
        for (Eigen::Index j = 0; j <= p; ++j) {
            const double s = -pi + 2.0 * pi * static_cast<double>(j) / static_cast<double>(p);
            const double den = r2 - std::sin(2.0 * t) * std::sin(3.0 * s);
            if (std::abs(den) < 1e-9) {
                throw Error(ErrorCode::SingularSample,
                            "denominator vanishes at grid point (" + std::to_string(i) + ", " + std::to_string(j) + ")");
            }
            const double ct = std::cos(t);
            out.grid[0](i, j) = 2.0 / 3.0 * (ct * std::cos(2.0 * t) + r2 * std::sin(t) * std::cos(s)) * ct / den;
            out.grid[1](i, j) = 2.0 / 3.0 * (ct * std::sin(2.0 * t) - r2 * std::sin(t) * std::sin(s)) * ct / den;
            out.grid[2](i, j) = r2 * ct * ct / den;
        }
    }
    out.generator_tag = "boy";
    out.t_range = {-pi, pi};
    out.s_range = {-pi, pi};
    return out;
}

NoisyCurve add_noise(const Eigen::MatrixXd& data, const NoiseSpec& spec) {
    if (spec.amplitude < 0.0) throw Error(ErrorCode::InvalidConfig, "noise amplitude must be nonnegative");
    NoisyCurve out{data, 0.0};
    if (spec.amplitude == 0.0 || data.size() == 0) return out;
    Philox4x32 rng(spec.seed, streams::kNoise);
    Eigen::MatrixXd g(data.rows(), data.cols());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index c = 0; c < data.cols(); ++c) g(i, c) = rng.normal();
    }
    out.points += spec.amplitude * g / g.norm();
    out.sigma2 = spec.amplitude * spec.amplitude / static_cast<double>(data.size());
    return out;
}

NoisySurface add_noise(const PointGrid& data, const NoiseSpec& spec) {
    if (spec.amplitude < 0.0) throw Error(ErrorCode::InvalidConfig, "noise amplitude must be nonnegative");
    NoisySurface out{data, 0.0};
    if (spec.amplitude == 0.0 || data.size() == 0) return out;
    Philox4x32 rng(spec.seed, streams::kNoise);
    PointGrid g(data.rows(), data.cols(), data.dims());
    for (Eigen::Index i = 0; i < data.rows(); ++i) {
        for (Eigen::Index j = 0; j < data.cols(); ++j) {
            for (std::size_t c = 0; c < data.dims(); ++c) g[c](i, j) = rng.normal();
        }
    }
    const double scale = spec.amplitude / std::sqrt(g.squared_norm());
    for (std::size_t c = 0; c < data.dims(); ++c) out.grid[c] += scale * g[c];
    out.sigma2 = spec.amplitude * spec.amplitude / static_cast<double>(data.size());
    return out;
}

double squared_fit_error(const CollocationMatrix& a, const Eigen::MatrixXd& p_fit, const Eigen::MatrixXd& p_bar) {
    const Eigen::MatrixXd ref = a * p_bar;
    return ratio_error((a * p_fit - ref).squaredNorm(), ref.squaredNorm());
}

double fit_error(const CollocationMatrix& a, const Eigen::MatrixXd& p_fit, const Eigen::MatrixXd& p_bar) {
    return std::sqrt(squared_fit_error(a, p_fit, p_bar));
}

double squared_fit_error(const CollocationMatrix& a, const CollocationMatrix& b, const PointGrid& p_fit,
                         const PointGrid& p_bar) {
    if (p_fit.dims() != p_bar.dims()) throw Error(ErrorCode::DimensionMismatch, "coordinate count differs");
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t c = 0; c < p_bar.dims(); ++c) {
        const Eigen::MatrixXd r = a * p_bar[c] * b.transpose();
        diff += (a * p_fit[c] * b.transpose() - r).squaredNorm();
        ref += r.squaredNorm();
    }
    return ratio_error(diff, ref);
}

double fit_error(const CollocationMatrix& a, const CollocationMatrix& b, const PointGrid& p_fit,
                 const PointGrid& p_bar) {
    return std::sqrt(squared_fit_error(a, b, p_fit, p_bar));
}

}  // namespace rpir
