#pragma once

#include <Eigen/Core>

#include <string>
#include <utility>
#include <vector>

#include "rpir/points.hpp"

namespace rpir {

/// Data parameters in [0, 1]: first is 0, last is 1, strictly increasing.
struct ParamSequence {
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
    double operator[](std::size_t i) const { return values[i]; }
};

/// Clamped knot vector. For a basis of n+1 functions of degree 3 it holds
/// n+5 knots: four zeros, n-3 interior knots, four ones.
struct KnotVector {
    std::vector<double> knots;
    int degree = 3;

    /// Number of basis functions, n+1.
    std::size_t basis_count() const { return knots.size() - static_cast<std::size_t>(degree) - 1; }
};

struct BasisValue {
    std::size_t index = 0;
    double value = 0.0;
};

/// Normalized accumulated chord length of an ordered point list (one point per
/// row). Zero-length chords are nudged up by one ulp and reported through
/// `warnings` when it is non-null.
ParamSequence chord_length_params(const Eigen::MatrixXd& points, std::vector<std::string>* warnings = nullptr);

/// Row- and column-direction parameters of a point grid. Each direction sums
/// the chord lengths across the other direction before normalizing.
std::pair<ParamSequence, ParamSequence> surface_params(const PointGrid& grid,
                                                       std::vector<std::string>* warnings = nullptr);

/// Cubic clamped knots placed by floor interpolation of the data parameters:
/// with d = (m+1)/(n-2), interior knot j (1 <= j <= n-3) sits at
/// (1-a)*x[i-1] + a*x[i] where i = floor(j*d), a = j*d - i.
KnotVector build_knots(const ParamSequence& params, std::size_t n_ctrl_minus1);

/// Nonzero basis values at x, in increasing index order (at most degree+1).
/// Interior knots belong to the span on their right; x = 1 uses the last span.
std::vector<BasisValue> eval_basis(const KnotVector& knots, double x);

/// Index of the knot span containing x, i.e. knots[k] <= x < knots[k+1].
std::size_t find_span(const KnotVector& knots, double x);

}  // namespace rpir
