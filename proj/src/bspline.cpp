#include "rpir/bspline.hpp"

#include <algorithm>
#include <cmath>

#include "rpir/error.hpp"

namespace rpir {

namespace {

ParamSequence params_from_chords(const std::vector<double>& chords, const char* direction,
                                 std::vector<std::string>* warnings) {
    double total = 0.0;
    for (double c : chords) total += c;
    if (!(total > 0.0)) {
        throw Error(ErrorCode::DegenerateData, std::string("total chord length is zero along ") + direction);
    }

    const std::size_t count = chords.size() + 1;
    ParamSequence seq;
    seq.values.resize(count);
    double acc = 0.0;
    seq.values[0] = 0.0;
    for (std::size_t j = 1; j < count; ++j) {
        acc += chords[j - 1];
        seq.values[j] = acc / total;
    }
    seq.values.back() = 1.0;

    auto warn = [&](std::size_t j) {
        if (warnings) {
            warnings->push_back(std::string("DuplicatePoint: zero-length chord along ") + direction +
                                " at index " + std::to_string(j) + "; parameter perturbed by one ulp");
        }
    };
    // Forward pass keeps interior parameters strictly increasing.
    for (std::size_t j = 1; j + 1 < count; ++j) {
        if (seq.values[j] <= seq.values[j - 1]) {
            seq.values[j] = std::nextafter(seq.values[j - 1], 2.0);
            warn(j);
        }
    }
    // A zero-length final chord pins x[m-1] at 1; walk back from the end.
    for (std::size_t j = count - 1; j-- > 1;) {
        if (seq.values[j] >= seq.values[j + 1]) {
            seq.values[j] = std::nextafter(seq.values[j + 1], -1.0);
            warn(j);
        }
    }
    return seq;
}

}  // namespace

ParamSequence chord_length_params(const Eigen::MatrixXd& points, std::vector<std::string>* warnings) {
    if (points.rows() < 2) {
        throw Error(ErrorCode::DegenerateData, "chord length parametrization needs at least two points");
    }
    std::vector<double> chords(static_cast<std::size_t>(points.rows() - 1));
    for (Eigen::Index j = 1; j < points.rows(); ++j) {
        chords[static_cast<std::size_t>(j - 1)] = (points.row(j) - points.row(j - 1)).norm();
    }
    return params_from_chords(chords, "curve", warnings);
}

std::pair<ParamSequence, ParamSequence> surface_params(const PointGrid& grid, std::vector<std::string>* warnings) {
    const Eigen::Index rows = grid.rows();
    const Eigen::Index cols = grid.cols();
    if (rows < 2 || cols < 2 || grid.dims() == 0) {
        throw Error(ErrorCode::DegenerateData, "surface parametrization needs at least a 2x2 grid");
    }

    auto distance = [&](Eigen::Index h0, Eigen::Index l0, Eigen::Index h1, Eigen::Index l1) {
        double s = 0.0;
        for (const auto& slice : grid.slices) {
            const double d = slice(h1, l1) - slice(h0, l0);
            s += d * d;
        }
        return std::sqrt(s);
    };

    std::vector<double> row_chords(static_cast<std::size_t>(rows - 1), 0.0);
    for (Eigen::Index h = 1; h < rows; ++h) {
        double s = 0.0;
        for (Eigen::Index t = 0; t < cols; ++t) s += distance(h - 1, t, h, t);
        row_chords[static_cast<std::size_t>(h - 1)] = s;
    }
    std::vector<double> col_chords(static_cast<std::size_t>(cols - 1), 0.0);
    for (Eigen::Index l = 1; l < cols; ++l) {
        double s = 0.0;
        for (Eigen::Index h = 0; h < rows; ++h) s += distance(h, l - 1, h, l);
        col_chords[static_cast<std::size_t>(l - 1)] = s;
    }
    return {params_from_chords(row_chords, "u", warnings), params_from_chords(col_chords, "v", warnings)};
}

KnotVector build_knots(const ParamSequence& params, std::size_t n_ctrl_minus1) {
    const std::size_t n1 = n_ctrl_minus1;
    const std::size_t data_count = params.size();  // m + 1
    if (n1 < 3) {
        throw Error(ErrorCode::InvalidConfig, "cubic knot vector needs n1 >= 3, got " + std::to_string(n1));
    }
    if (data_count < n1 - 2) {
        throw Error(ErrorCode::InvalidConfig, "knot spacing d = (m+1)/(n1-2) must be >= 1 (m+1 = " +
                                                  std::to_string(data_count) + ", n1 = " + std::to_string(n1) + ")");
    }

    KnotVector kv;
    kv.degree = 3;
    kv.knots.reserve(n1 + 5);
    kv.knots.insert(kv.knots.end(), 4, 0.0);
    const std::size_t denom = n1 - 2;
    for (std::size_t j = 1; j + 3 <= n1; ++j) {
        // i = floor(j*d) and a = j*d - i evaluated exactly in integers.
        const std::size_t num = j * data_count;
        const std::size_t i = num / denom;
        const double a = static_cast<double>(num - i * denom) / static_cast<double>(denom);
        const double knot = (1.0 - a) * params[i - 1] + a * params[i];
        if (!(knot > 0.0 && knot < 1.0)) {
            throw Error(ErrorCode::InvalidConfig,
                        "interior knot " + std::to_string(j) + " falls on the boundary; too few data points");
        }
        kv.knots.push_back(knot);
    }
    kv.knots.insert(kv.knots.end(), 4, 1.0);
    return kv;
}

std::size_t find_span(const KnotVector& kv, double x) {
    const auto& u = kv.knots;
    const std::size_t last = kv.basis_count() - 1;
    if (x >= u[last + 1]) return last;
    const auto it = std::upper_bound(u.begin(), u.end(), x);
    const auto span = static_cast<std::size_t>(std::distance(u.begin(), it)) - 1;
    return std::max(span, static_cast<std::size_t>(kv.degree));
}

std::vector<BasisValue> eval_basis(const KnotVector& kv, double x) {
    const auto& u = kv.knots;
    if (!(x >= u.front() && x <= u.back())) {
        throw Error(ErrorCode::OutOfDomain, "basis evaluation at x = " + std::to_string(x) + " outside [0,1]");
    }
    const int p = kv.degree;
    const std::size_t span = find_span(kv, x);

    std::vector<double> n(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<double> left(static_cast<std::size_t>(p) + 1, 0.0);
    std::vector<double> right(static_cast<std::size_t>(p) + 1, 0.0);
    n[0] = 1.0;
    for (int j = 1; j <= p; ++j) {
        left[j] = x - u[span + 1 - j];
        right[j] = u[span + j] - x;
        double saved = 0.0;
        for (int r = 0; r < j; ++r) {
            const double temp = n[r] / (right[r + 1] + left[j - r]);
            n[r] = saved + right[r + 1] * temp;
            saved = left[j - r] * temp;
        }
        n[j] = saved;
    }

    std::vector<BasisValue> out;
    out.reserve(n.size());
    for (int r = 0; r <= p; ++r) {
        if (n[r] != 0.0) out.push_back({span - static_cast<std::size_t>(p) + static_cast<std::size_t>(r), n[r]});
    }
    return out;
}

}  // namespace rpir
