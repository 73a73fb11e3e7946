#include "rpir/csv_io.hpp"

#include <array>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rpir/error.hpp"

namespace rpir {

namespace {

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
        while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r')) field.remove_suffix(1);
        out.push_back(field);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

bool parse_double(std::string_view s, double& v) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

bool parse_index(std::string_view s, long& v) {
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    return ec == std::errc() && ptr == s.data() + s.size() && !s.empty();
}

[[noreturn]] void parse_error(const std::filesystem::path& path, std::size_t line, const std::string& what) {
    throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": " + what);
}

std::ifstream open_in(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    return out;
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

bool is_header(const std::vector<std::string_view>& fields) {
    double v;
    return !fields.empty() && !parse_double(fields.front(), v);
}

}  // namespace

Eigen::MatrixXd load_curve_points(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    std::size_t width = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line);
        if (lineno == 1 && is_header(fields)) continue;
        if (fields.size() < 2 || fields.size() > 3) parse_error(path, lineno, "expected 2 or 3 columns");
        if (width == 0) width = fields.size();
        if (fields.size() != width) parse_error(path, lineno, "column count changed");
        std::vector<double> row(width);
        for (std::size_t c = 0; c < width; ++c) {
            if (!parse_double(fields[c], row[c])) parse_error(path, lineno, "not a number: '" + std::string(fields[c]) + "'");
        }
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");
    Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t c = 0; c < width; ++c) out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
    }
    return out;
}

void save_curve_points(const std::filesystem::path& path, const Eigen::MatrixXd& points) {
    std::ofstream out = open_out(path);
    out << (points.cols() == 3 ? "x,y,z\n" : "x,y\n");
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
        for (Eigen::Index c = 0; c < points.cols(); ++c) out << (c ? "," : "") << fmt(points(i, c));
        out << '\n';
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

PointGrid load_surface_points(const std::filesystem::path& path) {
    std::ifstream in = open_in(path);
    std::map<std::pair<long, long>, std::array<double, 3>> cells;
    long max_row = -1;
    long max_col = -1;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto fields = split(line);
        if (lineno == 1 && is_header(fields)) continue;
        if (fields.size() != 5) parse_error(path, lineno, "expected row,col,x,y,z");
        long r = 0;
        long c = 0;
        if (!parse_index(fields[0], r) || !parse_index(fields[1], c) || r < 0 || c < 0) {
            parse_error(path, lineno, "bad grid index");
        }
        std::array<double, 3> xyz{};
        for (int k = 0; k < 3; ++k) {
            if (!parse_double(fields[2 + k], xyz[k])) parse_error(path, lineno, "not a number: '" + std::string(fields[2 + k]) + "'");
        }
        if (!cells.emplace(std::make_pair(r, c), xyz).second) parse_error(path, lineno, "duplicate grid cell");
        max_row = std::max(max_row, r);
        max_col = std::max(max_col, c);
    }
    if (cells.empty()) throw Error(ErrorCode::ParseError, path.string() + ": no data rows");
    const long expected = (max_row + 1) * (max_col + 1);
    if (static_cast<long>(cells.size()) != expected) {
        throw Error(ErrorCode::IncompleteGrid, path.string() + ": " + std::to_string(cells.size()) + " cells for a " +
                                                   std::to_string(max_row + 1) + "x" + std::to_string(max_col + 1) + " grid");
    }
    PointGrid grid(max_row + 1, max_col + 1, 3);
    for (const auto& [rc, xyz] : cells) {
        for (int k = 0; k < 3; ++k) grid[static_cast<std::size_t>(k)](rc.first, rc.second) = xyz[k];
    }
    return grid;
}

void save_surface_points(const std::filesystem::path& path, const PointGrid& grid) {
    if (grid.dims() != 3) throw Error(ErrorCode::DimensionMismatch, "surface CSV needs three coordinates");
    std::ofstream out = open_out(path);
    out << "row,col,x,y,z\n";
    for (Eigen::Index i = 0; i < grid.rows(); ++i) {
        for (Eigen::Index j = 0; j < grid.cols(); ++j) {
            out << i << ',' << j << ',' << fmt(grid[0](i, j)) << ',' << fmt(grid[1](i, j)) << ',' << fmt(grid[2](i, j))
                << '\n';
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "write failed: " + path.string());
}

}  // namespace rpir
