#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "sampler.hpp"
#include "testprocess.hpp"

namespace cirdetect {

// Relative tolerance on each time increment when reading a path.
inline constexpr double kGridTolerance = 1e-9;

namespace detail {

// Shortest decimal form that reads back to the same double.
inline std::string format_real(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline bool parse_real(std::string_view s, double& out) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    if (s.empty()) return false;
    if (s.front() == '+') s.remove_prefix(1);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), out);
    return res.ec == std::errc{} && res.ptr == s.data() + s.size() && std::isfinite(out);
}

inline std::string_view trim_eol(std::string_view s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == ' ')) s.remove_suffix(1);
    return s;
}

}  // namespace detail

inline void write_path_csv(std::ostream& os, const SamplePath& path) {
    os << "t,x\n";
    for (std::size_t i = 0; i < path.size(); ++i) {
        os << detail::format_real(path.time(i)) << ',' << detail::format_real(path[i]) << '\n';
    }
}

inline void write_path_csv(const std::filesystem::path& file, const SamplePath& path) {
    std::ofstream os(file);
    if (!os) {
        throw PathFormatError(PathFormatError::Kind::io, 0, "cannot open " + file.string() + " for writing");
    }
    write_path_csv(os, path);
    if (!os) throw PathFormatError(PathFormatError::Kind::io, 0, "failed writing " + file.string());
}

// Reads a `t,x` CSV. Rejects malformed rows, a non-uniform grid and
// negative values, each with the offending line number.
inline SamplePath read_path_csv(std::istream& is) {
    using Kind = PathFormatError::Kind;
    std::string line;
    std::size_t line_no = 0;
    if (!std::getline(is, line)) throw PathFormatError(Kind::too_short, 0, "path CSV is empty");
    ++line_no;
    if (detail::trim_eol(line) != "t,x") {
        throw PathFormatError(Kind::malformed_row, 1, "line 1: expected header 't,x'");
    }
    std::vector<double> times;
    std::vector<double> values;
    std::vector<std::size_t> lines;
    while (std::getline(is, line)) {
        ++line_no;
        const std::string_view row = detail::trim_eol(line);
        if (row.empty()) continue;
        const auto comma = row.find(',');
        double t = 0.0;
        double x = 0.0;
        if (comma == std::string_view::npos || row.find(',', comma + 1) != std::string_view::npos ||
            !detail::parse_real(row.substr(0, comma), t) ||
            !detail::parse_real(row.substr(comma + 1), x)) {
            throw PathFormatError(Kind::malformed_row, line_no,
                                  "line " + std::to_string(line_no) + ": expected two numbers 't,x'");
        }
        if (x < 0.0) {
            throw PathFormatError(Kind::negative_value, line_no,
                                  "line " + std::to_string(line_no) + ": negative value x = " +
                                      detail::format_real(x));
        }
        times.push_back(t);
        values.push_back(x);
        lines.push_back(line_no);
    }
    if (values.size() < 2) {
        throw PathFormatError(Kind::too_short, line_no, "path CSV needs at least two rows");
    }
    const double dt = (times.back() - times.front()) / static_cast<double>(times.size() - 1);
    if (!(dt > 0.0)) {
        throw PathFormatError(Kind::non_uniform_grid, lines[1], "time stamps must increase");
    }
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double step = times[i] - times[i - 1];
        if (std::abs(step - dt) > kGridTolerance * dt) {
            throw PathFormatError(Kind::non_uniform_grid, lines[i],
                                  "line " + std::to_string(lines[i]) + ": time step " +
                                      detail::format_real(step) + " departs from the uniform step " +
                                      detail::format_real(dt));
        }
    }
    return {times.front(), dt, std::move(values)};
}

inline SamplePath read_path_csv(const std::filesystem::path& file) {
    std::ifstream is(file);
    if (!is) throw PathFormatError(PathFormatError::Kind::io, 0, "cannot open " + file.string());
    return read_path_csv(is);
}

inline void write_trajectory_csv(std::ostream& os, const TestTrajectory& traj) {
    os << "t,score_a,score_b\n";
    for (std::size_t k = 0; k < traj.values.size(); ++k) {
        os << detail::format_real(traj.t_grid[k]) << ',' << detail::format_real(traj.values[k][0])
           << ',' << detail::format_real(traj.values[k][1]) << '\n';
    }
}

}  // namespace cirdetect
