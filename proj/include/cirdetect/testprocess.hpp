#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <vector>

#include "errors.hpp"
#include "estimator.hpp"
#include "linalg.hpp"
#include "pathfun.hpp"

namespace cirdetect {

// Unnormalized cumulative score int_0^s [1, -X_u] dM_u^ at every grid point,
// where M^ uses a fixed reference estimate.
struct RawScore {
    std::vector<double> times;
    std::vector<Vec2> values;
    Vec2 reference;
    // False when `reference` is not the full-sample estimate.
    bool full_sample_reference = true;
};

// d_s - Q_s theta at each grid point, read straight off the cumulative arrays.
inline RawScore raw_score(const PathFunctionals& fn, const ThetaHat& theta) {
    RawScore out;
    out.reference = theta.vec();
    out.full_sample_reference = std::abs(theta.window_end - fn.horizon()) <= 0.5 * fn.dt();
    const auto x = fn.x();
    const auto c1 = fn.cum_x();
    const auto c2 = fn.cum_x2();
    const auto ito = fn.cum_ito();
    const double a = theta.a_hat;
    const double b = theta.b_hat;
    out.times.resize(fn.size());
    out.values.resize(fn.size());
    for (std::size_t i = 0; i < fn.size(); ++i) {
        const double s = fn.elapsed(i);
        out.times[i] = s;
        out.values[i] = {x[i] - x[0] - a * s + b * c1[i], -ito[i] + a * c1[i] - b * c2[i]};
    }
    return out;
}

// Normalized two-component trajectory on t in {0, 1/m, ..., 1}.
struct TestTrajectory {
    std::vector<double> t_grid;
    std::vector<Vec2> values;
    // Path grid index sampled for each t.
    std::vector<std::size_t> path_index;
    Sym2 info_T;
    Sym2 normalizer;
    ThetaHat theta_hat;
};

namespace detail {

inline std::size_t trajectory_point(std::size_t k, std::size_t m, std::size_t n) {
    if (k == m) return n;
    return static_cast<std::size_t>(std::llround(static_cast<double>(k) * static_cast<double>(n) /
                                                 static_cast<double>(m)));
}

}  // namespace detail

// I_T^{-1/2} times the raw score at t T. `grid` defaults to one point per
// path step.
inline TestTrajectory test_trajectory(const PathFunctionals& fn,
                                      std::optional<std::size_t> grid = std::nullopt) {
    const std::size_t n = fn.last();
    const std::size_t m = grid.value_or(n);
    if (m == 0) throw ArgumentError("trajectory grid needs at least one interval");
    if (m > n) throw ArgumentError("trajectory grid is finer than the path");

    TestTrajectory out;
    out.theta_hat = lse(fn);
    out.info_T = fn.info_at(n);
    out.normalizer = inv_sqrt_2x2(out.info_T);
    const RawScore raw = raw_score(fn, out.theta_hat);

    out.t_grid.resize(m + 1);
    out.values.resize(m + 1);
    out.path_index.resize(m + 1);
    for (std::size_t k = 0; k <= m; ++k) {
        const std::size_t i = detail::trajectory_point(k, m, n);
        out.t_grid[k] = static_cast<double>(k) / static_cast<double>(m);
        out.path_index[k] = i;
        out.values[k] = out.normalizer * raw.values[i];
    }
    return out;
}

// The same trajectory through I_T^{-1/2} Q_{tT} (theta^_{tT} - theta^_T).
// Entries are empty where Q_{tT} is singular.
inline std::vector<std::optional<Vec2>> cusum_form(const PathFunctionals& fn,
                                                   const TestTrajectory& traj) {
    std::vector<std::optional<Vec2>> out(traj.values.size());
    const Vec2 full = traj.theta_hat.vec();
    for (std::size_t k = 0; k < out.size(); ++k) {
        const std::size_t i = traj.path_index[k];
        if (i == 0 || fn.is_singular(i)) continue;
        const Vec2 window = lse_at(fn, i).vec();
        out[k] = traj.normalizer * (fn.q_at(i) * (window - full));
    }
    return out;
}

}  // namespace cirdetect
