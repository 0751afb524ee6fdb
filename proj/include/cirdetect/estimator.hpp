#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"
#include "pathfun.hpp"

namespace cirdetect {

struct ThetaHat {
    double a_hat;
    double b_hat;
    double window_end;
    // det Q_s of the window, kept as a conditioning diagnostic.
    double det_q;

    Vec2 vec() const { return {a_hat, b_hat}; }
};

// Continuous-record least-squares estimate over [0, s] with s the elapsed
// time at grid index `index`: solves Q_s theta = d_s.
inline ThetaHat lse_at(const PathFunctionals& fn, std::size_t index) {
    if (index == 0 || index >= fn.size()) {
        throw ArgumentError("estimation window must end at a grid point after the start");
    }
    const double det = fn.det_q(index);
    if (fn.is_singular(index)) {
        throw SingularWindowError("Q_s is singular on the window ending at s = " +
                                      std::to_string(fn.elapsed(index)),
                                  det);
    }
    const Sym2 q = fn.q_at(index);
    const Vec2 d = fn.d_at(index);
    const Sym2 adj = q.adjugate();
    const Vec2 num = adj * d;
    return {num[0] / det, num[1] / det, fn.elapsed(index), det};
}

// Full-sample estimate.
inline ThetaHat lse(const PathFunctionals& fn) { return lse_at(fn, fn.last()); }

// Discrete least-squares fit of X_i - X_{i-1} = a - b X_{i-1}.
inline Vec2 lse_discrete(std::span<const double> obs) {
    if (obs.size() < 3) throw ArgumentError("discrete LSE needs at least three observations");
    const double n = static_cast<double>(obs.size() - 1);
    double s1 = 0.0, s2 = 0.0, sd = 0.0, sxd = 0.0;
    for (std::size_t i = 1; i < obs.size(); ++i) {
        const double prev = obs[i - 1];
        const double inc = obs[i] - prev;
        s1 += prev;
        s2 += prev * prev;
        sd += inc;
        sxd += inc * prev;
    }
    const Sym2 design{n, -s1, s2};
    const double det = design.det();
    if (!(det > kSingularityTolerance * n * s2) || !(det > 0.0)) {
        throw SingularWindowError("discrete LSE design matrix is singular", det);
    }
    return design.solve({sd, -sxd});
}

}  // namespace cirdetect
