#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include "errors.hpp"
#include "linalg.hpp"
#include "model.hpp"
#include "sampler.hpp"
#include "testprocess.hpp"

namespace cirdetect {

// Direction of the parameter change. A downward change drives the matching
// raw score component up, so `down` looks for the maximum.
enum class ChangeDirection { up, down };

inline ChangeDirection parse_direction(std::string_view s) {
    if (s == "up") return ChangeDirection::up;
    if (s == "down") return ChangeDirection::down;
    throw ArgumentError("direction must be up or down (got '" + std::string(s) + "')");
}

inline std::string_view to_string(ChangeDirection d) {
    return d == ChangeDirection::up ? "up" : "down";
}

struct ChangePointEstimate {
    double tau_hat;
    std::size_t index;
    double achieved_value;
    ChangeDirection direction;
    int component;
};

// First grid time at which the chosen raw score component (1 = a, 2 = b)
// attains its maximum (down) or minimum (up).
inline ChangePointEstimate estimate_change_point(const RawScore& raw, int component,
                                                 ChangeDirection direction) {
    if (component != 1 && component != 2) throw ArgumentError("component must be 1 or 2");
    if (raw.values.empty()) throw ArgumentError("raw score is empty");
    const std::size_t c = static_cast<std::size_t>(component - 1);
    std::size_t best = 0;
    for (std::size_t i = 1; i < raw.values.size(); ++i) {
        const double v = raw.values[i][c];
        const double b = raw.values[best][c];
        if (direction == ChangeDirection::down ? v > b : v < b) best = i;
    }
    return {raw.times[best], best, raw.values[best][c], direction, component};
}

struct ScenarioAnalytics {
    Vec2 theta_tilde;
    double psi;
    double phi;
    Sym2 q_pre;
    Sym2 q_post;
};

// ((rho Q')^{-1} + ((1 - rho) Q'')^{-1})^{-1}, symmetric positive definite
// whenever both designs are.
inline Sym2 harmonic_blend(const Sym2& q_pre, const Sym2& q_post, double rho) {
    return ((rho * q_pre).inverse() + ((1.0 - rho) * q_post).inverse()).inverse();
}

inline Sym2 harmonic_blend(const ChangeScenario& s) {
    return harmonic_blend(stationary_design(s.params_pre()), stationary_design(s.params_post()),
                          s.rho());
}

// Limit of the full-sample estimate under the change:
// (rho Q' + (1 - rho) Q'')^{-1} (rho Q' theta' + (1 - rho) Q'' theta'').
inline Vec2 theta_tilde(const ChangeScenario& s) {
    const Sym2 q_pre = stationary_design(s.params_pre());
    const Sym2 q_post = stationary_design(s.params_post());
    const double rho = s.rho();
    const Sym2 blend = rho * q_pre + (1.0 - rho) * q_post;
    const Vec2 pre{s.pre().a, s.pre().b};
    const Vec2 post{s.post().a, s.post().b};
    const Vec2 rhs = rho * (q_pre * pre) + (1.0 - rho) * (q_post * post);
    return blend.solve(rhs);
}

// Per-unit-time peak of the first raw score component under an a-change.
inline double drift_psi(const ChangeScenario& s) {
    return (s.pre().a - s.post().a) * harmonic_blend(s).xx;
}

// Per-unit-time peak of the second raw score component under a b-change.
inline double drift_phi(const ChangeScenario& s) {
    return (s.pre().b - s.post().b) * harmonic_blend(s).yy;
}

inline ScenarioAnalytics analyze(const ChangeScenario& s) {
    return {theta_tilde(s), drift_psi(s), drift_phi(s), stationary_design(s.params_pre()),
            stationary_design(s.params_post())};
}

}  // namespace cirdetect
