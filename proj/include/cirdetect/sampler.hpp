#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "errors.hpp"
#include "model.hpp"
#include "random.hpp"

namespace cirdetect {

// Uniformly sampled nonnegative trajectory on [t0, t0 + n dt].
class SamplePath {
public:
    SamplePath(double t0, double dt, std::vector<double> values)
        : t0_(t0), dt_(dt), values_(std::move(values)) {
        if (!(dt_ > 0.0) || !std::isfinite(dt_) || !std::isfinite(t0_)) {
            throw ArgumentError("sample path needs a finite step dt > 0");
        }
        if (values_.size() < 2) {
            throw ArgumentError("sample path needs at least two points");
        }
        for (double v : values_) {
            if (!(v >= 0.0) || !std::isfinite(v)) {
                throw ArgumentError("sample path values must be finite and nonnegative");
            }
        }
    }

    double t0() const noexcept { return t0_; }
    double dt() const noexcept { return dt_; }
    std::size_t size() const noexcept { return values_.size(); }
    std::size_t steps() const noexcept { return values_.size() - 1; }
    double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
    double duration() const noexcept { return static_cast<double>(steps()) * dt_; }
    double operator[](std::size_t i) const noexcept { return values_[i]; }
    std::span<const double> values() const noexcept { return values_; }

    // Sub-path over grid points [first, last], inclusive.
    SamplePath slice(std::size_t first, std::size_t last) const {
        if (last >= size() || last <= first) {
            throw ArgumentError("slice needs first < last < size");
        }
        return {time(first), dt_,
                std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                    values_.begin() + static_cast<std::ptrdiff_t>(last) + 1)};
    }

private:
    double t0_;
    double dt_;
    std::vector<double> values_;
};

// Drift pair (a, b) on one side of a change.
struct DriftParams {
    double a;
    double b;
    friend bool operator==(const DriftParams&, const DriftParams&) = default;
};

// Single change of (a, b) at tau = rho * horizon; sigma is shared.
class ChangeScenario {
public:
    ChangeScenario(DriftParams pre, DriftParams post, double sigma, double rho, double horizon)
        : pre_(pre), post_(post), sigma_(sigma), rho_(rho), horizon_(horizon) {
        // Validates positivity of both sides.
        (void)params_pre();
        (void)params_post();
        if (!(rho > 0.0 && rho < 1.0)) throw ArgumentError("change fraction rho must lie in (0, 1)");
        if (!(horizon > 0.0) || !std::isfinite(horizon)) {
            throw ArgumentError("horizon must be finite and positive");
        }
    }

    DriftParams pre() const noexcept { return pre_; }
    DriftParams post() const noexcept { return post_; }
    double sigma() const noexcept { return sigma_; }
    double rho() const noexcept { return rho_; }
    double horizon() const noexcept { return horizon_; }
    double tau() const noexcept { return rho_ * horizon_; }

    CirParams params_pre() const { return {pre_.a, pre_.b, sigma_}; }
    CirParams params_post() const { return {post_.a, post_.b, sigma_}; }

private:
    DriftParams pre_;
    DriftParams post_;
    double sigma_;
    double rho_;
    double horizon_;
};

// Start X_0 from the Gamma stationary law.
struct StationaryStart {};

using InitialState = std::variant<double, StationaryStart>;

namespace detail {

inline std::size_t grid_steps(double span, double dt) {
    if (!(dt > 0.0) || !std::isfinite(dt) || !(span >= dt) || !std::isfinite(span)) {
        throw ArgumentError("simulation needs 0 < dt <= t_end");
    }
    // The small slack absorbs representation error in span/dt, e.g. 10/0.01.
    return static_cast<std::size_t>(std::floor(span / dt + 1e-9));
}

inline void check_finite_state(double x, double dt) {
    if (!std::isfinite(x) || !(x >= 0.0) || !(dt > 0.0) || !std::isfinite(dt)) {
        throw ArgumentError("transition needs finite x >= 0 and dt > 0");
    }
}

}  // namespace detail

// Exact draw of X_{t+dt} given X_t = x. The transition is c times a
// noncentral chi-squared with nu = 4a/sigma^2 degrees of freedom and
// noncentrality x e^{-b dt} / c, where c = sigma^2 (1 - e^{-b dt}) / (4b).
// The noncentral draw is a Poisson(lambda/2) mixture of central chi-squares.
inline double sample_transition(const CirParams& p, double x, double dt, RandomSource& rng) {
    detail::check_finite_state(x, dt);
    const double c = -p.sigma_sq() * std::expm1(-p.b() * dt) / (4.0 * p.b());
    const double dof = 4.0 * p.a() / p.sigma_sq();
    const double noncentrality = x * std::exp(-p.b() * dt) / c;
    const auto k = rng.poisson(0.5 * noncentrality);
    return c * rng.chi_squared(dof + 2.0 * static_cast<double>(k));
}

inline double draw_stationary(const CirParams& p, RandomSource& rng) {
    const StationaryLaw law = StationaryLaw::of(p);
    return rng.gamma(law.shape) * law.scale();
}

inline double resolve_initial(const InitialState& x0, const CirParams& p, RandomSource& rng) {
    if (const double* x = std::get_if<double>(&x0)) {
        if (!(*x >= 0.0) || !std::isfinite(*x)) throw ArgumentError("x0 must be finite and >= 0");
        return *x;
    }
    return draw_stationary(p, rng);
}

inline SamplePath simulate_path(const CirParams& p, InitialState x0, double t_end, double dt,
                                RandomSource& rng) {
    const std::size_t n = detail::grid_steps(t_end, dt);
    std::vector<double> values(n + 1);
    values[0] = resolve_initial(x0, p, rng);
    for (std::size_t i = 0; i < n; ++i) {
        values[i + 1] = sample_transition(p, values[i], dt, rng);
    }
    return {0.0, dt, std::move(values)};
}

struct ChangePath {
    SamplePath path;
    // Grid index at which the post-change parameters take over.
    std::size_t change_index;
    // Requested change time rho*T and its grid realisation change_index*dt.
    double tau;
    double tau_grid;
};

// Path under a single change. Transitions leaving grid points before
// round(rho T / dt) use the pre-change parameters; a stationary start draws
// from the pre-change law.
inline ChangePath simulate_change_path(const ChangeScenario& s, InitialState x0, double dt,
                                       RandomSource& rng) {
    const std::size_t n = detail::grid_steps(s.horizon(), dt);
    const auto k = static_cast<std::size_t>(std::llround(s.tau() / dt));
    if (k == 0 || k >= n) {
        throw ArgumentError("change point falls outside the interior of the grid");
    }
    const CirParams pre = s.params_pre();
    const CirParams post = s.params_post();
    std::vector<double> values(n + 1);
    values[0] = resolve_initial(x0, pre, rng);
    for (std::size_t i = 0; i < n; ++i) {
        values[i + 1] = sample_transition(i < k ? pre : post, values[i], dt, rng);
    }
    return {SamplePath(0.0, dt, std::move(values)), k, s.tau(), static_cast<double>(k) * dt};
}

// Full-truncation Euler-Maruyama step, kept as a reference scheme.
inline double euler_step(const CirParams& p, double x, double dt, RandomSource& rng) {
    detail::check_finite_state(x, dt);
    const double z = rng.normal();
    const double next = x + (p.a() - p.b() * x) * dt + p.sigma() * std::sqrt(x * dt) * z;
    return next > 0.0 ? next : 0.0;
}

inline SamplePath simulate_path_euler(const CirParams& p, InitialState x0, double t_end, double dt,
                                      RandomSource& rng) {
    const std::size_t n = detail::grid_steps(t_end, dt);
    std::vector<double> values(n + 1);
    values[0] = resolve_initial(x0, p, rng);
    for (std::size_t i = 0; i < n; ++i) {
        values[i + 1] = euler_step(p, values[i], dt, rng);
    }
    return {0.0, dt, std::move(values)};
}

}  // namespace cirdetect
