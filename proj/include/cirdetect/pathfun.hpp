#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "errors.hpp"
#include "linalg.hpp"
#include "sampler.hpp"

namespace cirdetect {

// A window [0, s] is treated as singular when det Q_s falls below this
// fraction of s * int X^2.
inline constexpr double kSingularityTolerance = 1e-12;

namespace detail {

inline double trapezoid_total(std::span<const double> x, double dt) {
    double sum = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) sum += 0.5 * (x[i - 1] + x[i]);
    return sum * dt;
}

}  // namespace detail

// Realized quadratic variation divided by the trapezoid integral of X.
inline double estimate_sigma_sq(const SamplePath& path) {
    const auto x = path.values();
    double qv = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        const double dx = x[i] - x[i - 1];
        qv += dx * dx;
    }
    const double integral = detail::trapezoid_total(x, path.dt());
    if (!(integral > 0.0)) {
        throw DegeneratePathError("cannot recover sigma^2: the path integrates to zero");
    }
    return qv / integral;
}

// Cumulative int_0^s X dX = (X_s^2 - X_0^2 - sigma^2 int_0^s X du) / 2 at
// every grid point, with the du-integral by trapezoid.
inline std::vector<double> ito_integral(const SamplePath& path, double sigma_sq) {
    if (!(sigma_sq >= 0.0) || !std::isfinite(sigma_sq)) {
        throw ArgumentError("sigma^2 must be finite and >= 0");
    }
    const auto x = path.values();
    std::vector<double> out(x.size());
    const double x0_sq = x[0] * x[0];
    double cum = 0.0;
    out[0] = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) {
        cum += 0.5 * (x[i - 1] + x[i]) * path.dt();
        out[i] = 0.5 * (x[i] * x[i] - x0_sq - sigma_sq * cum);
    }
    return out;
}

// Running integrals of a sampled path and the matrices built from them.
// Index i refers to the window [t0, t0 + i dt].
class PathFunctionals {
public:
    std::size_t size() const noexcept { return x_.size(); }
    std::size_t last() const noexcept { return x_.size() - 1; }
    double dt() const noexcept { return dt_; }
    double t0() const noexcept { return t0_; }
    double sigma_sq() const noexcept { return sigma_sq_; }

    // Elapsed time s at grid index i.
    double elapsed(std::size_t i) const noexcept { return static_cast<double>(i) * dt_; }
    double horizon() const noexcept { return elapsed(last()); }

    std::span<const double> x() const noexcept { return x_; }
    std::span<const double> cum_x() const noexcept { return cum_x_; }
    std::span<const double> cum_x2() const noexcept { return cum_x2_; }
    std::span<const double> cum_x3() const noexcept { return cum_x3_; }
    std::span<const double> cum_ito() const noexcept { return cum_ito_; }

    // [[s, -int X], [-int X, int X^2]]
    Sym2 q_at(std::size_t i) const { return {elapsed(i), -cum_x_[i], cum_x2_[i]}; }

    // [X_s - X_0, -int X dX]
    Vec2 d_at(std::size_t i) const { return {x_[i] - x_[0], -cum_ito_[i]}; }

    // sigma^2 [[int X, -int X^2], [-int X^2, int X^3]]
    Sym2 info_at(std::size_t i) const {
        return {sigma_sq_ * cum_x_[i], -sigma_sq_ * cum_x2_[i], sigma_sq_ * cum_x3_[i]};
    }

    double det_q(std::size_t i) const {
        return elapsed(i) * cum_x2_[i] - cum_x_[i] * cum_x_[i];
    }

    bool is_singular(std::size_t i) const {
        const double det = det_q(i);
        return !(det > kSingularityTolerance * elapsed(i) * cum_x2_[i]) || !(det > 0.0);
    }

    // Grid index of elapsed time s; s must lie on the grid to 1e-9 steps.
    std::size_t index_of(double s) const {
        const double k = s / dt_;
        const double r = std::round(k);
        if (std::abs(k - r) > 1e-9 * std::max(1.0, r) || r < 0.0 ||
            r > static_cast<double>(last())) {
            throw ArgumentError("time is not a grid point of the path");
        }
        return static_cast<std::size_t>(r);
    }

    friend PathFunctionals compute_functionals(const SamplePath&, std::optional<double>);

private:
    PathFunctionals() = default;

    double t0_ = 0.0;
    double dt_ = 0.0;
    double sigma_sq_ = 0.0;
    std::vector<double> x_;
    std::vector<double> cum_x_;
    std::vector<double> cum_x2_;
    std::vector<double> cum_x3_;
    std::vector<double> cum_ito_;
};

// Fills every cumulative array in one pass. An empty sigma_sq selects the
// realized-variation estimate.
inline PathFunctionals compute_functionals(const SamplePath& path,
                                           std::optional<double> sigma_sq = std::nullopt) {
    PathFunctionals fn;
    fn.t0_ = path.t0();
    fn.dt_ = path.dt();
    fn.sigma_sq_ = sigma_sq ? *sigma_sq : estimate_sigma_sq(path);
    if (!(fn.sigma_sq_ >= 0.0) || !std::isfinite(fn.sigma_sq_)) {
        throw ArgumentError("sigma^2 must be finite and >= 0");
    }
    const auto x = path.values();
    const std::size_t n = x.size();
    fn.x_.assign(x.begin(), x.end());
    fn.cum_x_.resize(n);
    fn.cum_x2_.resize(n);
    fn.cum_x3_.resize(n);
    fn.cum_ito_.resize(n);
    const double half_dt = 0.5 * path.dt();
    const double x0_sq = x[0] * x[0];
    double c1 = 0.0, c2 = 0.0, c3 = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        const double l = x[i - 1];
        const double r = x[i];
        c1 += half_dt * (l + r);
        c2 += half_dt * (l * l + r * r);
        c3 += half_dt * (l * l * l + r * r * r);
        fn.cum_x_[i] = c1;
        fn.cum_x2_[i] = c2;
        fn.cum_x3_[i] = c3;
        fn.cum_ito_[i] = 0.5 * (r * r - x0_sq - fn.sigma_sq_ * c1);
    }
    return fn;
}

}  // namespace cirdetect
