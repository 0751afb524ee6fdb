#pragma once

#include <cmath>
#include <string>

#include "errors.hpp"
#include "linalg.hpp"

namespace cirdetect {

// Parameters of dX = (a - b X) dt + sigma sqrt(X) dW.
class CirParams {
public:
    CirParams(double a, double b, double sigma) : a_(a), b_(b), sigma_(sigma) {
        if (!(a > 0.0) || !(b > 0.0) || !(sigma > 0.0) || !std::isfinite(a) ||
            !std::isfinite(b) || !std::isfinite(sigma)) {
            throw ArgumentError("CIR parameters must be finite with a > 0, b > 0, sigma > 0");
        }
    }

    double a() const noexcept { return a_; }
    double b() const noexcept { return b_; }
    double sigma() const noexcept { return sigma_; }
    double sigma_sq() const noexcept { return sigma_ * sigma_; }

    // Drift parameters as the vector (a, b) the estimators work with.
    Vec2 drift() const noexcept { return {a_, b_}; }

    friend bool operator==(const CirParams&, const CirParams&) = default;

private:
    double a_;
    double b_;
    double sigma_;
};

// Gamma(shape, rate) law of X at stationarity.
struct StationaryLaw {
    double shape;
    double rate;

    static StationaryLaw of(const CirParams& p) {
        return {2.0 * p.a() / p.sigma_sq(), 2.0 * p.b() / p.sigma_sq()};
    }

    double scale() const { return 1.0 / rate; }

    // E X^order. Small nonnegative integer orders use the rising factorial
    // directly; everything else goes through log-Gamma.
    double moment(double order) const {
        if (!(order > -shape)) {
            throw DomainError("stationary moment of order " + std::to_string(order) +
                              " diverges (needs order > -2a/sigma^2)");
        }
        if (order == std::floor(order) && order >= 0.0 && order <= 16.0) {
            double m = 1.0;
            for (int k = 0; k < static_cast<int>(order); ++k) {
                m *= (shape + k) / rate;
            }
            return m;
        }
        return std::exp(std::lgamma(shape + order) - std::lgamma(shape) -
                        order * std::log(rate));
    }
};

inline double stationary_moment(const CirParams& p, double order) {
    return StationaryLaw::of(p).moment(order);
}

namespace detail {

inline void check_elapsed(double x0, double dt) {
    if (!(x0 >= 0.0) || !(dt >= 0.0)) {
        throw ArgumentError("conditional moments need x0 >= 0 and dt >= 0");
    }
}

}  // namespace detail

// E[X_{t+dt} | X_t = x0].
inline double conditional_mean(const CirParams& p, double x0, double dt) {
    detail::check_elapsed(x0, dt);
    if (std::isinf(dt)) return p.a() / p.b();
    const double decay = std::exp(-p.b() * dt);
    return x0 * decay - (p.a() / p.b()) * std::expm1(-p.b() * dt);
}

// E[X_{t+dt}^2 | X_t = x0]. The second moment solves
// dE[X^2] = ((2a + sigma^2) E[X] - 2b E[X^2]) dt, whose convolution
// integral against the conditional mean is elementary.
inline double conditional_second_moment(const CirParams& p, double x0, double dt) {
    detail::check_elapsed(x0, dt);
    const double b = p.b();
    const double mean = p.a() / b;
    const double k = 2.0 * p.a() + p.sigma_sq();
    if (std::isinf(dt)) return k * mean / (2.0 * b);
    const double e1 = std::exp(-b * dt);
    const double e2 = e1 * e1;
    const double one_minus_e2 = -std::expm1(-2.0 * b * dt);
    const double e1_minus_e2 = -e1 * std::expm1(-b * dt);
    return e2 * x0 * x0 + k * (mean * one_minus_e2 / (2.0 * b) + (x0 - mean) * e1_minus_e2 / b);
}

// [[1, -E X], [-E X, E X^2]] at stationarity.
inline Sym2 stationary_design(const CirParams& p) {
    const StationaryLaw law = StationaryLaw::of(p);
    const double m1 = law.moment(1.0);
    const double m2 = law.moment(2.0);
    return {1.0, -m1, m2};
}

}  // namespace cirdetect
