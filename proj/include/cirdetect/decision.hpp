#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

#include "errors.hpp"
#include "testprocess.hpp"

namespace cirdetect {

// P(sup_t B_t >= x) for a standard Brownian bridge; equals P(inf_t B_t <= -x).
inline double one_sided_tail(double x) {
    if (!(x > 0.0)) return 1.0;
    return std::exp(-2.0 * x * x);
}

// P(sup_t |B_t| >= x), the Kolmogorov survival function.
inline double two_sided_tail(double x) {
    if (!(x > 0.0)) return 1.0;
    if (x < 0.6) {
        // Jacobi-transformed series for the CDF; the alternating series
        // converges too slowly near zero.
        const double c = std::numbers::pi * std::numbers::pi / (8.0 * x * x);
        double cdf = 0.0;
        for (int k = 1; k < 64; ++k) {
            const double odd = 2.0 * k - 1.0;
            const double term = std::exp(-odd * odd * c);
            cdf += term;
            if (term < 1e-17) break;
        }
        cdf *= std::sqrt(2.0 * std::numbers::pi) / x;
        return std::clamp(1.0 - cdf, 0.0, 1.0);
    }
    double sum = 0.0;
    for (int k = 1; k < 10000; ++k) {
        const double kk = static_cast<double>(k);
        const double term = std::exp(-2.0 * kk * kk * x * x);
        sum += (k % 2 == 1) ? term : -term;
        if (term < 1e-12) break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

enum class Parameter { a, b, both };
enum class Side { upper, lower, two_sided };

inline Parameter parse_parameter(std::string_view s) {
    if (s == "a") return Parameter::a;
    if (s == "b") return Parameter::b;
    if (s == "both") return Parameter::both;
    throw ArgumentError("parameter must be one of a, b, both (got '" + std::string(s) + "')");
}

inline Side parse_side(std::string_view s) {
    if (s == "upper") return Side::upper;
    if (s == "lower") return Side::lower;
    if (s == "two" || s == "two-sided") return Side::two_sided;
    throw ArgumentError("side must be one of upper, lower, two (got '" + std::string(s) + "')");
}

inline std::string_view to_string(Parameter p) {
    switch (p) {
        case Parameter::a: return "a";
        case Parameter::b: return "b";
        case Parameter::both: return "both";
    }
    return "?";
}

inline std::string_view to_string(Side s) {
    switch (s) {
        case Side::upper: return "upper";
        case Side::lower: return "lower";
        case Side::two_sided: return "two";
    }
    return "?";
}

inline void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw ArgumentError("alpha must lie in (0, 1)");
}

// Level-alpha threshold for the sup (upper), the negated inf (lower) or the
// sup of the absolute value (two-sided) of a Brownian bridge.
inline double critical_value(double alpha, Side side) {
    check_alpha(alpha);
    if (side != Side::two_sided) return std::sqrt(-std::log(alpha) / 2.0);
    double lo = 0.0;
    double hi = 10.0;
    while (hi - lo > 1e-14) {
        const double mid = 0.5 * (lo + hi);
        if (two_sided_tail(mid) > alpha) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

struct TestSpec {
    Parameter parameter = Parameter::a;
    Side side = Side::two_sided;
    double alpha = 0.05;
};

struct Decision {
    Parameter parameter;
    Side side;
    // Level the component was tested at (alpha / 2 under Bonferroni).
    double alpha;
    // sup (upper), inf (lower) or sup |.| (two-sided) of the component.
    double statistic;
    // Signed threshold: the statistic rejects above it, or below it for lower.
    double critical_value;
    double p_value;
    bool reject;
    // 1 for the a-component, 2 for the b-component.
    int component;
};

namespace detail {

inline Decision decide(const TestTrajectory& traj, Parameter parameter, Side side, double alpha) {
    const int component = parameter == Parameter::b ? 2 : 1;
    const std::size_t c = static_cast<std::size_t>(component - 1);
    double hi = 0.0;
    double lo = 0.0;
    double abs_hi = 0.0;
    for (const Vec2& v : traj.values) {
        hi = std::max(hi, v[c]);
        lo = std::min(lo, v[c]);
        abs_hi = std::max(abs_hi, std::abs(v[c]));
    }
    const double crit = critical_value(alpha, side);
    Decision d{parameter, side, alpha, 0.0, crit, 1.0, false, component};
    switch (side) {
        case Side::upper:
            d.statistic = hi;
            d.p_value = one_sided_tail(hi);
            d.reject = hi > crit;
            break;
        case Side::lower:
            d.statistic = lo;
            d.critical_value = -crit;
            d.p_value = one_sided_tail(-lo);
            d.reject = lo < -crit;
            break;
        case Side::two_sided:
            d.statistic = abs_hi;
            d.p_value = two_sided_tail(abs_hi);
            d.reject = abs_hi > crit;
            break;
    }
    return d;
}

}  // namespace detail

// One Decision per tested component; `both` splits alpha evenly (Bonferroni).
inline std::vector<Decision> run_test(const TestTrajectory& traj, const TestSpec& spec) {
    check_alpha(spec.alpha);
    if (spec.parameter == Parameter::both) {
        const double half = spec.alpha / 2.0;
        return {detail::decide(traj, Parameter::a, spec.side, half),
                detail::decide(traj, Parameter::b, spec.side, half)};
    }
    return {detail::decide(traj, spec.parameter, spec.side, spec.alpha)};
}

}  // namespace cirdetect
