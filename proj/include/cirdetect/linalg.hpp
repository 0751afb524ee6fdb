#pragma once

#include <array>
#include <cmath>
#include <cstddef>

#include "errors.hpp"

namespace cirdetect {

struct Vec2 {
    std::array<double, 2> e{};

    constexpr Vec2() = default;
    constexpr Vec2(double first, double second) : e{first, second} {}

    constexpr double& operator[](std::size_t i) { return e[i]; }
    constexpr double operator[](std::size_t i) const { return e[i]; }

    friend constexpr Vec2 operator+(Vec2 l, Vec2 r) { return {l[0] + r[0], l[1] + r[1]}; }
    friend constexpr Vec2 operator-(Vec2 l, Vec2 r) { return {l[0] - r[0], l[1] - r[1]}; }
    friend constexpr Vec2 operator*(double s, Vec2 v) { return {s * v[0], s * v[1]}; }
    friend constexpr bool operator==(const Vec2&, const Vec2&) = default;
};

constexpr double dot(Vec2 l, Vec2 r) { return l[0] * r[0] + l[1] * r[1]; }

inline double norm(Vec2 v) { return std::hypot(v[0], v[1]); }

// Symmetric 2x2 matrix [[xx, xy], [xy, yy]].
struct Sym2 {
    double xx = 0.0;
    double xy = 0.0;
    double yy = 0.0;

    constexpr double det() const { return xx * yy - xy * xy; }
    constexpr double trace() const { return xx + yy; }

    // Adjugate, i.e. det() * inverse().
    constexpr Sym2 adjugate() const { return {yy, -xy, xx}; }

    Sym2 inverse() const {
        const double d = det();
        if (!(d != 0.0) || !std::isfinite(d)) {
            throw MatrixDomainError("2x2 matrix is singular");
        }
        const Sym2 adj = adjugate();
        return {adj.xx / d, adj.xy / d, adj.yy / d};
    }

    // Solves M x = rhs by the adjugate formula.
    Vec2 solve(Vec2 rhs) const {
        const double d = det();
        if (!(d != 0.0) || !std::isfinite(d)) {
            throw MatrixDomainError("2x2 matrix is singular");
        }
        return {(yy * rhs[0] - xy * rhs[1]) / d, (xx * rhs[1] - xy * rhs[0]) / d};
    }

    bool positive_definite() const {
        return std::isfinite(xx) && std::isfinite(xy) && std::isfinite(yy) && xx > 0.0 &&
               det() > 0.0;
    }

    friend constexpr Vec2 operator*(const Sym2& m, Vec2 v) {
        return {m.xx * v[0] + m.xy * v[1], m.xy * v[0] + m.yy * v[1]};
    }
    friend constexpr Sym2 operator+(const Sym2& l, const Sym2& r) {
        return {l.xx + r.xx, l.xy + r.xy, l.yy + r.yy};
    }
    friend constexpr Sym2 operator-(const Sym2& l, const Sym2& r) {
        return {l.xx - r.xx, l.xy - r.xy, l.yy - r.yy};
    }
    friend constexpr Sym2 operator*(double s, const Sym2& m) {
        return {s * m.xx, s * m.xy, s * m.yy};
    }
    friend constexpr bool operator==(const Sym2&, const Sym2&) = default;

    static constexpr Sym2 identity() { return {1.0, 0.0, 1.0}; }
};

// Principal inverse square root of a symmetric positive definite matrix.
//
// With delta = sqrt(det M) and tau = sqrt(tr M + 2 delta), the principal
// square root is (M + delta I) / tau, so its inverse is
// adj(M + delta I) / (delta * tau).
inline Sym2 inv_sqrt_2x2(const Sym2& m) {
    if (!m.positive_definite()) {
        throw MatrixDomainError("inverse square root needs a positive definite matrix");
    }
    const double delta = std::sqrt(m.det());
    const double tau = std::sqrt(m.trace() + 2.0 * delta);
    const double scale = delta * tau;
    return {(m.yy + delta) / scale, -m.xy / scale, (m.xx + delta) / scale};
}

}  // namespace cirdetect
