#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "cirdetect/model.hpp"
#include "oracles.hpp"

using namespace cirdetect;

TEST(CirParams, RejectsNonPositive) {
    EXPECT_THROW(CirParams(0.0, 1.0, 1.0), ArgumentError);
    EXPECT_THROW(CirParams(1.0, -1.0, 1.0), ArgumentError);
    EXPECT_THROW(CirParams(1.0, 1.0, 0.0), ArgumentError);
    EXPECT_THROW(CirParams(1.0, 1.0, NAN), ArgumentError);
}

TEST(StationaryMoment, UnitParameters) {
    const CirParams p(1.0, 1.0, 1.0);
    EXPECT_DOUBLE_EQ(stationary_moment(p, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(stationary_moment(p, 1.0), 1.0);
    EXPECT_DOUBLE_EQ(stationary_moment(p, 2.0), 1.5);
    EXPECT_DOUBLE_EQ(stationary_moment(p, 3.0), 3.0);
}

TEST(StationaryMoment, NonIntegerOrderMatchesGammaRatio) {
    const CirParams p(2.0, 0.7, 0.9);
    const double shape = 2.0 * 2.0 / 0.81;
    const double rate = 2.0 * 0.7 / 0.81;
    const double expected = std::tgamma(shape + 0.5) / (std::sqrt(rate) * std::tgamma(shape));
    EXPECT_NEAR(stationary_moment(p, 0.5), expected, 1e-12 * expected);
    // Negative orders above -shape are finite.
    EXPECT_GT(stationary_moment(p, -1.0), 0.0);
}

TEST(StationaryMoment, DivergentOrderIsDomainError) {
    const CirParams p(1.0, 1.0, 1.0);  // shape = 2
    EXPECT_THROW(stationary_moment(p, -2.0), DomainError);
    EXPECT_THROW(stationary_moment(p, -3.5), DomainError);
}

TEST(StationaryMoment, FirstMomentIsAOverBProperty) {
    std::mt19937_64 gen(7);
    std::uniform_real_distribution<double> u(0.05, 5.0);
    for (int i = 0; i < 500; ++i) {
        const CirParams p(u(gen), u(gen), u(gen));
        EXPECT_NEAR(stationary_moment(p, 1.0), p.a() / p.b(), 4e-16 * p.a() / p.b());
    }
}

TEST(ConditionalMean, ClosedFormValues) {
    const CirParams p(1.0, 1.0, 1.0);
    EXPECT_NEAR(conditional_mean(p, 2.0, std::log(2.0)), 1.5, 1e-15);
    EXPECT_NEAR(conditional_mean(p, 1.0, 3.7), 1.0, 1e-15);
    EXPECT_EQ(conditional_mean(CirParams(0.3, 2.0, 0.4), 5.0, 0.0), 5.0);
    EXPECT_THROW(conditional_mean(p, -1.0, 1.0), ArgumentError);
    EXPECT_THROW(conditional_mean(p, 1.0, -1.0), ArgumentError);
}

TEST(ConditionalMean, SemigroupProperty) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.05, 3.0);
    for (int i = 0; i < 300; ++i) {
        const CirParams p(u(gen), u(gen), u(gen));
        const double x0 = u(gen), s = u(gen), t = u(gen);
        const double direct = conditional_mean(p, x0, s + t);
        const double chained = conditional_mean(p, conditional_mean(p, x0, s), t);
        EXPECT_NEAR(direct, chained, 1e-13 * (1.0 + direct));
    }
}

TEST(ConditionalSecondMoment, ZeroElapsedIsSquare) {
    EXPECT_DOUBLE_EQ(conditional_second_moment(CirParams(1.3, 0.4, 0.8), 2.5, 0.0), 6.25);
}

TEST(ConditionalSecondMoment, MatchesQuadratureOfDoubleIntegral) {
    // E X_t^2 = e^{-2bt} x0^2 + int_0^t (2a+s^2)(e^{-b(2t-u)} x0 + a int_0^u e^{-b(2t-u-v)} dv) du
    const auto by_quadrature = [](double a, double b, double sigma, double x0, double t) {
        const double k = 2.0 * a + sigma * sigma;
        const auto outer = [&](double u) {
            const double inner = oracle::integrate(
                [&](double v) { return std::exp(-b * (2.0 * t - u - v)); }, 0.0, u, 1e-15);
            return k * (std::exp(-b * (2.0 * t - u)) * x0 + a * inner);
        };
        return std::exp(-2.0 * b * t) * x0 * x0 + oracle::integrate(outer, 0.0, t, 1e-14);
    };
    EXPECT_NEAR(conditional_second_moment(CirParams(1.0, 1.0, 1.0), 1.0, 1.0),
                by_quadrature(1.0, 1.0, 1.0, 1.0, 1.0), 1e-10);
    EXPECT_NEAR(conditional_second_moment(CirParams(2.0, 0.5, 0.3), 0.2, 2.5),
                by_quadrature(2.0, 0.5, 0.3, 0.2, 2.5), 1e-10);
    EXPECT_NEAR(conditional_second_moment(CirParams(0.4, 3.0, 1.2), 4.0, 0.1),
                by_quadrature(0.4, 3.0, 1.2, 4.0, 0.1), 1e-10);
}

TEST(ConditionalMoments, ConvergeToStationaryMoments) {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int i = 0; i < 100; ++i) {
        const CirParams p(u(gen), u(gen), u(gen));
        const double x0 = 3.0 * u(gen);
        const double far = 50.0 / p.b();
        EXPECT_LT(std::abs(conditional_mean(p, x0, far) - stationary_moment(p, 1.0)), 1e-10);
        EXPECT_LT(std::abs(conditional_second_moment(p, x0, far) - stationary_moment(p, 2.0)), 1e-10);
    }
    const CirParams unit(1.0, 1.0, 1.0);
    EXPECT_NEAR(conditional_second_moment(unit, 0.3, 60.0), 1.5, 1e-12);
}

TEST(StationaryDesign, KnownMatrices) {
    const Sym2 unit = stationary_design(CirParams(1.0, 1.0, 1.0));
    EXPECT_DOUBLE_EQ(unit.xx, 1.0);
    EXPECT_DOUBLE_EQ(unit.xy, -1.0);
    EXPECT_DOUBLE_EQ(unit.yy, 1.5);
    EXPECT_NEAR(unit.det(), 0.5, 1e-15);

    const Sym2 q = stationary_design(CirParams(2.0, 1.0, 0.5));
    EXPECT_DOUBLE_EQ(q.xy, -2.0);
    EXPECT_DOUBLE_EQ(q.yy, 4.25);
}

TEST(StationaryDesign, PositiveDefiniteProperty) {
    std::mt19937_64 gen(5);
    std::uniform_real_distribution<double> u(0.05, 5.0);
    for (int i = 0; i < 500; ++i) {
        const CirParams p(u(gen), u(gen), u(gen));
        const Sym2 q = stationary_design(p);
        const double var = stationary_moment(p, 2.0) - p.a() * p.a() / (p.b() * p.b());
        EXPECT_TRUE(q.positive_definite());
        EXPECT_NEAR(q.det(), var, 1e-12 * (1.0 + q.yy));
    }
}
