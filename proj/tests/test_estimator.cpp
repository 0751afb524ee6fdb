#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "cirdetect/estimator.hpp"
#include "cirdetect/sampler.hpp"

using namespace cirdetect;

TEST(LseAt, ConstantPathIsSingular) {
    const auto fn = compute_functionals(SamplePath(0.0, 0.1, std::vector<double>(51, 2.0)), 0.2);
    try {
        (void)lse_at(fn, fn.last());
        FAIL() << "expected SingularWindowError";
    } catch (const SingularWindowError& e) {
        EXPECT_NEAR(e.det_q(), 0.0, 1e-9);
    }
    EXPECT_THROW(lse_at(fn, 0), ArgumentError);
    EXPECT_THROW(lse_at(fn, fn.size()), ArgumentError);
}

TEST(LseAt, RecoversDecayRateOfDeterministicPath) {
    // X_t = e^{-t} solves dX = (0 - 1 X) dt.
    const double dt = 1e-4;
    std::vector<double> v(50001);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = std::exp(-static_cast<double>(i) * dt);
    const auto fn = compute_functionals(SamplePath(0.0, dt, v), 0.0);

    const Sym2 q = fn.q_at(fn.last());
    EXPECT_NEAR(q.xy, -(1.0 - std::exp(-5.0)), 1e-7);
    EXPECT_NEAR(q.yy, (1.0 - std::exp(-10.0)) / 2.0, 1e-7);

    const ThetaHat th = lse(fn);
    EXPECT_NEAR(th.a_hat, 0.0, 1e-3);
    EXPECT_NEAR(th.b_hat, 1.0, 1e-3);
    EXPECT_DOUBLE_EQ(th.window_end, 5.0);
    EXPECT_GT(th.det_q, 0.0);
}

TEST(LseAt, ConsistentOnLongPath) {
    RandomSource rng(12);
    const auto path = simulate_path(CirParams(1.0, 1.0, 0.5), StationaryStart{}, 2000.0, 0.01, rng);
    const ThetaHat th = lse(compute_functionals(path));
    EXPECT_LT(norm(th.vec() - Vec2{1.0, 1.0}), 0.1);
}

TEST(LseAt, SolvesNormalEquationsExactly) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        RandomSource rng(seed);
        const auto fn = compute_functionals(simulate_path(CirParams(0.5, 2.0, 0.8), 0.3, 30.0, 0.01, rng));
        for (std::size_t i : {50u, 400u, 3000u}) {
            const Vec2 back = fn.q_at(i) * lse_at(fn, i).vec();
            const Vec2 d = fn.d_at(i);
            EXPECT_LE(norm(back - d), 1e-10 * norm(d));
        }
    }
}

TEST(LseDiscrete, HandSolvedExample) {
    const std::vector<double> obs{0.0, 1.0, 0.0};
    const Vec2 th = lse_discrete(obs);
    EXPECT_NEAR(th[0], 1.0, 1e-15);
    EXPECT_NEAR(th[1], 2.0, 1e-15);
}

TEST(LseDiscrete, ConstantObservationsAreSingular) {
    const std::vector<double> obs(10, 1.7);
    EXPECT_THROW(lse_discrete(obs), SingularWindowError);
    EXPECT_THROW(lse_discrete(std::vector<double>{1.0, 2.0}), ArgumentError);
}

TEST(LseDiscrete, UnitLagAgreesRoughlyWithContinuousEstimate) {
    RandomSource rng(90);
    const auto path = simulate_path(CirParams(1.0, 1.0, 0.5), StationaryStart{}, 2000.0, 0.01, rng);
    std::vector<double> unit_lag;
    for (std::size_t i = 0; i < path.size(); i += 100) unit_lag.push_back(path[i]);
    const Vec2 discrete = lse_discrete(unit_lag);
    const Vec2 continuous = lse(compute_functionals(path)).vec();
    for (int k = 0; k < 2; ++k) {
        EXPECT_GT(discrete[k] * continuous[k], 0.0);
        EXPECT_LT(std::abs(discrete[k] - continuous[k]), 0.5 * std::abs(continuous[k]));
    }
}
