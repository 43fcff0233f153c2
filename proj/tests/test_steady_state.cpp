#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rdid/steady_state.hpp"

using namespace rdid;

namespace {
SystemParams reference_params() {
    SystemParams p;
    p.lambda = 3.0;
    p.k_true = 2.0;
    p.gamma = 2.0;
    p.rho = 4.5;
    p.y_r = 1.0;
    p.alpha = 2.0;
    return p;
}
} // namespace

TEST(GainMap, ZeroMapsToZeroExactly) {
    EXPECT_EQ(g_lambda(0.0, 3.0), 0.0);
    EXPECT_EQ(g_lambda(0.0, 0.5), 0.0);
}

TEST(GainMap, MatchesClosedFormValues) {
    // sqrt(k/lambda) = 2 at k = 2, lambda = 0.5
    EXPECT_NEAR(g_lambda(2.0, 0.5), 1.9280551601516338, 1e-15);
    // series branch: k/lambda = 1e-10 is below the sqrt cancellation cutoff
    EXPECT_NEAR(g_lambda(3e-10, 3.0), 9.9999999996666667e-11, 1e-22);
}

TEST(GainMap, SeriesAndDirectBranchesAgreeAtTheCutoff) {
    const double lambda = 3.0;
    const double k_cut = lambda * 1e-8;
    const double below = g_lambda(k_cut * (1.0 - 1e-9), lambda);
    const double above = g_lambda(k_cut * (1.0 + 1e-9), lambda);
    EXPECT_NEAR(below / above, 1.0, 1e-8);
    const double s = std::sqrt(k_cut / lambda);
    EXPECT_NEAR(g_lambda(k_cut, lambda), s * std::tanh(s), 1e-12 * s * s);
}

TEST(GainMap, DerivativeMatchesCentralDifference) {
    for (double lambda : {0.5, 3.0}) {
        for (double k : {1e-6, 0.01, 1.0, 2.0, 50.0}) {
            const double dk = std::max(k, 1.0) * 1e-6;
            const double num =
                (g_lambda(k + dk, lambda) - g_lambda(std::max(0.0, k - dk), lambda)) /
                (dk + std::min(k, dk));
            EXPECT_NEAR(g_lambda_derivative(k, lambda) / num, 1.0, 1e-5)
                << "k = " << k << " lambda = " << lambda;
        }
    }
}

TEST(GainMap, StrictlyIncreasingOnRandomPairs) {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (double lambda : {0.5, 3.0}) {
        for (int i = 0; i < 1000; ++i) {
            const double k1 = std::pow(10.0, -6.0 + 10.0 * uni(rng));
            const double k2 = std::pow(10.0, -6.0 + 10.0 * uni(rng));
            if (k1 == k2) continue;
            const double d = (g_lambda(k1, lambda) - g_lambda(k2, lambda)) * (k1 - k2);
            EXPECT_GT(d, 0.0) << "k1 = " << k1 << " k2 = " << k2;
        }
    }
}

TEST(GainMapInverse, RoundTripAccuracy) {
    for (double lambda : {0.5, 3.0}) {
        for (double k : {1e-6, 0.1, 1.0, 2.0, 10.0, 1e4}) {
            const double back = g_lambda_inverse(g_lambda(k, lambda), lambda);
            EXPECT_LE(std::abs(back - k), 1e-8 * std::max(1.0, k))
                << "k = " << k << " lambda = " << lambda;
        }
    }
}

TEST(GainMapInverse, EdgeCases) {
    EXPECT_EQ(g_lambda_inverse(0.0, 3.0), 0.0);
    EXPECT_THROW(g_lambda_inverse(-1e-9, 3.0), validation_error);
    EXPECT_THROW(g_lambda_inverse(1.0, 0.0), validation_error);
    // tiny values stay on the series branch and invert cleanly
    const double v = 1e-300;
    const double k = g_lambda_inverse(v, 3.0);
    EXPECT_NEAR(g_lambda(k, 3.0), v, 1e-12);
}

TEST(GainEstimate, ClampsNonpositiveRatiosToZero) {
    const SystemParams p = reference_params();
    EXPECT_EQ(estimate_k(-0.5, p), 0.0);
    EXPECT_EQ(estimate_k(0.0, p), 0.0);
    EXPECT_GT(estimate_k(0.1, p), 0.0);
}

TEST(GainEstimate, RejectsZeroReference) {
    SystemParams p = reference_params();
    p.y_r = 0.0;
    EXPECT_THROW(estimate_k(0.5, p), validation_error);
}

TEST(GainEstimate, RecoversTrueGainFromEquilibriumCompensator) {
    const SystemParams p = reference_params();
    const double chi_bar = g_lambda(p.k_true, p.lambda) * p.y_r;
    EXPECT_NEAR(estimate_k(chi_bar, p), p.k_true, 1e-8);
}

TEST(Equilibrium, MatchesClosedForm) {
    const SystemParams p = reference_params();
    const Grid g = Grid::uniform(201);
    const EquilibriumProfile eq = equilibrium(p.k_true, p, g);
    EXPECT_NEAR(eq.chi_bar, 0.54963162913848094, 1e-15);
    EXPECT_NEAR(eq.u_bar.front(), 0.73949821390985727, 1e-15);
    EXPECT_DOUBLE_EQ(eq.u_bar.back(), p.y_r);
}

TEST(Equilibrium, ZeroReactionIsFlat) {
    const SystemParams p = reference_params();
    const Grid g = Grid::uniform(11);
    const EquilibriumProfile eq = equilibrium(0.0, p, g);
    for (double v : eq.u_bar) EXPECT_DOUBLE_EQ(v, p.y_r);
    EXPECT_EQ(eq.chi_bar, 0.0);
}

TEST(Equilibrium, StableForStiffReaction) {
    SystemParams p = reference_params();
    const Grid g = Grid::uniform(101);
    const EquilibriumProfile eq = equilibrium(1e6, p, g); // sqrt(k/lambda) ~ 577
    EXPECT_DOUBLE_EQ(eq.u_bar.back(), p.y_r);
    for (double v : eq.u_bar) EXPECT_TRUE(std::isfinite(v));
    EXPECT_NEAR(eq.u_bar.front(), 0.0, 1e-200);
    EXPECT_NEAR(eq.chi_bar, std::sqrt(1e6 / 3.0), 1e-9);
}
