#pragma once

#include <algorithm>
#include <cmath>

#include "rdid/grid.hpp"
#include "rdid/params.hpp"

namespace rdid {

// Static input-output gain map g_lambda(k) = sqrt(k/lambda) tanh(sqrt(k/lambda)).
// Strictly increasing on [0, inf) with g(0) = 0, so it is invertible on the
// nonnegative axis. Near zero sqrt cancellation is avoided with the series
// g = x (1 - x/3 + 2 x^2/15) in x = k/lambda, accurate to O(x^3) relative.
inline double g_lambda(double k, double lambda) {
    if (!(lambda > 0.0)) throw validation_error("g_lambda: lambda must be positive");
    if (!(k >= 0.0)) throw validation_error("g_lambda: k must be nonnegative");
    const double x = k / lambda;
    if (x < 1e-8) return x * (1.0 - x / 3.0 + 2.0 * x * x / 15.0);
    const double s = std::sqrt(x);
    return s * std::tanh(s);
}

// dg/dk, used by the Newton iteration of the inverse.
inline double g_lambda_derivative(double k, double lambda) {
    const double x = k / lambda;
    if (x < 1e-8) return (1.0 - 2.0 * x / 3.0 + 0.4 * x * x) / lambda;
    const double s = std::sqrt(x);
    const double t = std::tanh(s);
    // d/dk [s tanh s] = (tanh s + s (1 - tanh^2 s)) / (2 lambda s)
    return (t + s * (1.0 - t * t)) / (2.0 * lambda * s);
}

// Inverse of g_lambda on [0, inf): safeguarded Newton inside a bracket that
// is doubled until it covers the requested value. Convergence is declared in
// g-value, |g(k) - v| <= 1e-12, which keeps the returned k accurate where the
// map is steep and honest about flatness where it is not.
inline double g_lambda_inverse(double v, double lambda) {
    if (!(lambda > 0.0)) throw validation_error("g_lambda_inverse: lambda must be positive");
    if (!(v >= 0.0)) throw validation_error("g_lambda_inverse: value must be nonnegative");
    if (v == 0.0) return 0.0;
    const double tol = 1e-12;
    double lo = 0.0;
    double hi = lambda * std::max(1.0, (v + 1.0) * (v + 1.0));
    int guard = 0;
    while (g_lambda(hi, lambda) < v) {
        hi *= 2.0;
        if (++guard > 200 || !std::isfinite(hi))
            throw numerical_alarm("g_lambda_inverse: bracket expansion failed");
    }
    double x = 0.5 * hi;
    for (int it = 0; it < 200; ++it) {
        const double f = g_lambda(x, lambda) - v;
        if (std::abs(f) <= tol) return x;
        if (f < 0.0) lo = x; else hi = x;
        const double d = g_lambda_derivative(x, lambda);
        double cand = x - f / d;
        if (!(cand > lo) || !(cand < hi)) cand = 0.5 * (lo + hi);
        if (cand == x) cand = 0.5 * (lo + hi);
        x = cand;
    }
    if (std::abs(g_lambda(x, lambda) - v) <= 1e-9) return x;
    throw numerical_alarm("g_lambda_inverse: no convergence to requested tolerance");
}

// Gain estimate from the compensator state: k_hat = g^{-1}(max{0, chi/y_r}).
// The clamp returns exactly 0 for nonpositive ratios.
inline double estimate_k(double chi, const SystemParams& p) {
    if (p.y_r == 0.0) throw validation_error("estimate_k: y_r must be nonzero");
    const double ratio = chi / p.y_r;
    if (!(ratio > 0.0)) return 0.0;
    return g_lambda_inverse(ratio, p.lambda);
}

// Closed-form equilibrium for a given reaction coefficient k:
//   u_bar(x) = cosh(s x)/cosh(s) * y_r,  s = sqrt(k/lambda)
//   chi_bar  = g_lambda(k) * y_r
struct EquilibriumProfile {
    Field u_bar;
    double chi_bar = 0.0;
};

inline EquilibriumProfile equilibrium(double k, const SystemParams& p, const Grid& g) {
    if (!(p.lambda > 0.0)) throw validation_error("equilibrium: lambda must be positive");
    if (!(k >= 0.0)) throw validation_error("equilibrium: k must be nonnegative");
    const double s = std::sqrt(k / p.lambda);
    EquilibriumProfile eq;
    eq.u_bar.resize(g.nodes.size());
    if (s < 20.0) {
        const double c = std::cosh(s);
        for (size_t i = 0; i < g.nodes.size(); ++i)
            eq.u_bar[i] = std::cosh(s * g.nodes[i]) / c * p.y_r;
    } else {
        // cosh ratio in overflow-safe exponential form
        for (size_t i = 0; i < g.nodes.size(); ++i) {
            const double x = g.nodes[i];
            eq.u_bar[i] = std::exp(s * (x - 1.0)) * (1.0 + std::exp(-2.0 * s * x)) /
                          (1.0 + std::exp(-2.0 * s)) * p.y_r;
        }
    }
    eq.chi_bar = g_lambda(k, p.lambda) * p.y_r;
    return eq;
}

} // namespace rdid
