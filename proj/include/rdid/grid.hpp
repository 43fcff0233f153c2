#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "rdid/errors.hpp"

namespace rdid {

using Field = std::vector<double>;

// Uniform grid on [0,1], nodes x_i = i/(n-1). Endpoints are exact.
struct Grid {
    int n = 0;
    double h = 0.0;
    std::vector<double> nodes;

    static Grid uniform(int n) {
        if (n < 3) throw validation_error("grid needs at least 3 nodes");
        Grid g;
        g.n = n;
        g.h = 1.0 / static_cast<double>(n - 1);
        g.nodes.resize(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            g.nodes[static_cast<size_t>(i)] = static_cast<double>(i) / static_cast<double>(n - 1);
        return g;
    }
};

// Trapezoid weights: h/2 at the ends, h inside. Sum to exactly 1 by the
// division-last arrangement used in integrate().
inline std::vector<double> trapezoid_weights(const Grid& g) {
    std::vector<double> w(static_cast<size_t>(g.n), g.h);
    w.front() = 0.5 * g.h;
    w.back() = 0.5 * g.h;
    return w;
}

namespace detail {
// Sum f with trapezoid end-halving, divide by (n-1) once at the end so a
// constant field integrates with no rounding from h itself.
inline double trapezoid_sum(const Field& f) {
    double s = 0.5 * (f.front() + f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s;
}
} // namespace detail

inline void require_matching(const Field& f, const Grid& g, const char* what) {
    if (f.size() != static_cast<size_t>(g.n))
        throw validation_error(std::string(what) + ": field length does not match grid");
}

// Trapezoid quadrature of f over [0,1]. f == 1 integrates to exactly 1.0.
inline double integrate(const Field& f, const Grid& g) {
    require_matching(f, g, "integrate");
    return detail::trapezoid_sum(f) / static_cast<double>(g.n - 1);
}

// Weighted L2 norm, sqrt(sum_i w_i f_i^2). f == 1 has norm exactly 1.0.
inline double l2_norm(const Field& f, const Grid& g) {
    require_matching(f, g, "l2_norm");
    double s = 0.5 * (f.front() * f.front() + f.back() * f.back());
    for (size_t i = 1; i + 1 < f.size(); ++i) s += f[i] * f[i];
    return std::sqrt(s / static_cast<double>(g.n - 1));
}

} // namespace rdid
