#pragma once

#include <vector>

#include "rdid/grid.hpp"
#include "rdid/params.hpp"

namespace rdid {

// Symmetric tridiagonal storage is not assumed: lower[i] couples row i+1 to
// column i, upper[i] couples row i to column i+1. diag has n entries,
// lower/upper have n-1.
struct Tridiag {
    std::vector<double> lower, diag, upper;

    size_t size() const { return diag.size(); }

    // y = M x
    Field apply(const Field& x) const {
        const size_t n = diag.size();
        Field y(n, 0.0);
        for (size_t i = 0; i < n; ++i) {
            double s = diag[i] * x[i];
            if (i > 0) s += lower[i - 1] * x[i - 1];
            if (i + 1 < n) s += upper[i] * x[i + 1];
            y[i] = s;
        }
        return y;
    }
};

// Semi-discrete plant: du/dt = A u + b v with ghost-node Neumann closures.
// b is zero except its last entry, stored as b_last = 2 lambda / h.
struct Operator {
    Tridiag A;
    double b_last = 0.0;
};

// Second-order finite differences for u_t = lambda u_xx - k u on the uniform
// grid. Boundary rows use the reflected ghost node, so row 0 reads
// lambda (2 u_1 - 2 u_0)/h^2 - k u_0 and row n-1 mirrors it; the inflow
// v enters only through b_last at the controlled end.
inline Operator assemble_operator(double lambda, double k, const Grid& g) {
    if (!(lambda > 0.0)) throw validation_error("assemble_operator: lambda must be positive");
    if (!(k >= 0.0)) throw validation_error("assemble_operator: k must be nonnegative");
    const size_t n = static_cast<size_t>(g.n);
    const double ih2 = 1.0 / (g.h * g.h);
    Operator op;
    op.A.lower.assign(n - 1, lambda * ih2);
    op.A.upper.assign(n - 1, lambda * ih2);
    op.A.diag.assign(n, -2.0 * lambda * ih2 - k);
    op.A.upper.front() = 2.0 * lambda * ih2;
    op.A.lower.back() = 2.0 * lambda * ih2;
    op.b_last = 2.0 * lambda / g.h;
    return op;
}

inline Operator assemble_operator(const SystemParams& p, const Grid& g) {
    return assemble_operator(p.lambda, p.k_true, g);
}

// Plant state: field sample plus the compensator integrator.
struct PlantState {
    Field u;
    double chi = 0.0;
    double t = 0.0;
};

// Measured output y = u(1).
inline double boundary_output(const PlantState& s) { return s.u.back(); }

// Control law v = chi - gamma (y - y_r).
inline double control_input(const PlantState& s, const SystemParams& p) {
    return s.chi - p.gamma * (boundary_output(s) - p.y_r);
}

} // namespace rdid
