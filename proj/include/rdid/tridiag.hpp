#pragma once

#include <cmath>
#include <vector>

#include "rdid/errors.hpp"
#include "rdid/pde.hpp"

namespace rdid {

// Thomas factorization of a tridiagonal matrix, reusable across solves with
// different right-hand sides. No pivoting: every matrix factored here is an
// M-matrix of the form I - theta*dt*A or -A with strict diagonal dominance.
class TridiagSolver {
public:
    explicit TridiagSolver(const Tridiag& m) : lower_(m.lower), cp_(m.size()), inv_(m.size()) {
        const size_t n = m.size();
        double denom = m.diag[0];
        check(denom);
        inv_[0] = 1.0 / denom;
        cp_[0] = (n > 1) ? m.upper[0] * inv_[0] : 0.0;
        for (size_t i = 1; i < n; ++i) {
            denom = m.diag[i] - m.lower[i - 1] * cp_[i - 1];
            check(denom);
            inv_[i] = 1.0 / denom;
            cp_[i] = (i + 1 < n) ? m.upper[i] * inv_[i] : 0.0;
        }
    }

    // Solve M x = rhs in place.
    void solve(Field& rhs) const {
        const size_t n = inv_.size();
        rhs[0] *= inv_[0];
        for (size_t i = 1; i < n; ++i)
            rhs[i] = (rhs[i] - lower_[i - 1] * rhs[i - 1]) * inv_[i];
        for (size_t i = n - 1; i-- > 0;)
            rhs[i] -= cp_[i] * rhs[i + 1];
    }

    Field solved(Field rhs) const {
        solve(rhs);
        return rhs;
    }

private:
    static void check(double denom) {
        if (!std::isfinite(denom) || std::abs(denom) < 1e-300)
            throw numerical_alarm("tridiagonal factorization hit a near-zero pivot");
    }

    std::vector<double> lower_, cp_, inv_;
};

// theta-scheme step of the field-only problem du/dt = A u + s for a constant
// source s over the step: (I - theta dt A) u+ = u + (1-theta) dt A u + dt s.
// theta = 1 is implicit Euler, theta = 1/2 Crank-Nicolson.
inline Field advance_field(const Field& u, const Tridiag& A, const Field& source, double dt,
                           double theta) {
    const size_t n = u.size();
    Tridiag m;
    m.lower.resize(n - 1);
    m.upper.resize(n - 1);
    m.diag.resize(n);
    for (size_t i = 0; i < n; ++i) m.diag[i] = 1.0 - theta * dt * A.diag[i];
    for (size_t i = 0; i + 1 < n; ++i) {
        m.lower[i] = -theta * dt * A.lower[i];
        m.upper[i] = -theta * dt * A.upper[i];
    }
    Field rhs = u;
    if (theta != 1.0) {
        Field au = A.apply(u);
        for (size_t i = 0; i < n; ++i) rhs[i] += (1.0 - theta) * dt * au[i];
    }
    for (size_t i = 0; i < n; ++i) rhs[i] += dt * source[i];
    TridiagSolver(m).solve(rhs);
    return rhs;
}

} // namespace rdid
