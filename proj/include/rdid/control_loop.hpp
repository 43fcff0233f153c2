#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rdid/pde.hpp"
#include "rdid/tridiag.hpp"

namespace rdid {

enum class Scheme { implicit_euler, crank_nicolson };

inline std::string scheme_name(Scheme s) {
    return s == Scheme::implicit_euler ? "implicit-euler" : "crank-nicolson";
}

struct LoopConfig {
    double dt = 1e-3;
    double t_end = 10.0;
    Scheme scheme = Scheme::implicit_euler;
    int record_every = 10;
};

inline void validate(const LoopConfig& c) {
    if (!(c.dt > 0.0)) throw validation_error("dt must be positive");
    if (!(c.t_end > c.dt)) throw validation_error("t_end must exceed dt");
    if (c.record_every < 1) throw validation_error("record_every must be at least 1");
}

inline double theta_of(Scheme s) { return s == Scheme::implicit_euler ? 1.0 : 0.5; }

// Recorded trajectory, one entry per sampled step. W and eta_l2 are observer
// diagnostics and are zero when no observer runs; V is measured against the
// discrete closed-loop fixed point (see discrete_fixed_point).
struct TimeSeries {
    std::vector<double> t, y, chi, v, k_hat, V, W, eta_l2;

    size_t size() const { return t.size(); }
    void push(double t_, double y_, double chi_, double v_, double k_hat_, double V_, double W_,
              double eta_) {
        t.push_back(t_);
        y.push_back(y_);
        chi.push_back(chi_);
        v.push_back(v_);
        k_hat.push_back(k_hat_);
        V.push_back(V_);
        W.push_back(W_);
        eta_l2.push_back(eta_);
    }
};

namespace detail {
// Output feedback folded into the operator: v = chi - gamma (u_{n-1} - y_r)
// turns the inflow column into a -gamma*b_last bump on the last diagonal plus
// a chi coupling and an affine part b_last*gamma*y_r.
inline Tridiag closed_tridiag(const Operator& op, const SystemParams& p) {
    Tridiag t = op.A;
    t.diag.back() -= p.gamma * op.b_last;
    return t;
}
} // namespace detail

// Dense closed-loop generator on (u, chi), for spectrum diagnostics. The last
// row is the compensator integrator, the last column the inflow coupling.
inline Eigen::MatrixXd augmented_matrix(const SystemParams& p, const Grid& g) {
    const Operator op = assemble_operator(p, g);
    const Tridiag tc = detail::closed_tridiag(op, p);
    const int n = g.n;
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, n + 1);
    for (int i = 0; i < n; ++i) {
        a(i, i) = tc.diag[static_cast<size_t>(i)];
        if (i > 0) a(i, i - 1) = tc.lower[static_cast<size_t>(i - 1)];
        if (i + 1 < n) a(i, i + 1) = tc.upper[static_cast<size_t>(i)];
    }
    a(n - 1, n) = op.b_last;
    a(n, n - 1) = -p.rho;
    return a;
}

// Exact stationary point of the discretized closed loop: solves the bordered
// system A_c u + b_last chi e = -c_u, u_{n-1} = y_r. A step started here
// stays put to rounding, unlike the continuum equilibrium which drifts at the
// O(h^2) consistency error.
inline std::pair<Field, double> discrete_fixed_point(const SystemParams& p, const Grid& g) {
    const Operator op = assemble_operator(p, g);
    const Tridiag tc = detail::closed_tridiag(op, p);
    TridiagSolver solver(tc);
    const size_t n = static_cast<size_t>(g.n);
    Field w1(n, 0.0), w2(n, 0.0);
    w1.back() = -op.b_last * p.gamma * p.y_r;
    w2.back() = -op.b_last;
    solver.solve(w1);
    solver.solve(w2);
    if (std::abs(w2.back()) < 1e-300)
        throw numerical_alarm("discrete_fixed_point: degenerate boundary response");
    const double chi_bar = (p.y_r - w1.back()) / w2.back();
    Field u_bar(n);
    for (size_t i = 0; i < n; ++i) u_bar[i] = w1[i] + chi_bar * w2[i];
    return {u_bar, chi_bar};
}

// One theta-step of the coupled (u, chi) system, solved monolithically: the
// tridiagonal block is factored once, the chi border is eliminated with a
// single precomputed response column (Schur complement of size 1).
class LoopStepper {
public:
    LoopStepper(const SystemParams& p, const Grid& g, const LoopConfig& cfg)
        : p_(p), dt_(cfg.dt), theta_(theta_of(cfg.scheme)),
          op_(assemble_operator(p, g)), tc_(detail::closed_tridiag(op_, p)) {
        Tridiag m;
        const size_t n = tc_.size();
        m.diag.resize(n);
        m.lower.resize(n - 1);
        m.upper.resize(n - 1);
        for (size_t i = 0; i < n; ++i) m.diag[i] = 1.0 - theta_ * dt_ * tc_.diag[i];
        for (size_t i = 0; i + 1 < n; ++i) {
            m.lower[i] = -theta_ * dt_ * tc_.lower[i];
            m.upper[i] = -theta_ * dt_ * tc_.upper[i];
        }
        solver_.emplace(m);
        w2_.assign(n, 0.0);
        w2_.back() = theta_ * dt_ * op_.b_last;
        solver_->solve(w2_);
        rb_ = theta_ * dt_ * p.rho;
        if (std::abs(1.0 + rb_ * w2_.back()) < 1e-300)
            throw numerical_alarm("loop step: singular Schur complement");
    }

    void step(PlantState& s) const {
        const size_t n = s.u.size();
        Field fu = s.u;
        double fchi = s.chi;
        if (theta_ != 1.0) {
            const double c = (1.0 - theta_) * dt_;
            Field au = tc_.apply(s.u);
            for (size_t i = 0; i < n; ++i) fu[i] += c * au[i];
            fu.back() += c * op_.b_last * s.chi;
            fchi += c * (-p_.rho * s.u.back());
        }
        fu.back() += dt_ * op_.b_last * p_.gamma * p_.y_r;
        fchi += dt_ * p_.rho * p_.y_r;

        solver_->solve(fu); // fu becomes w1
        const double chi_new = (fchi - rb_ * fu.back()) / (1.0 + rb_ * w2_.back());
        for (size_t i = 0; i < n; ++i) fu[i] += chi_new * w2_[i];
        s.u = std::move(fu);
        s.chi = chi_new;
        s.t += dt_;
    }

    double b_last() const { return op_.b_last; }

private:
    SystemParams p_;
    double dt_, theta_;
    Operator op_;
    Tridiag tc_;
    std::optional<TridiagSolver> solver_;
    Field w2_;
    double rb_ = 0.0;
};

// One-shot convenience step; prefer LoopStepper for long runs.
inline PlantState step(PlantState s, const SystemParams& p, const Grid& g,
                       const LoopConfig& cfg) {
    LoopStepper(p, g, cfg).step(s);
    return s;
}

} // namespace rdid
