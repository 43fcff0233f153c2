#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rdid/control_loop.hpp"
#include "rdid/grid.hpp"
#include "rdid/params.hpp"

namespace rdid {

namespace detail {
inline double trap_mean(const Field& f, auto&& fn) {
    double s = 0.5 * (fn(f.front()) + fn(f.back()));
    for (size_t i = 1; i + 1 < f.size(); ++i) s += fn(f[i]);
    return s / static_cast<double>(f.size() - 1);
}
} // namespace detail

inline double epsilon_bound(const SystemParams& p) { return std::sqrt(p.lambda / p.rho); }

// Composite functional V = ||u~||^2 - 2 eps chi~ Int(u~) + (lambda/rho) chi~^2,
// the quadratic form of Q = [[1, -eps], [-eps, lambda/rho]] on (u~, chi~) in
// L2 x R. Q is positive definite exactly for eps in (0, sqrt(lambda/rho)).
inline double lyapunov_V(const Field& u_tilde, double chi_tilde, double epsilon,
                         const SystemParams& p, const Grid& g) {
    require_matching(u_tilde, g, "lyapunov_V");
    if (!(epsilon > 0.0) || !(epsilon < epsilon_bound(p)))
        throw validation_error("lyapunov_V: epsilon outside (0, sqrt(lambda/rho))");
    const double uu = detail::trap_mean(u_tilde, [](double v) { return v * v; });
    const double iu = detail::trap_mean(u_tilde, [](double v) { return v; });
    return uu - 2.0 * epsilon * chi_tilde * iu + (p.lambda / p.rho) * chi_tilde * chi_tilde;
}

// Observer-error energy W = 0.5 ||eta||^2.
inline double lyapunov_W(const Field& eta, const Grid& g) {
    require_matching(eta, g, "lyapunov_W");
    return 0.5 * detail::trap_mean(eta, [](double v) { return v * v; });
}

// Cascade functional U = V + theta W.
inline double lyapunov_U(const Field& u_tilde, double chi_tilde, const Field& eta,
                         double epsilon, double theta, const SystemParams& p, const Grid& g) {
    if (!(theta > 0.0)) throw validation_error("lyapunov_U: theta must be positive");
    return lyapunov_V(u_tilde, chi_tilde, epsilon, p, g) + theta * lyapunov_W(eta, g);
}

// Symmetric 3x3 decay-rate matrix in the variables (u~, chi~, u~(1)); the
// composite functional is non-increasing wherever this matrix is negative
// definite and Q is positive definite.
inline Eigen::Matrix3d certificate_matrix(double epsilon, const SystemParams& p, double k) {
    Eigen::Matrix3d m;
    const double e = epsilon;
    m(0, 0) = -2.0 * k;
    m(0, 1) = 0.5 * e * k;
    m(0, 2) = 0.5 * e * p.rho;
    m(1, 1) = -p.lambda * e;
    m(1, 2) = 0.5 * p.lambda * e * p.gamma;
    m(2, 2) = -2.0 * p.gamma * p.lambda;
    m(1, 0) = m(0, 1);
    m(2, 0) = m(0, 2);
    m(2, 1) = m(1, 2);
    return m;
}

inline double max_eig_sym(const Eigen::Matrix3d& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es;
    es.compute(m);
    return es.eigenvalues().maxCoeff();
}

// Smallest eigenvalue of Q = [[1, -eps], [-eps, lambda/rho]] in closed form.
inline double q_min_eig(double epsilon, const SystemParams& p) {
    const double q = p.lambda / p.rho;
    const double tr = 1.0 + q;
    const double gap = std::sqrt((1.0 - q) * (1.0 - q) + 4.0 * epsilon * epsilon);
    return 0.5 * (tr - gap);
}

struct Certificate {
    double epsilon = 0.0;
    double psi_max_eig = 0.0;
    double q_min_eig = 0.0;
    bool valid = false;
};

inline Certificate evaluate_certificate(double epsilon, const SystemParams& p, double k) {
    Certificate c;
    c.epsilon = epsilon;
    c.psi_max_eig = max_eig_sym(certificate_matrix(epsilon, p, k));
    c.q_min_eig = q_min_eig(epsilon, p);
    c.valid = epsilon > 0.0 && epsilon < epsilon_bound(p) && c.psi_max_eig < 0.0 &&
              c.q_min_eig > 0.0;
    return c;
}

// Pick epsilon maximizing the certified decay margin |max eig| over the set
// where the matrix is negative definite and Q positive definite: a 600-point
// log grid over (0, sqrt(lambda/rho)) followed by two local refinement
// sweeps around the incumbent. Returns valid=false if no grid point
// certifies (callers treat that as a numerical alarm).
inline Certificate find_epsilon_star(const SystemParams& p, double k) {
    const double bound = epsilon_bound(p);
    const double lo = bound * 1e-6;
    const double hi = bound * (1.0 - 1e-9);
    const int N = 600;
    Certificate best;
    double best_margin = -1.0;
    auto consider = [&](double eps) {
        Certificate c = evaluate_certificate(eps, p, k);
        if (c.valid && -c.psi_max_eig > best_margin) {
            best_margin = -c.psi_max_eig;
            best = c;
        }
    };
    const double ratio = hi / lo;
    for (int i = 0; i < N; ++i)
        consider(lo * std::pow(ratio, static_cast<double>(i) / (N - 1)));
    if (!best.valid) return best;
    for (int sweep = 0; sweep < 2; ++sweep) {
        const double center = best.epsilon;
        const double half = (sweep == 0) ? center * 0.02 : center * 2e-4;
        const double a = std::max(lo, center - half);
        const double b = std::min(hi, center + half);
        for (int i = 0; i <= 400; ++i)
            consider(a + (b - a) * static_cast<double>(i) / 400.0);
    }
    return best;
}

struct DecayFit {
    double C = 0.0;
    double sigma = 0.0;
    double r2 = 0.0;
};

inline const std::vector<double>& series_column(const TimeSeries& ts, const std::string& name) {
    if (name == "y") return ts.y;
    if (name == "chi") return ts.chi;
    if (name == "v") return ts.v;
    if (name == "k_hat") return ts.k_hat;
    if (name == "V") return ts.V;
    if (name == "W") return ts.W;
    if (name == "eta_l2") return ts.eta_l2;
    throw validation_error("series_column: unknown column '" + name + "'");
}

// Least-squares fit of log(value) = log(C) - sigma t over the trailing
// window_fraction of the recorded span. Requires at least 10 samples and
// strictly positive values inside the window.
inline DecayFit decay_rate_fit(const TimeSeries& ts, const std::string& column,
                               double window_fraction = 0.5) {
    if (!(window_fraction > 0.0) || !(window_fraction <= 1.0))
        throw validation_error("decay_rate_fit: window fraction must lie in (0, 1]");
    const std::vector<double>& col = series_column(ts, column);
    if (ts.size() < 2) throw validation_error("decay_rate_fit: series too short");
    const double t0 = ts.t.front(), t1 = ts.t.back();
    const double t_start = t1 - window_fraction * (t1 - t0);
    std::vector<double> xs, ys;
    for (size_t i = 0; i < ts.size(); ++i) {
        if (ts.t[i] < t_start) continue;
        if (!(col[i] > 0.0))
            throw validation_error("decay_rate_fit: nonpositive value in fit window");
        xs.push_back(ts.t[i]);
        ys.push_back(std::log(col[i]));
    }
    if (xs.size() < 10) throw validation_error("decay_rate_fit: fewer than 10 samples in window");
    const double n = static_cast<double>(xs.size());
    double sx = 0, sy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
    }
    const double mx = sx / n, my = sy / n;
    double sxx = 0, sxy = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    if (sxx <= 0.0) throw validation_error("decay_rate_fit: degenerate time window");
    const double slope = sxy / sxx;
    const double intercept = my - slope * mx;
    double ssr = 0, sst = 0;
    for (size_t i = 0; i < xs.size(); ++i) {
        const double r = ys[i] - (intercept + slope * xs[i]);
        ssr += r * r;
        sst += (ys[i] - my) * (ys[i] - my);
    }
    DecayFit fit;
    fit.C = std::exp(intercept);
    fit.sigma = -slope;
    fit.r2 = (sst <= 1e-30) ? 1.0 : 1.0 - ssr / sst;
    return fit;
}

// Largest real part of the spectrum of a general real matrix.
inline double max_real_eigenvalue(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
    return es.eigenvalues().real().maxCoeff();
}

} // namespace rdid
