#pragma once

#include <chrono>
#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "rdid/analysis.hpp"
#include "rdid/config.hpp"
#include "rdid/control_loop.hpp"
#include "rdid/csv.hpp"
#include "rdid/observer.hpp"
#include "rdid/steady_state.hpp"
#include "rdid/svg_plot.hpp"

namespace rdid {

struct RunResult {
    Grid grid;
    TimeSeries series;
    Field u_final, u_hat_final, u_bar; // u_bar: continuum equilibrium profile
    Certificate cert;
    DecayFit v_fit;
    bool v_fit_ok = false;
    double release_time = -1.0; // first sample with k_hat > 0; -1 if never
    double y_final = 0.0, chi_final = 0.0, k_hat_final = 0.0;
    bool alarmed = false;
    double alarm_time = 0.0;
    std::string alarm_what;
    double wall_ms = 0.0;
};

// Integrate one configured run. The V column is measured against the discrete
// closed-loop fixed point so that monotone decay is not masked by the O(h^2)
// offset between the discretized and continuum equilibria. A non-finite
// recorded sample stops the run and marks it alarmed; the partial series is
// still returned so callers can flush it with a truncation marker.
inline RunResult run_single(const RunConfig& cfg) {
    validate(cfg);
    const auto t_start = std::chrono::steady_clock::now();
    const SystemParams& p = cfg.params;
    RunResult res;
    res.grid = Grid::uniform(cfg.n);
    const Grid& g = res.grid;

    if (cfg.epsilon) {
        res.cert = evaluate_certificate(*cfg.epsilon, p, p.k_true);
    } else {
        res.cert = find_epsilon_star(p, p.k_true);
        if (!res.cert.valid)
            throw numerical_alarm("no epsilon certifies decay for these parameters");
    }
    const double eps = res.cert.epsilon;

    const auto [u_fix, chi_fix] = discrete_fixed_point(p, g);
    res.u_bar = equilibrium(p.k_true, p, g).u_bar;

    PlantState state{initial_field(cfg, g), cfg.chi0, 0.0};
    LoopStepper stepper(p, g, cfg.loop);

    ObserverState obs;
    obs.u_hat.assign(static_cast<size_t>(g.n), 0.0);
    obs.k_hat = cfg.estimator ? estimate_k(state.chi, p) : 0.0;

    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> noise(0.0, cfg.noise_y_std > 0.0 ? cfg.noise_y_std : 1.0);

    Field diff(static_cast<size_t>(g.n));
    auto record = [&](double t) -> bool {
        const double y = boundary_output(state);
        const double v = control_input(state, p);
        for (size_t i = 0; i < diff.size(); ++i) diff[i] = state.u[i] - u_fix[i];
        const double V = lyapunov_V(diff, state.chi - chi_fix, eps, p, g);
        double W = 0.0, eta = 0.0;
        if (cfg.observer) {
            const Field err = error_field(state, obs);
            W = lyapunov_W(err, g);
            eta = l2_norm(err, g);
        }
        const double row[8] = {t, y, state.chi, v, obs.k_hat, V, W, eta};
        for (double x : row) {
            if (!std::isfinite(x)) {
                res.alarmed = true;
                res.alarm_time = t;
                res.alarm_what = "non-finite sample at t = " + fmt17(t);
                return false;
            }
        }
        res.series.push(t, y, state.chi, v, obs.k_hat, V, W, eta);
        return true;
    };

    const long long steps =
        static_cast<long long>(std::ceil(cfg.loop.t_end / cfg.loop.dt - 1e-9));
    if (record(0.0)) {
        for (long long m = 1; m <= steps; ++m) {
            stepper.step(state);
            // reconstruct time from the step index: accumulating t += dt
            // drifts by ~1 ulp per step
            state.t = static_cast<double>(m) * cfg.loop.dt;
            if (cfg.estimator) obs.k_hat = estimate_k(state.chi, p);
            if (cfg.observer) {
                const double y_meas = boundary_output(state) +
                                      (cfg.noise_y_std > 0.0 ? noise(rng) : 0.0);
                obs = observer_step(obs, y_meas, control_input(state, p), p, cfg.loop);
                obs.t = state.t;
            }
            if (m % cfg.loop.record_every == 0 || m == steps) {
                if (!record(state.t)) break;
            }
        }
    }

    res.u_final = state.u;
    res.u_hat_final = cfg.observer ? obs.u_hat : Field(static_cast<size_t>(g.n), 0.0);
    if (res.series.size() > 0) {
        res.y_final = res.series.y.back();
        res.chi_final = res.series.chi.back();
        res.k_hat_final = res.series.k_hat.back();
        for (size_t i = 0; i < res.series.size(); ++i) {
            if (res.series.k_hat[i] > 0.0) {
                res.release_time = res.series.t[i];
                break;
            }
        }
    }
    if (!res.alarmed) {
        try {
            res.v_fit = decay_rate_fit(res.series, "V", 0.5);
            res.v_fit_ok = true;
        } catch (const validation_error&) {
            res.v_fit_ok = false;
        }
    }
    res.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                            t_start)
                      .count();
    return res;
}

namespace detail {
inline void ensure_dir(const std::string& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw io_error("cannot create output directory " + dir + ": " + ec.message());
}
} // namespace detail

// Write the CSV/meta/plot bundle for one finished (or alarmed) run.
inline void emit_outputs(const RunResult& res, const RunConfig& cfg, bool plots) {
    detail::ensure_dir(cfg.out_dir);
    const std::string base = cfg.out_dir + "/";
    write_timeseries_csv(base + "timeseries.csv", res.series, res.alarmed, res.alarm_time);
    write_snapshot_csv(base + "snapshot.csv", res.grid, res.u_final, res.u_hat_final, res.u_bar);

    {
        std::ofstream meta(base + "meta.txt");
        if (!meta) throw io_error("cannot open output file: " + base + "meta.txt");
        meta << "epsilon = " << fmt17(res.cert.epsilon) << "\n";
        meta << "psi_max_eig = " << fmt17(res.cert.psi_max_eig) << "\n";
        meta << "q_min_eig = " << fmt17(res.cert.q_min_eig) << "\n";
        meta << "certificate_valid = " << (res.cert.valid ? "yes" : "no") << "\n";
        meta << "y_final = " << fmt17(res.y_final) << "\n";
        meta << "chi_final = " << fmt17(res.chi_final) << "\n";
        meta << "k_hat_final = " << fmt17(res.k_hat_final) << "\n";
        meta << "release_time = " << fmt17(res.release_time) << "\n";
        if (res.v_fit_ok) {
            meta << "sigma_V = " << fmt17(res.v_fit.sigma) << "\n";
            meta << "r2_V = " << fmt17(res.v_fit.r2) << "\n";
        }
        meta << "alarmed = " << (res.alarmed ? "yes" : "no") << "\n";
        if (res.alarmed) meta << "alarm = " << res.alarm_what << "\n";
        meta << "wall_ms = " << fmt17(res.wall_ms) << "\n";
    }

    if (!plots) return;
    const TimeSeries& ts = res.series;
    {
        PlotOptions o{"boundary output", "t", "y", false, cfg.params.y_r, "reference"};
        write_line_plot(base + "y.svg", {{"y", "#1f77b4", ts.t, ts.y}}, o);
    }
    {
        PlotOptions o{"gain estimate", "t", "k_hat", false, cfg.params.k_true, "true gain"};
        write_line_plot(base + "k_hat.svg", {{"k_hat", "#d62728", ts.t, ts.k_hat}}, o);
    }
    {
        PlotOptions o{"final profiles", "x", "u", false, std::nullopt, ""};
        write_line_plot(base + "profiles.svg",
                        {{"u", "#1f77b4", res.grid.nodes, res.u_final},
                         {"u_hat", "#ff7f0e", res.grid.nodes, res.u_hat_final},
                         {"u_bar", "#2ca02c", res.grid.nodes, res.u_bar}},
                        o);
    }
    {
        std::vector<double> U(ts.size());
        for (size_t i = 0; i < ts.size(); ++i) U[i] = ts.V[i] + cfg.theta * ts.W[i];
        PlotOptions o{"decay functionals", "t", "value (log)", true, std::nullopt, ""};
        write_line_plot(base + "lyapunov.svg",
                        {{"V", "#1f77b4", ts.t, ts.V},
                         {"W", "#ff7f0e", ts.t, ts.W},
                         {"U", "#2ca02c", ts.t, U}},
                        o);
    }
}

struct SweepCell {
    double value = 0.0;
    bool ok = false;
    std::string error;
    double y_final = 0.0, k_hat_final = 0.0, sigma = 0.0, r2 = 0.0;
};

namespace detail {
inline void set_axis(RunConfig& cfg, const std::string& axis, double value) {
    if (axis == "lambda") cfg.params.lambda = value;
    else if (axis == "k_true") cfg.params.k_true = value;
    else if (axis == "gamma") cfg.params.gamma = value;
    else if (axis == "rho") cfg.params.rho = value;
    else if (axis == "y_r") cfg.params.y_r = value;
    else if (axis == "alpha") cfg.params.alpha = value;
    else if (axis == "chi0") cfg.chi0 = value;
    else if (axis == "theta") cfg.theta = value;
    else if (axis == "noise.y_std") cfg.noise_y_std = value;
    else if (axis == "loop.dt") cfg.loop.dt = value;
    else if (axis == "loop.t_end") cfg.loop.t_end = value;
    else if (axis == "grid.n") {
        const int n = static_cast<int>(std::llround(value));
        if (static_cast<double>(n) != value)
            throw validation_error("grid.n sweep values must be integers");
        cfg.n = n;
    } else {
        throw validation_error(
            "unknown sweep axis '" + axis +
            "' (known: lambda k_true gamma rho y_r alpha chi0 theta noise.y_std loop.dt "
            "loop.t_end grid.n)");
    }
}

inline std::string sanitize_csv(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}
} // namespace detail

// Run the base config once per value of one scalar axis. Per-cell failures
// (bad parameter combinations, alarmed runs) are recorded in the summary and
// do not abort the remaining cells. An empty value list is a successful
// no-op. Cell outputs land in <out>/<axis>=<value>/.
inline std::vector<SweepCell> run_sweep(const RunConfig& base, const std::string& axis,
                                        const std::vector<double>& values, bool plots) {
    {
        RunConfig probe = base;
        detail::set_axis(probe, axis, values.empty() ? 1.0 : values.front());
    }
    std::vector<SweepCell> cells;
    cells.reserve(values.size());
    for (double value : values) {
        SweepCell cell;
        cell.value = value;
        RunConfig cfg = base;
        try {
            detail::set_axis(cfg, axis, value);
            cfg.out_dir = base.out_dir + "/" + axis + "=" + fmt17(value);
            const RunResult res = run_single(cfg);
            emit_outputs(res, cfg, plots);
            if (res.alarmed) {
                cell.error = "numerical alarm: " + res.alarm_what;
            } else {
                cell.ok = true;
                cell.y_final = res.y_final;
                cell.k_hat_final = res.k_hat_final;
                if (res.v_fit_ok) {
                    cell.sigma = res.v_fit.sigma;
                    cell.r2 = res.v_fit.r2;
                }
            }
        } catch (const validation_error& e) {
            cell.error = std::string("validation error: ") + e.what();
        } catch (const numerical_alarm& e) {
            cell.error = std::string("numerical alarm: ") + e.what();
        } catch (const io_error& e) {
            cell.error = std::string("io error: ") + e.what();
        }
        cells.push_back(std::move(cell));
    }

    detail::ensure_dir(base.out_dir);
    std::ofstream out(base.out_dir + "/sweep_summary.csv");
    if (!out) throw io_error("cannot open output file: " + base.out_dir + "/sweep_summary.csv");
    out << "axis,value,status,y_final,k_hat_final,sigma_V,r2_V,message\n";
    for (const SweepCell& c : cells) {
        out << axis << ',' << fmt17(c.value) << ',' << (c.ok ? "ok" : "error") << ','
            << fmt17(c.y_final) << ',' << fmt17(c.k_hat_final) << ',' << fmt17(c.sigma) << ','
            << fmt17(c.r2) << ',' << detail::sanitize_csv(c.error) << '\n';
    }
    if (!out) throw io_error("write failed: " + base.out_dir + "/sweep_summary.csv");
    return cells;
}

struct ConvergenceRow {
    int n = 0;
    double h = 0.0, dt = 0.0, err = 0.0;
};

struct ConvergenceStudy {
    std::vector<ConvergenceRow> rows;
    double order = 0.0;
};

namespace detail {
inline Field integrate_plant(const RunConfig& cfg, int n, double t_end, double dt) {
    const Grid g = Grid::uniform(n);
    LoopConfig loop;
    loop.dt = dt;
    loop.t_end = t_end;
    loop.scheme = Scheme::implicit_euler;
    PlantState state{initial_field(cfg, g), cfg.chi0, 0.0};
    LoopStepper stepper(cfg.params, g, loop);
    const long long steps = static_cast<long long>(std::llround(t_end / dt));
    for (long long m = 0; m < steps; ++m) stepper.step(state);
    return state.u;
}
} // namespace detail

// Self-convergence of the closed-loop field under simultaneous grid and step
// refinement (dt tied to h^2, ratio 16) against a nested n = 401 reference at
// t = 2: the observed order of the spatial discretization. Physics and
// initial data come from the config; the estimator and observer do not feed
// back into the plant and are left out.
inline ConvergenceStudy run_convergence(const RunConfig& cfg) {
    validate(cfg);
    const double t_end = 2.0;
    const double ratio = 16.0;
    const int n_ref = 401;
    auto dt_for = [&](int n) {
        const double h = 1.0 / (n - 1);
        const long long steps =
            static_cast<long long>(std::ceil(t_end / (ratio * h * h) - 1e-9));
        return t_end / static_cast<double>(steps);
    };
    const Field u_ref = detail::integrate_plant(cfg, n_ref, t_end, dt_for(n_ref));

    ConvergenceStudy study;
    std::vector<double> log_h, log_e;
    for (int n : {26, 51, 101, 201}) {
        ConvergenceRow row;
        row.n = n;
        row.h = 1.0 / (n - 1);
        row.dt = dt_for(n);
        const Field u = detail::integrate_plant(cfg, n, t_end, row.dt);
        const Grid g = Grid::uniform(n);
        const int stride = (n_ref - 1) / (n - 1);
        Field diff(static_cast<size_t>(n));
        for (int i = 0; i < n; ++i)
            diff[static_cast<size_t>(i)] =
                u[static_cast<size_t>(i)] - u_ref[static_cast<size_t>(i * stride)];
        row.err = l2_norm(diff, g);
        study.rows.push_back(row);
        if (row.err > 0.0) {
            log_h.push_back(std::log(row.h));
            log_e.push_back(std::log(row.err));
        }
    }
    if (log_h.size() >= 2) {
        const double n = static_cast<double>(log_h.size());
        double sx = 0, sy = 0, sxx = 0, sxy = 0;
        for (size_t i = 0; i < log_h.size(); ++i) {
            sx += log_h[i];
            sy += log_e[i];
        }
        const double mx = sx / n, my = sy / n;
        for (size_t i = 0; i < log_h.size(); ++i) {
            sxx += (log_h[i] - mx) * (log_h[i] - mx);
            sxy += (log_h[i] - mx) * (log_e[i] - my);
        }
        study.order = sxy / sxx;
    }
    return study;
}

} // namespace rdid
