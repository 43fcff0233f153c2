#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "rdid/config.hpp"
#include "rdid/harness.hpp"
#include "rdid/steady_state.hpp"
#include "rdid/text.hpp"

namespace {

struct CommonFlags {
    std::string out_override;
    bool no_plots = false;
    bool quiet = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--out", f.out_override, "output directory (overrides the config)");
    cmd->add_flag("--no-plots", f.no_plots, "skip SVG plot emission");
    cmd->add_flag("--quiet", f.quiet, "suppress non-error output");
}

rdid::RunConfig load_with_override(const std::string& path, const CommonFlags& f) {
    rdid::RunConfig cfg = rdid::load_config(path);
    if (!f.out_override.empty()) cfg.out_dir = f.out_override;
    return cfg;
}

std::vector<double> parse_value_list(const std::string& raw) {
    std::vector<double> values;
    for (const std::string& part : rdid::split_on(raw, ',')) {
        for (const std::string& tok : rdid::split_ws(rdid::trim(part))) {
            size_t used = 0;
            double v = 0.0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                throw rdid::validation_error("cannot parse sweep value '" + tok + "'");
            }
            if (used != tok.size())
                throw rdid::validation_error("cannot parse sweep value '" + tok + "'");
            values.push_back(v);
        }
    }
    return values;
}

int cmd_simulate(const std::string& config_path, const CommonFlags& f) {
    const rdid::RunConfig cfg = load_with_override(config_path, f);
    const rdid::RunResult res = rdid::run_single(cfg);
    rdid::emit_outputs(res, cfg, !f.no_plots);
    if (res.alarmed) {
        std::cerr << "numerical alarm: " << res.alarm_what
                  << " (partial outputs in " << cfg.out_dir << ")\n";
        return 2;
    }
    if (!f.quiet) {
        std::cout << "run finished: t_end = " << rdid::fmt17(cfg.loop.t_end) << ", "
                  << res.series.size() << " samples\n";
        std::cout << "y(T) = " << rdid::fmt17(res.y_final)
                  << "  k_hat(T) = " << rdid::fmt17(res.k_hat_final)
                  << "  chi(T) = " << rdid::fmt17(res.chi_final) << "\n";
        std::cout << "certificate: epsilon = " << rdid::fmt17(res.cert.epsilon)
                  << ", max eig = " << rdid::fmt17(res.cert.psi_max_eig)
                  << ", min Q eig = " << rdid::fmt17(res.cert.q_min_eig)
                  << (res.cert.valid ? " (valid)" : " (INVALID)") << "\n";
        if (res.v_fit_ok)
            std::cout << "V decay fit: sigma = " << rdid::fmt17(res.v_fit.sigma)
                      << ", r2 = " << rdid::fmt17(res.v_fit.r2) << "\n";
        std::cout << "outputs in " << cfg.out_dir << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const std::string& axis,
              const std::string& values_raw, const CommonFlags& f) {
    const rdid::RunConfig cfg = load_with_override(config_path, f);
    const std::vector<double> values = parse_value_list(values_raw);
    const std::vector<rdid::SweepCell> cells = rdid::run_sweep(cfg, axis, values, !f.no_plots);
    if (!f.quiet) {
        for (const rdid::SweepCell& c : cells) {
            if (c.ok)
                std::cout << axis << " = " << rdid::fmt17(c.value)
                          << ": y(T) = " << rdid::fmt17(c.y_final)
                          << ", k_hat(T) = " << rdid::fmt17(c.k_hat_final) << "\n";
            else
                std::cout << axis << " = " << rdid::fmt17(c.value) << ": " << c.error << "\n";
        }
        std::cout << "summary in " << cfg.out_dir << "/sweep_summary.csv\n";
    }
    return 0;
}

int cmd_equilibrium(double lambda, double k, double y_r) {
    if (!(lambda > 0.0)) throw rdid::validation_error("lambda must be positive");
    if (!(k >= 0.0)) throw rdid::validation_error("k must be nonnegative");
    rdid::SystemParams p;
    p.lambda = lambda;
    p.y_r = y_r;
    const rdid::Grid g = rdid::Grid::uniform(101);
    const rdid::EquilibriumProfile eq = rdid::equilibrium(k, p, g);
    std::cout << "chi_bar = " << rdid::fmt17(eq.chi_bar) << "\n";
    for (int i : {0, 25, 50, 75, 100})
        std::cout << "u_bar(" << rdid::fmt17(g.nodes[static_cast<size_t>(i)])
                  << ") = " << rdid::fmt17(eq.u_bar[static_cast<size_t>(i)]) << "\n";
    return 0;
}

int cmd_invert_g(double lambda, double value) {
    const double k = rdid::g_lambda_inverse(value, lambda);
    std::cout << "k = " << rdid::fmt17(k) << "\n";
    std::cout << "g(k) = " << rdid::fmt17(rdid::g_lambda(k, lambda)) << "\n";
    return 0;
}

int cmd_certificate(const std::string& config_path) {
    const rdid::RunConfig cfg = rdid::load_config(config_path);
    const rdid::Certificate cert =
        cfg.epsilon ? rdid::evaluate_certificate(*cfg.epsilon, cfg.params, cfg.params.k_true)
                    : rdid::find_epsilon_star(cfg.params, cfg.params.k_true);
    std::cout << "epsilon = " << rdid::fmt17(cert.epsilon) << "\n";
    std::cout << "psi_max_eig = " << rdid::fmt17(cert.psi_max_eig) << "\n";
    std::cout << "q_min_eig = " << rdid::fmt17(cert.q_min_eig) << "\n";
    std::cout << "valid = " << (cert.valid ? "yes" : "no") << "\n";
    if (!cert.valid) {
        std::cerr << "numerical alarm: no valid decay certificate\n";
        return 2;
    }
    return 0;
}

int cmd_convergence(const std::string& config_path, const CommonFlags& f) {
    const rdid::RunConfig cfg = load_with_override(config_path, f);
    const rdid::ConvergenceStudy study = rdid::run_convergence(cfg);
    rdid::detail::ensure_dir(cfg.out_dir);
    const std::string path = cfg.out_dir + "/convergence.csv";
    {
        std::ofstream out(path);
        if (!out) throw rdid::io_error("cannot open output file: " + path);
        out << "n,h,dt,err\n";
        for (const rdid::ConvergenceRow& r : study.rows)
            out << r.n << ',' << rdid::fmt17(r.h) << ',' << rdid::fmt17(r.dt) << ','
                << rdid::fmt17(r.err) << '\n';
        if (!out) throw rdid::io_error("write failed: " + path);
    }
    if (!f.quiet) {
        for (const rdid::ConvergenceRow& r : study.rows)
            std::cout << "n = " << r.n << "  h = " << rdid::fmt17(r.h)
                      << "  dt = " << rdid::fmt17(r.dt) << "  err = " << rdid::fmt17(r.err)
                      << "\n";
        std::cout << "observed order = " << rdid::fmt17(study.order) << "\n";
        std::cout << "table in " << path << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"boundary-controlled reaction-diffusion loop: simulation, gain estimation, "
                 "decay certificates"};
    app.require_subcommand(1);

    std::string sim_config;
    CommonFlags sim_flags;
    CLI::App* sim = app.add_subcommand("simulate", "integrate one configured run");
    sim->add_option("config", sim_config, "config file")->required();
    add_common(sim, sim_flags);

    std::string sweep_config, sweep_axis, sweep_values;
    CommonFlags sweep_flags;
    CLI::App* swp = app.add_subcommand("sweep", "run one config across an axis of values");
    swp->add_option("config", sweep_config, "config file")->required();
    swp->add_option("--axis", sweep_axis, "scalar axis to vary")->required();
    swp->add_option("--values", sweep_values, "comma-separated values")->required();
    add_common(swp, sweep_flags);

    double eq_lambda = 0.0, eq_k = 0.0, eq_yr = 0.0;
    CommonFlags eq_flags;
    CLI::App* eq = app.add_subcommand("equilibrium", "closed-form equilibrium for given gains");
    eq->add_option("--lambda", eq_lambda, "diffusivity")->required();
    eq->add_option("--k", eq_k, "reaction coefficient")->required();
    eq->add_option("--yr", eq_yr, "output reference")->required();
    add_common(eq, eq_flags);

    double inv_lambda = 0.0, inv_value = 0.0;
    CommonFlags inv_flags;
    CLI::App* inv = app.add_subcommand("invert-g", "invert the static gain map");
    inv->add_option("--lambda", inv_lambda, "diffusivity")->required();
    inv->add_option("--value", inv_value, "gain value to invert")->required();
    add_common(inv, inv_flags);

    std::string cert_config;
    CommonFlags cert_flags;
    CLI::App* cert = app.add_subcommand("certificate", "search for a decay certificate");
    cert->add_option("config", cert_config, "config file")->required();
    add_common(cert, cert_flags);

    std::string conv_config;
    CommonFlags conv_flags;
    CLI::App* conv = app.add_subcommand("convergence", "grid refinement study");
    conv->add_option("config", conv_config, "config file")->required();
    add_common(conv, conv_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (sim->parsed()) return cmd_simulate(sim_config, sim_flags);
        if (swp->parsed()) return cmd_sweep(sweep_config, sweep_axis, sweep_values, sweep_flags);
        if (eq->parsed()) return cmd_equilibrium(eq_lambda, eq_k, eq_yr);
        if (inv->parsed()) return cmd_invert_g(inv_lambda, inv_value);
        if (cert->parsed()) return cmd_certificate(cert_config);
        if (conv->parsed()) return cmd_convergence(conv_config, conv_flags);
    } catch (const rdid::validation_error& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return 1;
    } catch (const rdid::numerical_alarm& e) {
        std::cerr << "numerical alarm: " << e.what() << "\n";
        return 2;
    } catch (const rdid::io_error& e) {
        std::cerr << "io error: " << e.what() << "\n";
        return 3;
    }
    return 1;
}
