#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rdid/analysis.hpp"
#include "rdid/control_loop.hpp"
#include "rdid/params.hpp"
#include "rdid/text.hpp"

namespace rdid {

// Full description of one run. Physics (lambda, k_true, gamma, rho, y_r) has
// no defaults and must appear in every config; numerics and the run mode
// default to the reference setup.
struct RunConfig {
    SystemParams params;
    int n = 201;
    LoopConfig loop;
    std::vector<double> u0_poly{0.0}; // coefficients, lowest degree first
    double chi0 = 0.0;
    bool observer = true;
    bool estimator = true;
    std::optional<double> epsilon; // override for the certificate search
    double theta = 0.1;
    unsigned long long seed = 0;
    double noise_y_std = 0.0;
    std::string out_dir = "out";

    bool operator==(const RunConfig& o) const {
        return params.lambda == o.params.lambda && params.k_true == o.params.k_true &&
               params.gamma == o.params.gamma && params.rho == o.params.rho &&
               params.y_r == o.params.y_r && params.alpha == o.params.alpha && n == o.n &&
               loop.dt == o.loop.dt && loop.t_end == o.loop.t_end &&
               loop.scheme == o.loop.scheme && loop.record_every == o.loop.record_every &&
               u0_poly == o.u0_poly && chi0 == o.chi0 && observer == o.observer &&
               estimator == o.estimator && epsilon == o.epsilon && theta == o.theta &&
               seed == o.seed && noise_y_std == o.noise_y_std && out_dir == o.out_dir;
    }
};

// Cross-field validation shared by the parser and by programmatic construction.
inline void validate(const RunConfig& c) {
    validate(c.params, /*estimation_run=*/c.estimator);
    if (c.n < 3) throw validation_error("grid.n must be at least 3");
    validate(c.loop);
    if (!(c.theta > 0.0)) throw validation_error("theta must be positive");
    if (c.epsilon) {
        const double bound = epsilon_bound(c.params);
        if (!(*c.epsilon > 0.0) || !(*c.epsilon < bound))
            throw validation_error("epsilon must lie in (0, sqrt(lambda/rho))");
    }
    if (!(c.noise_y_std >= 0.0)) throw validation_error("noise.y_std must be nonnegative");
    if (c.u0_poly.empty()) throw validation_error("u0.poly must have at least one coefficient");
    for (double v : c.u0_poly)
        if (!std::isfinite(v)) throw validation_error("u0.poly coefficients must be finite");
    if (c.out_dir.empty()) throw validation_error("output.dir must be nonempty");
}

namespace detail {

struct ConfigParser {
    std::string name;
    int line = 0;

    [[noreturn]] void fail(const std::string& msg) const {
        throw validation_error(name + " line " + std::to_string(line) + ": " + msg);
    }

    double number(const std::string& raw) const {
        try {
            size_t used = 0;
            const double v = std::stod(raw, &used);
            if (used != raw.size()) fail("trailing characters after number '" + raw + "'");
            return v;
        } catch (const validation_error&) {
            throw;
        } catch (const std::exception&) {
            fail("cannot parse number '" + raw + "'");
        }
    }

    int integer(const std::string& raw) const {
        const double v = number(raw);
        const int i = static_cast<int>(std::llround(v));
        if (static_cast<double>(i) != v) fail("expected an integer, got '" + raw + "'");
        return i;
    }

    unsigned long long uinteger(const std::string& raw) const {
        try {
            size_t used = 0;
            const unsigned long long v = std::stoull(raw, &used);
            if (used != raw.size()) fail("trailing characters after integer '" + raw + "'");
            return v;
        } catch (const validation_error&) {
            throw;
        } catch (const std::exception&) {
            fail("cannot parse integer '" + raw + "'");
        }
    }

    bool flag(const std::string& raw) const {
        if (raw == "on" || raw == "true") return true;
        if (raw == "off" || raw == "false") return false;
        fail("expected on/off/true/false, got '" + raw + "'");
    }
};

} // namespace detail

// Line-oriented `key = value` format; `#` starts a comment, blank lines are
// skipped, dotted keys group related settings. Unknown and duplicate keys are
// rejected by name with their line number.
inline RunConfig parse_config(std::istream& in, const std::string& name) {
    RunConfig cfg;
    detail::ConfigParser p{name, 0};
    std::map<std::string, int> seen;
    bool have_lambda = false, have_k = false, have_gamma = false, have_rho = false,
         have_yr = false;
    std::optional<std::string> preset;
    bool have_poly = false;

    std::string raw;
    while (std::getline(in, raw)) {
        ++p.line;
        std::string line = raw;
        const size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const size_t eq = line.find('=');
        if (eq == std::string::npos) p.fail("expected 'key = value'");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty()) p.fail("missing key before '='");
        if (val.empty()) p.fail("missing value for key '" + key + "'");
        auto [it, fresh] = seen.emplace(key, p.line);
        if (!fresh)
            p.fail("duplicate key '" + key + "' (first set on line " +
                   std::to_string(it->second) + ")");

        if (key == "lambda") { cfg.params.lambda = p.number(val); have_lambda = true; }
        else if (key == "k_true") { cfg.params.k_true = p.number(val); have_k = true; }
        else if (key == "gamma") { cfg.params.gamma = p.number(val); have_gamma = true; }
        else if (key == "rho") { cfg.params.rho = p.number(val); have_rho = true; }
        else if (key == "y_r") { cfg.params.y_r = p.number(val); have_yr = true; }
        else if (key == "alpha") { cfg.params.alpha = p.number(val); }
        else if (key == "grid.n") { cfg.n = p.integer(val); }
        else if (key == "loop.dt") { cfg.loop.dt = p.number(val); }
        else if (key == "loop.t_end") { cfg.loop.t_end = p.number(val); }
        else if (key == "loop.record_every") { cfg.loop.record_every = p.integer(val); }
        else if (key == "loop.scheme") {
            if (val == "implicit-euler") cfg.loop.scheme = Scheme::implicit_euler;
            else if (val == "crank-nicolson") cfg.loop.scheme = Scheme::crank_nicolson;
            else p.fail("unknown scheme '" + val + "' (implicit-euler or crank-nicolson)");
        }
        else if (key == "u0.poly") {
            cfg.u0_poly.clear();
            for (const std::string& tok : split_ws(val)) cfg.u0_poly.push_back(p.number(tok));
            if (cfg.u0_poly.empty()) p.fail("u0.poly needs at least one coefficient");
            have_poly = true;
        }
        else if (key == "u0.preset") { preset = val; }
        else if (key == "chi0") { cfg.chi0 = p.number(val); }
        else if (key == "observer") { cfg.observer = p.flag(val); }
        else if (key == "estimator") { cfg.estimator = p.flag(val); }
        else if (key == "epsilon") { cfg.epsilon = p.number(val); }
        else if (key == "theta") { cfg.theta = p.number(val); }
        else if (key == "seed") { cfg.seed = p.uinteger(val); }
        else if (key == "noise.y_std") { cfg.noise_y_std = p.number(val); }
        else if (key == "output.dir") { cfg.out_dir = val; }
        else p.fail("unknown key '" + key + "'");
    }

    if (preset) {
        if (have_poly)
            throw validation_error(name + ": u0.preset and u0.poly are mutually exclusive");
        if (*preset == "zero") cfg.u0_poly = {0.0};
        else throw validation_error(name + ": unknown u0.preset '" + *preset +
                                    "' (known: zero)");
    }

    std::vector<std::string> missing;
    if (!have_lambda) missing.push_back("lambda");
    if (!have_k) missing.push_back("k_true");
    if (!have_gamma) missing.push_back("gamma");
    if (!have_rho) missing.push_back("rho");
    if (!have_yr) missing.push_back("y_r");
    if (!missing.empty()) {
        std::string msg = name + ": missing required key(s):";
        for (const std::string& m : missing) msg += " " + m;
        throw validation_error(msg);
    }

    validate(cfg);
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    return parse_config(in, path);
}

// Canonical serialization; parse_config(serialize_config(c)) reproduces c.
inline std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    out << "lambda = " << fmt17(c.params.lambda) << "\n";
    out << "k_true = " << fmt17(c.params.k_true) << "\n";
    out << "gamma = " << fmt17(c.params.gamma) << "\n";
    out << "rho = " << fmt17(c.params.rho) << "\n";
    out << "y_r = " << fmt17(c.params.y_r) << "\n";
    out << "alpha = " << fmt17(c.params.alpha) << "\n";
    out << "grid.n = " << c.n << "\n";
    out << "loop.dt = " << fmt17(c.loop.dt) << "\n";
    out << "loop.t_end = " << fmt17(c.loop.t_end) << "\n";
    out << "loop.scheme = " << scheme_name(c.loop.scheme) << "\n";
    out << "loop.record_every = " << c.loop.record_every << "\n";
    out << "u0.poly =";
    for (double v : c.u0_poly) out << " " << fmt17(v);
    out << "\n";
    out << "chi0 = " << fmt17(c.chi0) << "\n";
    out << "observer = " << (c.observer ? "on" : "off") << "\n";
    out << "estimator = " << (c.estimator ? "on" : "off") << "\n";
    if (c.epsilon) out << "epsilon = " << fmt17(*c.epsilon) << "\n";
    out << "theta = " << fmt17(c.theta) << "\n";
    out << "seed = " << c.seed << "\n";
    out << "noise.y_std = " << fmt17(c.noise_y_std) << "\n";
    out << "output.dir = " << c.out_dir << "\n";
    return out.str();
}

// Initial field from the polynomial coefficients, evaluated by Horner.
inline Field initial_field(const RunConfig& c, const Grid& g) {
    Field u(g.nodes.size());
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        double acc = 0.0;
        for (size_t j = c.u0_poly.size(); j-- > 0;) acc = acc * g.nodes[i] + c.u0_poly[j];
        u[i] = acc;
    }
    return u;
}

} // namespace rdid
