#pragma once

#include <fstream>
#include <string>

#include "rdid/control_loop.hpp"
#include "rdid/grid.hpp"
#include "rdid/text.hpp"

namespace rdid {

namespace detail {
inline std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot open output file: " + path);
    return out;
}
} // namespace detail

// Fixed eight-column trajectory file. When a run is cut short by a numerical
// alarm the rows recorded so far are flushed followed by an explicit
// truncation marker so downstream readers cannot mistake the file for a
// completed run.
inline void write_timeseries_csv(const std::string& path, const TimeSeries& ts,
                                 bool truncated = false, double alarm_time = 0.0) {
    std::ofstream out = detail::open_out(path);
    out << "t,y,chi,v,k_hat,V,W,eta_l2\n";
    for (size_t i = 0; i < ts.size(); ++i) {
        out << fmt17(ts.t[i]) << ',' << fmt17(ts.y[i]) << ',' << fmt17(ts.chi[i]) << ','
            << fmt17(ts.v[i]) << ',' << fmt17(ts.k_hat[i]) << ',' << fmt17(ts.V[i]) << ','
            << fmt17(ts.W[i]) << ',' << fmt17(ts.eta_l2[i]) << '\n';
    }
    if (truncated)
        out << "# truncated: numerical alarm at t = " << fmt17(alarm_time) << "\n";
    if (!out) throw io_error("write failed: " + path);
}

// Final profiles on the grid nodes.
inline void write_snapshot_csv(const std::string& path, const Grid& g, const Field& u,
                               const Field& u_hat, const Field& u_bar) {
    std::ofstream out = detail::open_out(path);
    out << "x,u,u_hat,u_bar\n";
    for (size_t i = 0; i < g.nodes.size(); ++i) {
        out << fmt17(g.nodes[i]) << ',' << fmt17(u[i]) << ',' << fmt17(u_hat[i]) << ','
            << fmt17(u_bar[i]) << '\n';
    }
    if (!out) throw io_error("write failed: " + path);
}

} // namespace rdid
