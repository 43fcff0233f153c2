#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "rdid/errors.hpp"

namespace rdid {

// Minimal self-contained SVG line plots: one axes box, linear or log-y
// scaling, a few ticks, an optional horizontal reference line, legend in the
// top-right corner. No external tooling; byte-deterministic output.

struct PlotSeries {
    std::string label;
    std::string color;
    std::vector<double> x, y;
};

struct PlotOptions {
    std::string title, xlabel, ylabel;
    bool log_y = false;
    std::optional<double> hline;
    std::string hline_label;
};

namespace detail {

inline std::string svg_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

inline std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace detail

inline void write_line_plot(const std::string& path, const std::vector<PlotSeries>& series,
                            const PlotOptions& opt) {
    const double width = 720, height = 480;
    const double ml = 78, mr = 24, mt = 42, mb = 56;
    const double pw = width - ml - mr, ph = height - mt - mb;

    // data ranges; log-y skips nonpositive points
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto yval = [&](double y) { return opt.log_y ? std::log10(y) : y; };
    for (const PlotSeries& s : series) {
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (opt.log_y && !(s.y[i] > 0.0)) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, yval(s.y[i]));
            ymax = std::max(ymax, yval(s.y[i]));
        }
    }
    if (opt.hline && !opt.log_y) {
        ymin = std::min(ymin, *opt.hline);
        ymax = std::max(ymax, *opt.hline);
    }
    if (!std::isfinite(xmin) || !std::isfinite(ymin)) {
        xmin = 0; xmax = 1; ymin = 0; ymax = 1;
    }
    if (xmax <= xmin) xmax = xmin + 1.0;
    if (ymax <= ymin) ymax = ymin + 1.0;
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * pw; };
    auto py = [&](double y) { return mt + ph - (yval(y) - ymin) / (ymax - ymin) * ph; };

    std::ofstream out(path);
    if (!out) throw io_error("cannot open plot file: " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\""
        << height << "\" viewBox=\"0 0 " << width << " " << height << "\">\n";
    out << "<rect width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    out << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph
        << "\" fill=\"none\" stroke=\"#444\"/>\n";
    out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">"
        << opt.title << "</text>\n";
    out << "<text x=\"" << ml + pw / 2 << "\" y=\"" << height - 14
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">" << opt.xlabel
        << "</text>\n";
    out << "<text x=\"20\" y=\"" << mt + ph / 2
        << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" transform=\"rotate(-90 20 "
        << mt + ph / 2 << ")\">" << opt.ylabel << "</text>\n";

    const int nticks = 5;
    for (int i = 0; i <= nticks; ++i) {
        const double fx = xmin + (xmax - xmin) * i / nticks;
        const double gx = px(fx);
        out << "<line x1=\"" << detail::svg_num(gx) << "\" y1=\"" << mt + ph << "\" x2=\""
            << detail::svg_num(gx) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << detail::svg_num(gx) << "\" y=\"" << mt + ph + 20
            << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(fx) << "</text>\n";
        const double fy = ymin + (ymax - ymin) * i / nticks;
        const double gy = mt + ph - (fy - ymin) / (ymax - ymin) * ph;
        out << "<line x1=\"" << ml - 5 << "\" y1=\"" << detail::svg_num(gy) << "\" x2=\"" << ml
            << "\" y2=\"" << detail::svg_num(gy) << "\" stroke=\"#444\"/>\n";
        out << "<text x=\"" << ml - 8 << "\" y=\"" << detail::svg_num(gy + 4)
            << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">"
            << detail::tick_label(opt.log_y ? std::pow(10.0, fy) : fy) << "</text>\n";
    }

    if (opt.hline && (!opt.log_y || *opt.hline > 0.0)) {
        const double gy = py(*opt.hline);
        out << "<line x1=\"" << ml << "\" y1=\"" << detail::svg_num(gy) << "\" x2=\"" << ml + pw
            << "\" y2=\"" << detail::svg_num(gy)
            << "\" stroke=\"#999\" stroke-dasharray=\"6 4\"/>\n";
        if (!opt.hline_label.empty())
            out << "<text x=\"" << ml + 6 << "\" y=\"" << detail::svg_num(gy - 5)
                << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#666\">"
                << opt.hline_label << "</text>\n";
    }

    for (const PlotSeries& s : series) {
        out << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        bool first = true;
        for (size_t i = 0; i < s.x.size(); ++i) {
            if (opt.log_y && !(s.y[i] > 0.0)) continue;
            if (!first) out << ' ';
            out << detail::svg_num(px(s.x[i])) << ',' << detail::svg_num(py(s.y[i]));
            first = false;
        }
        out << "\"/>\n";
    }

    double ly = mt + 16;
    for (const PlotSeries& s : series) {
        out << "<line x1=\"" << ml + pw - 120 << "\" y1=\"" << detail::svg_num(ly - 4)
            << "\" x2=\"" << ml + pw - 96 << "\" y2=\"" << detail::svg_num(ly - 4)
            << "\" stroke=\"" << s.color << "\" stroke-width=\"2\"/>\n";
        out << "<text x=\"" << ml + pw - 90 << "\" y=\"" << detail::svg_num(ly)
            << "\" font-family=\"sans-serif\" font-size=\"12\">" << s.label << "</text>\n";
        ly += 18;
    }

    out << "</svg>\n";
    if (!out) throw io_error("write failed: " + path);
}

} // namespace rdid
