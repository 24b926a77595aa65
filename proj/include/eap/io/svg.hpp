#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "eap/common.hpp"

namespace eap {

struct PlotSeries {
    std::string name;
    Vec xs, ys;
};

struct BarEntry {
    std::string label;
    double value = 0.0;
    double err = 0.0;  // symmetric error bar; 0 disables
};

namespace svgplot {

constexpr double kW = 640, kH = 400;
constexpr double kLeft = 62, kRight = 18, kTop = 34, kBottom = 44;

inline const char* color(std::size_t i) {
    static const char* kColors[] = {"#1f6fb4", "#d1622b", "#3a9440", "#b03a9c",
                                    "#8a7720", "#46878f", "#84584e", "#606060"};
    return kColors[i % (sizeof(kColors) / sizeof(kColors[0]))];
}

inline std::string fmt(double v) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%g", v);
    return std::string(buf);
}

// Round tick spacing to a 1/2/5 decade so axis labels stay readable.
inline double nice_step(double span, int target_ticks) {
    if (!(span > 0.0)) return 1.0;
    const double raw = span / std::max(1, target_ticks);
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    const double frac = raw / mag;
    if (frac <= 1.0) return mag;
    if (frac <= 2.0) return 2.0 * mag;
    if (frac <= 5.0) return 5.0 * mag;
    return 10.0 * mag;
}

struct Range {
    double lo = 0.0, hi = 1.0;
    double span() const { return hi - lo; }
};

inline Range pad_range(double lo, double hi) {
    if (!std::isfinite(lo) || !std::isfinite(hi)) return {0.0, 1.0};
    if (lo == hi) {
        const double pad = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
        return {lo - pad, hi + pad};
    }
    const double pad = (hi - lo) * 0.05;
    return {lo - pad, hi + pad};
}

inline void open_doc(std::ostringstream& o, const std::string& title) {
    o << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << kW << " " << kH
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o << "<rect width=\"" << kW << "\" height=\"" << kH << "\" fill=\"white\"/>\n";
    o << "<text x=\"" << kW / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">" << title
      << "</text>\n";
}

inline void axes(std::ostringstream& o, const Range& xr, const Range& yr,
                 const std::string& x_label, const std::string& y_label) {
    const double px0 = kLeft, px1 = kW - kRight, py0 = kH - kBottom, py1 = kTop;
    auto sx = [&](double x) { return px0 + (x - xr.lo) / xr.span() * (px1 - px0); };
    auto sy = [&](double y) { return py0 - (y - yr.lo) / yr.span() * (py0 - py1); };

    const double xstep = nice_step(xr.span(), 6);
    for (double t = std::ceil(xr.lo / xstep) * xstep; t <= xr.hi + 1e-9 * xstep; t += xstep) {
        const double px = sx(t);
        o << "<line x1=\"" << px << "\" y1=\"" << py0 << "\" x2=\"" << px << "\" y2=\"" << py1
          << "\" stroke=\"#eeeeee\"/>\n";
        o << "<text x=\"" << px << "\" y=\"" << py0 + 16 << "\" text-anchor=\"middle\">" << fmt(t)
          << "</text>\n";
    }
    const double ystep = nice_step(yr.span(), 5);
    for (double t = std::ceil(yr.lo / ystep) * ystep; t <= yr.hi + 1e-9 * ystep; t += ystep) {
        const double py = sy(t);
        o << "<line x1=\"" << px0 << "\" y1=\"" << py << "\" x2=\"" << px1 << "\" y2=\"" << py
          << "\" stroke=\"#eeeeee\"/>\n";
        o << "<text x=\"" << px0 - 6 << "\" y=\"" << py + 4 << "\" text-anchor=\"end\">" << fmt(t)
          << "</text>\n";
    }
    o << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px1 << "\" y2=\"" << py0
      << "\" stroke=\"black\"/>\n";
    o << "<line x1=\"" << px0 << "\" y1=\"" << py0 << "\" x2=\"" << px0 << "\" y2=\"" << py1
      << "\" stroke=\"black\"/>\n";
    o << "<text x=\"" << (px0 + px1) / 2 << "\" y=\"" << kH - 8 << "\" text-anchor=\"middle\">"
      << x_label << "</text>\n";
    o << "<text x=\"14\" y=\"" << (py0 + py1) / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << (py0 + py1) / 2 << ")\">" << y_label << "</text>\n";
}

}  // namespace svgplot

inline void write_line_plot(const std::string& path, const std::string& title,
                            const std::string& x_label, const std::string& y_label,
                            const std::vector<PlotSeries>& series) {
    using namespace svgplot;
    double xlo = 0, xhi = 1, ylo = 0, yhi = 1;
    bool any = false;
    for (const auto& s : series) {
        require(s.xs.size() == s.ys.size(), "plot series '" + s.name + "': x/y length mismatch");
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            if (!any) {
                xlo = xhi = s.xs[i];
                ylo = yhi = s.ys[i];
                any = true;
            }
            xlo = std::min(xlo, s.xs[i]);
            xhi = std::max(xhi, s.xs[i]);
            ylo = std::min(ylo, s.ys[i]);
            yhi = std::max(yhi, s.ys[i]);
        }
    }
    const Range xr = pad_range(xlo, xhi), yr = pad_range(ylo, yhi);

    std::ostringstream o;
    open_doc(o, title);
    axes(o, xr, yr, x_label, y_label);
    const double px0 = kLeft, px1 = kW - kRight, py0 = kH - kBottom, py1 = kTop;
    auto sx = [&](double x) { return px0 + (x - xr.lo) / xr.span() * (px1 - px0); };
    auto sy = [&](double y) { return py0 - (y - yr.lo) / yr.span() * (py0 - py1); };
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& s = series[k];
        o << "<polyline fill=\"none\" stroke=\"" << color(k) << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.xs.size(); ++i) {
            if (!std::isfinite(s.xs[i]) || !std::isfinite(s.ys[i])) continue;
            o << sx(s.xs[i]) << "," << sy(s.ys[i]) << " ";
        }
        o << "\"/>\n";
        const double ly = kTop + 14 * static_cast<double>(k);
        o << "<line x1=\"" << px1 - 110 << "\" y1=\"" << ly << "\" x2=\"" << px1 - 92 << "\" y2=\""
          << ly << "\" stroke=\"" << color(k) << "\" stroke-width=\"2\"/>\n";
        o << "<text x=\"" << px1 - 88 << "\" y=\"" << ly + 4 << "\">" << s.name << "</text>\n";
    }
    o << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write plot: " + path);
    out << o.str();
}

inline void write_bar_plot(const std::string& path, const std::string& title,
                           const std::string& y_label, const std::vector<BarEntry>& bars) {
    using namespace svgplot;
    require(!bars.empty(), "bar plot: no bars");
    double ylo = 0.0, yhi = 0.0;
    for (const auto& b : bars) {
        ylo = std::min(ylo, b.value - b.err);
        yhi = std::max(yhi, b.value + b.err);
    }
    const Range yr = pad_range(ylo, yhi);

    std::ostringstream o;
    open_doc(o, title);
    axes(o, {0.0, 1.0}, yr, "", y_label);
    const double px0 = kLeft, px1 = kW - kRight, py0 = kH - kBottom, py1 = kTop;
    auto sy = [&](double y) { return py0 - (y - yr.lo) / yr.span() * (py0 - py1); };
    const double slot = (px1 - px0) / static_cast<double>(bars.size());
    const double bw = slot * 0.6;
    for (std::size_t k = 0; k < bars.size(); ++k) {
        const auto& b = bars[k];
        const double cx = px0 + slot * (static_cast<double>(k) + 0.5);
        const double top = sy(std::max(b.value, 0.0));
        const double base = sy(std::min(b.value, 0.0));
        o << "<rect x=\"" << cx - bw / 2 << "\" y=\"" << top << "\" width=\"" << bw
          << "\" height=\"" << std::max(0.5, base - top) << "\" fill=\"" << color(k) << "\"/>\n";
        if (b.err > 0.0)
            o << "<line x1=\"" << cx << "\" y1=\"" << sy(b.value - b.err) << "\" x2=\"" << cx
              << "\" y2=\"" << sy(b.value + b.err) << "\" stroke=\"black\"/>\n";
        o << "<text x=\"" << cx << "\" y=\"" << py0 + 16 << "\" text-anchor=\"middle\">" << b.label
          << "</text>\n";
        o << "<text x=\"" << cx << "\" y=\"" << sy(std::max(b.value + b.err, 0.0)) - 5
          << "\" text-anchor=\"middle\">" << fmt(b.value) << "</text>\n";
    }
    o << "</svg>\n";

    std::ofstream out(path);
    if (!out) throw RuntimeFailure("cannot write plot: " + path);
    out << o.str();
}

}  // namespace eap
