#pragma once

// Minimal static SVG charts: line plots for traces and curves, marker + error bar
// plots for sensitivity-vs-SNR tables. Output depends only on the input.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "awva/csv.hpp"

namespace awva {

enum class PlotKind { Line, ErrorBar };

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
    std::vector<double> yerr;  // ErrorBar only; empty means no bars
};

struct PlotLabels {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool shade_negative = false;  // grey band below y = 0 (loss of sensitivity)
};

namespace detail {

inline std::string fixed2(double v) {
    if (v == 0.0) v = 0.0;  // no "-0.00"
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed, 2);
    return std::string(buf, res.ptr);
}

inline std::string tick_label(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 3);
    return std::string(buf, res.ptr);
}

inline std::string xml_escape(std::string_view s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

inline constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#17becf"};

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();

    void add(double v) {
        if (!std::isfinite(v)) return;
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void finish(double pad) {
        if (!(lo <= hi)) lo = 0.0, hi = 1.0;
        if (hi == lo) {
            const double d = lo == 0.0 ? 1.0 : std::abs(lo) * 0.1;
            lo -= d;
            hi += d;
        }
        const double span = hi - lo;
        lo -= pad * span;
        hi += pad * span;
    }
};

}  // namespace detail

/// Renders the series into a standalone SVG document. Line series with more than
/// max_points samples are decimated by a fixed stride.
inline std::string render_svg_string(std::span<const Series> series, PlotKind kind, const PlotLabels& labels = {},
                                     std::size_t max_points = 4000) {
    if (series.empty()) throw ConfigError("render_svg: no series");
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty()) throw ShapeError("render_svg: series '" + s.name + "' has mismatched x/y");
        if (!s.yerr.empty() && s.yerr.size() != s.y.size()) throw ShapeError("render_svg: yerr length mismatch");
    }

    constexpr double W = 720, H = 450, L = 80, R = 170, T = 40, B = 60;
    const double pw = W - L - R, ph = H - T - B;

    detail::Range xr, yr;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            xr.add(s.x[i]);
            const double e = s.yerr.empty() ? 0.0 : std::abs(s.yerr[i]);
            yr.add(s.y[i] - e);
            yr.add(s.y[i] + e);
        }
    }
    xr.finish(kind == PlotKind::Line ? 0.0 : 0.05);
    yr.finish(0.05);
    auto px = [&](double x) { return L + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return T + (yr.hi - y) / (yr.hi - yr.lo) * ph; };
    using detail::fixed2;

    std::string o;
    o += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    o += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fixed2(W) + "\" height=\"" + fixed2(H) +
         "\" viewBox=\"0 0 " + fixed2(W) + " " + fixed2(H) + "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    o += "<rect x=\"0\" y=\"0\" width=\"" + fixed2(W) + "\" height=\"" + fixed2(H) + "\" fill=\"white\"/>\n";

    if (labels.shade_negative && yr.lo < 0.0) {
        const double top = std::clamp(py(0.0), T, T + ph);
        o += "<rect class=\"negative\" x=\"" + fixed2(L) + "\" y=\"" + fixed2(top) + "\" width=\"" + fixed2(pw) +
             "\" height=\"" + fixed2(T + ph - top) + "\" fill=\"#e6e6e6\"/>\n";
    }

    // axes and ticks
    o += "<g class=\"axes\" stroke=\"black\" stroke-width=\"1\">\n";
    o += "<line class=\"axis\" x1=\"" + fixed2(L) + "\" y1=\"" + fixed2(T + ph) + "\" x2=\"" + fixed2(L + pw) + "\" y2=\"" +
         fixed2(T + ph) + "\"/>\n";
    o += "<line class=\"axis\" x1=\"" + fixed2(L) + "\" y1=\"" + fixed2(T) + "\" x2=\"" + fixed2(L) + "\" y2=\"" +
         fixed2(T + ph) + "\"/>\n";
    o += "</g>\n<g class=\"ticks\" fill=\"black\">\n";
    constexpr int n_ticks = 5;
    for (int i = 0; i <= n_ticks; ++i) {
        const double fx = xr.lo + (xr.hi - xr.lo) * i / n_ticks;
        const double fy = yr.lo + (yr.hi - yr.lo) * i / n_ticks;
        o += "<text x=\"" + fixed2(px(fx)) + "\" y=\"" + fixed2(T + ph + 18) + "\" text-anchor=\"middle\">" +
             detail::tick_label(fx) + "</text>\n";
        o += "<text x=\"" + fixed2(L - 6) + "\" y=\"" + fixed2(py(fy) + 4) + "\" text-anchor=\"end\">" +
             detail::tick_label(fy) + "</text>\n";
    }
    o += "</g>\n";
    o += "<text class=\"title\" x=\"" + fixed2(L + pw / 2) + "\" y=\"" + fixed2(T - 14) +
         "\" text-anchor=\"middle\" font-size=\"14\">" + detail::xml_escape(labels.title) + "</text>\n";
    o += "<text class=\"xlabel\" x=\"" + fixed2(L + pw / 2) + "\" y=\"" + fixed2(H - 16) + "\" text-anchor=\"middle\">" +
         detail::xml_escape(labels.x_label) + "</text>\n";
    o += "<text class=\"ylabel\" x=\"18\" y=\"" + fixed2(T + ph / 2) + "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " +
         fixed2(T + ph / 2) + ")\">" + detail::xml_escape(labels.y_label) + "</text>\n";

    for (std::size_t si = 0; si < series.size(); ++si) {
        const Series& s = series[si];
        const char* color = detail::palette[si % std::size(detail::palette)];
        if (kind == PlotKind::Line) {
            const std::size_t stride = std::max<std::size_t>(1, (s.x.size() + max_points - 1) / max_points);
            o += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"1.5\" points=\"";
            bool first = true;
            auto point = [&](std::size_t i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) return;
                if (!first) o += ' ';
                o += fixed2(px(s.x[i])) + ',' + fixed2(py(s.y[i]));
                first = false;
            };
            for (std::size_t i = 0; i < s.x.size(); i += stride) point(i);
            if ((s.x.size() - 1) % stride != 0) point(s.x.size() - 1);
            o += "\"/>\n";
        } else {
            o += "<g class=\"series\" stroke=\"" + std::string(color) + "\" fill=\"" + color + "\">\n";
            for (std::size_t i = 0; i < s.x.size(); ++i) {
                const double cx = px(s.x[i]), cy = py(s.y[i]);
                o += "<circle cx=\"" + fixed2(cx) + "\" cy=\"" + fixed2(cy) + "\" r=\"3.5\"/>\n";
                if (s.yerr.empty()) continue;
                const double e = std::abs(s.yerr[i]);
                const double top = py(s.y[i] + e), bottom = py(s.y[i] - e);
                // vertical bar and cap
                o += "<line class=\"bar\" x1=\"" + fixed2(cx) + "\" y1=\"" + fixed2(top) + "\" x2=\"" + fixed2(cx) +
                     "\" y2=\"" + fixed2(bottom) + "\"/>\n";
                o += "<line class=\"cap\" x1=\"" + fixed2(cx - 4) + "\" y1=\"" + fixed2(top) + "\" x2=\"" + fixed2(cx + 4) +
                     "\" y2=\"" + fixed2(top) + "\"/>\n";
            }
            o += "</g>\n";
        }
        const double ly = T + 10 + 18.0 * static_cast<double>(si);
        o += "<g class=\"legend\">\n<rect x=\"" + fixed2(L + pw + 14) + "\" y=\"" + fixed2(ly - 8) +
             "\" width=\"12\" height=\"8\" fill=\"" + color + "\"/>\n<text x=\"" + fixed2(L + pw + 32) + "\" y=\"" +
             fixed2(ly) + "\">" + detail::xml_escape(s.name) + "</text>\n</g>\n";
    }
    o += "</svg>\n";
    return o;
}

inline void render_svg(std::span<const Series> series, PlotKind kind, const std::string& path,
                       const PlotLabels& labels = {}) {
    write_text_file(path, render_svg_string(series, kind, labels));
}

/// Trace as a line series on its own time axis.
inline Series trace_series(const Trace& t, std::string name) {
    Series s;
    s.name = std::move(name);
    s.x.resize(t.size());
    s.y.assign(t.values().begin(), t.values().end());
    for (std::size_t k = 0; k < t.size(); ++k) s.x[k] = t.time(k);
    return s;
}

}  // namespace awva
