#include "stormfx/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace stormfx::svg {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 55;

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        case '"': out += "&quot;"; break;
        default: out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string render(const Chart& chart) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    for (const auto& s : chart.series) {
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    }
    if (!std::isfinite(xmin)) {
        xmin = ymin = 0;
        xmax = ymax = 1;
    }
    if (chart.identity_line) {
        xmin = ymin = std::min(xmin, ymin);
        xmax = ymax = std::max(xmax, ymax);
    }
    if (chart.zero_line) {
        ymin = std::min(ymin, 0.0);
        ymax = std::max(ymax, 0.0);
    }
    if (xmax - xmin < 1e-12) { xmin -= 0.5; xmax += 0.5; }
    if (ymax - ymin < 1e-12) { ymin -= 0.5; ymax += 0.5; }
    const double ypad = 0.05 * (ymax - ymin);
    ymin -= ypad;
    ymax += ypad;

    const double pw = kWidth - kLeft - kRight;
    const double ph = kHeight - kTop - kBottom;
    auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return kTop + (ymax - y) / (ymax - ymin) * ph; };

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">"
        << escape(chart.title) << "</text>\n";
    out << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\""
        << ph << "\" fill=\"none\" stroke=\"#444\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        out << "<text x=\"" << num(sx(xv)) << "\" y=\"" << num(kTop + ph + 16)
            << "\" text-anchor=\"middle\">" << tick_label(xv) << "</text>\n";
        out << "<text x=\"" << num(kLeft - 6) << "\" y=\"" << num(sy(yv) + 4)
            << "\" text-anchor=\"end\">" << tick_label(yv) << "</text>\n";
    }
    out << "<text x=\"" << num(kLeft + pw / 2) << "\" y=\"" << num(kHeight - 12)
        << "\" text-anchor=\"middle\">" << escape(chart.x_label) << "</text>\n";
    out << "<text transform=\"translate(16," << num(kTop + ph / 2)
        << ") rotate(-90)\" text-anchor=\"middle\">" << escape(chart.y_label) << "</text>\n";
    if (chart.zero_line) {
        out << "<line x1=\"" << num(kLeft) << "\" x2=\"" << num(kLeft + pw) << "\" y1=\""
            << num(sy(0)) << "\" y2=\"" << num(sy(0)) << "\" stroke=\"#999\"/>\n";
    }
    if (chart.identity_line) {
        out << "<line x1=\"" << num(sx(xmin)) << "\" y1=\"" << num(sy(xmin)) << "\" x2=\""
            << num(sx(xmax)) << "\" y2=\"" << num(sy(xmax))
            << "\" stroke=\"#999\" stroke-dasharray=\"4 3\"/>\n";
    }
    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* colour = kPalette[k % std::size(kPalette)];
        const std::size_t n = std::min(s.x.size(), s.y.size());
        if (s.points) {
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << "<circle cx=\"" << num(sx(s.x[i])) << "\" cy=\"" << num(sy(s.y[i]))
                    << "\" r=\"2.5\" fill=\"" << colour << "\" fill-opacity=\"0.7\"/>\n";
            }
        } else {
            out << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.6\"";
            if (s.dashed) out << " stroke-dasharray=\"5 3\"";
            out << " points=\"";
            for (std::size_t i = 0; i < n; ++i) {
                if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
                out << num(sx(s.x[i])) << "," << num(sy(s.y[i])) << " ";
            }
            out << "\"/>\n";
        }
        if (!s.label.empty()) {
            const double ly = kTop + 14 + 15.0 * static_cast<double>(k);
            out << "<rect x=\"" << num(kLeft + pw - 150) << "\" y=\"" << num(ly - 9)
                << "\" width=\"10\" height=\"10\" fill=\"" << colour << "\"/>\n";
            out << "<text x=\"" << num(kLeft + pw - 135) << "\" y=\"" << num(ly) << "\">"
                << escape(s.label) << "</text>\n";
        }
    }
    out << "</svg>\n";
    return out.str();
}

} // namespace stormfx::svg
