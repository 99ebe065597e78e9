#pragma once

#include <string>
#include <vector>

namespace stormfx::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
    bool points = false;  // markers instead of a polyline
    bool dashed = false;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> series;
    bool identity_line = false;  // draw y = x across the data range
    bool zero_line = false;
};

/// Renders a static 640x420 chart. Non-finite points are skipped.
std::string render(const Chart& chart);

} // namespace stormfx::svg
