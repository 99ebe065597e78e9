#pragma once

#include <string>
#include <vector>

namespace stormfx {

/// Restricted cubic spline on one variable: the linear term plus k - 2
/// truncated-power terms, normalized by (t_k - t_1)^2.
struct SplineSpec {
    std::string variable;
    std::vector<double> knots;

    int columns() const { return static_cast<int>(knots.size()) - 1; }
    void validate() const;
};

/// Type-7 (linear interpolation) empirical quantile of an ascending sample.
double sorted_quantile(const std::vector<double>& sorted, double p);

/// Knot percentiles: 3 -> (10, 50, 90), 4 -> (5, 35, 65, 95),
/// 5 -> (5, 27.5, 50, 72.5, 95); 6 and 7 follow the same outer-trimmed table.
std::vector<double> knot_percentiles(int k);

std::vector<double> quantile_knots(const std::vector<double>& x, int k);

std::vector<double> rcs_basis(double x, const SplineSpec& spec);

} // namespace stormfx
