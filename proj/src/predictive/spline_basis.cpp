#include "stormfx/spline_basis.hpp"

#include "stormfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace stormfx {

void SplineSpec::validate() const {
    if (knots.size() < 3) {
        fail(ErrorKind::DegenerateKnots, "spline on " + variable + " needs at least 3 knots");
    }
    for (std::size_t j = 0; j < knots.size(); ++j) {
        if (!std::isfinite(knots[j])) fail(ErrorKind::DegenerateKnots, "non-finite knot for " + variable);
        if (j > 0 && !(knots[j] > knots[j - 1])) {
            fail(ErrorKind::DegenerateKnots, "knots for " + variable + " are not strictly increasing");
        }
    }
}

double sorted_quantile(const std::vector<double>& sorted, double p) {
    require(!sorted.empty(), "quantile of an empty sample");
    require(p >= 0.0 && p <= 1.0, "quantile probability outside [0, 1]");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * p;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

std::vector<double> knot_percentiles(int k) {
    switch (k) {
    case 3: return {0.10, 0.50, 0.90};
    case 4: return {0.05, 0.35, 0.65, 0.95};
    case 5: return {0.05, 0.275, 0.50, 0.725, 0.95};
    case 6: return {0.05, 0.23, 0.41, 0.59, 0.77, 0.95};
    case 7: return {0.025, 0.1833, 0.3417, 0.50, 0.6583, 0.8167, 0.975};
    default: fail(ErrorKind::InvalidInput, "knot count must be between 3 and 7");
    }
}

std::vector<double> quantile_knots(const std::vector<double>& x, int k) {
    const auto probs = knot_percentiles(k);
    std::vector<double> sorted = x;
    for (double v : sorted) require(std::isfinite(v), "non-finite value in knot sample");
    std::sort(sorted.begin(), sorted.end());
    const std::set<double> distinct(sorted.begin(), sorted.end());
    if (distinct.size() < static_cast<std::size_t>(k)) {
        fail(ErrorKind::DegenerateKnots, "sample has " + std::to_string(distinct.size()) +
                                             " distinct values, fewer than the " + std::to_string(k) +
                                             " knots requested");
    }
    std::vector<double> knots;
    for (double p : probs) knots.push_back(sorted_quantile(sorted, p));
    for (std::size_t j = 1; j < knots.size(); ++j) {
        if (!(knots[j] > knots[j - 1])) {
            fail(ErrorKind::DegenerateKnots, "ties collapse knots " + std::to_string(j) + " and " +
                                                 std::to_string(j + 1));
        }
    }
    return knots;
}

std::vector<double> rcs_basis(double x, const SplineSpec& spec) {
    spec.validate();
    const auto& t = spec.knots;
    const std::size_t k = t.size();
    const double tk = t[k - 1];
    const double tk1 = t[k - 2];
    const double scale = (tk - t[0]) * (tk - t[0]);
    auto cube = [](double v) { return v > 0.0 ? v * v * v : 0.0; };
    std::vector<double> out;
    out.reserve(k - 1);
    out.push_back(x);
    for (std::size_t j = 0; j + 2 < k; ++j) {
        const double term = cube(x - t[j]) - cube(x - tk1) * (tk - t[j]) / (tk - tk1) +
                            cube(x - tk) * (tk1 - t[j]) / (tk - tk1);
        out.push_back(term / scale);
    }
    return out;
}

} // namespace stormfx
