#include "doctest.h"

#include "stormfx/error.hpp"
#include "stormfx/spline_basis.hpp"

#include <algorithm>
#include <cmath>
#include <random>

using namespace stormfx;

namespace {

double pos3(double v) { return v > 0 ? v * v * v : 0.0; }

/// Truncated-power form written out term by term.
double direct_term(double x, const std::vector<double>& t, std::size_t j) {
    const std::size_t k = t.size();
    const double tk = t[k - 1], tk1 = t[k - 2];
    const double v = pos3(x - t[j]) - pos3(x - tk1) * (tk - t[j]) / (tk - tk1) + pos3(x - tk) * (tk1 - t[j]) / (tk - tk1);
    return v / ((tk - t[0]) * (tk - t[0]));
}

} // namespace

TEST_CASE("quantile knots") {
    std::vector<double> grid;
    for (int v = 0; v <= 100; ++v) grid.push_back(v);
    std::shuffle(grid.begin(), grid.end(), std::mt19937(1));
    CHECK(quantile_knots(grid, 3) == std::vector<double>{10, 50, 90});
    CHECK(quantile_knots(grid, 4) == std::vector<double>{5, 35, 65, 95});
    const auto five = quantile_knots(grid, 5);
    const std::vector<double> expected{5, 27.5, 50, 72.5, 95};
    for (std::size_t j = 0; j < 5; ++j) CHECK(five[j] == doctest::Approx(expected[j]).epsilon(1e-12));
    CHECK(knot_percentiles(5) == std::vector<double>{0.05, 0.275, 0.50, 0.725, 0.95});
    CHECK_THROWS_AS(quantile_knots({1, 1, 2, 2, 1}, 3), Error);
    try {
        quantile_knots({1, 2, 1, 2}, 3);
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::DegenerateKnots);
    }
    CHECK(sorted_quantile({1, 2, 3, 4}, 0.5) == 2.5);
    CHECK(sorted_quantile({1, 2, 3, 4}, 0.0) == 1.0);
    CHECK(sorted_quantile({1, 2, 3, 4}, 1.0) == 4.0);
}

TEST_CASE("basis below the first knot") {
    const SplineSpec s{"x", {10, 20, 35, 60}};
    const auto b = rcs_basis(4.0, s);
    CHECK(b == std::vector<double>{4.0, 0.0, 0.0});
}

TEST_CASE("basis is linear beyond the last knot") {
    const SplineSpec s{"x", {10, 20, 35, 60}};
    const double tk = 60.0;
    for (int j = 0; j < s.columns(); ++j) {
        for (double x = tk + 1; x + 2 <= tk + 10; x += 0.5) {
            const double d2 = rcs_basis(x + 1, s)[j] - 2 * rcs_basis(x, s)[j] + rcs_basis(x - 1, s)[j];
            CHECK(std::abs(d2) < 1e-8);
        }
    }
}

TEST_CASE("basis matches the truncated-power formula") {
    const std::vector<double> knots{0, 1, 2, 3};
    const SplineSpec s{"x", knots};
    for (double x : {-1.0, 0.5, 1.5, 2.5, 3.0, 7.0}) {
        const auto b = rcs_basis(x, s);
        REQUIRE(b.size() == 3);
        CHECK(b[0] == x);
        CHECK(b[1] == doctest::Approx(direct_term(x, knots, 0)).epsilon(1e-14));
        CHECK(b[2] == doctest::Approx(direct_term(x, knots, 1)).epsilon(1e-14));
    }
    CHECK(rcs_basis(1.5, s)[1] == doctest::Approx(3.375 / 9.0));
    CHECK(rcs_basis(1.5, s)[2] == doctest::Approx(0.125 / 9.0));
}

TEST_CASE("first and second derivatives are continuous at the knots") {
    const std::vector<double> knots{17.5, 22.0, 31.0, 48.0, 66.0};
    const SplineSpec s{"x", knots};
    const double h = 1e-2;
    for (int j = 0; j < s.columns(); ++j) {
        auto f = [&](double x) { return rcs_basis(x, s)[static_cast<std::size_t>(j)]; };
        for (double t : knots) {
            const double l2 = (2 * f(t) - 5 * f(t - h) + 4 * f(t - 2 * h) - f(t - 3 * h)) / (h * h);
            const double r2 = (2 * f(t) - 5 * f(t + h) + 4 * f(t + 2 * h) - f(t + 3 * h)) / (h * h);
            CHECK(std::abs(l2 - r2) <= 1e-6 * std::max({std::abs(l2), std::abs(r2), 1e-2}));
            const double l1 = (3 * f(t) - 4 * f(t - h) + f(t - 2 * h)) / (2 * h);
            const double r1 = (-3 * f(t) + 4 * f(t + h) - f(t + 2 * h)) / (2 * h);
            CHECK(std::abs(l1 - r1) < 1e-5);
        }
    }
}

TEST_CASE("affine rescaling scales the basis") {
    const std::vector<double> knots{1, 4, 5, 9};
    const double a = 2.5, b = -3.0;
    std::vector<double> scaled;
    for (double t : knots) scaled.push_back(a * t + b);
    const SplineSpec s{"x", knots}, s2{"y", scaled};
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-2.0, 12.0);
    for (int rep = 0; rep < 50; ++rep) {
        const double x = u(rng);
        const auto p = rcs_basis(x, s), q = rcs_basis(a * x + b, s2);
        CHECK(q[0] == doctest::Approx(a * p[0] + b));
        for (std::size_t j = 1; j < p.size(); ++j) CHECK(q[j] == doctest::Approx(a * p[j]).epsilon(1e-10).scale(1.0));
    }
}

TEST_CASE("spline spec validation") {
    CHECK_THROWS_AS((SplineSpec{"x", {1, 2}}.validate()), Error);
    CHECK_THROWS_AS((SplineSpec{"x", {1, 3, 2}}.validate()), Error);
    CHECK_NOTHROW((SplineSpec{"x", {1, 2, 3}}.validate()));
}
