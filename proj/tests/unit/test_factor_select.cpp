#include "doctest.h"

#include "stormfx/factor_select.hpp"

#include <filesystem>
#include <random>

using namespace stormfx;

namespace {

OutcomePanel from_counts(const Eigen::MatrixXd& c) {
    OutcomePanel p;
    p.storm_id = "F";
    p.counts = c;
    p.offsets = Eigen::MatrixXd::Ones(c.rows(), c.cols());
    for (Eigen::Index i = 0; i < c.rows(); ++i) p.unit_ids.push_back("u" + std::to_string(i));
    set_treatment(p, {0}, static_cast<int>(c.cols()) - 1);
    return p;
}

ScreeResult scree(std::vector<double> cumulative) {
    ScreeResult s;
    s.cumulative = cumulative;
    double prev = 0.0;
    for (double c : cumulative) {
        s.fractions.push_back(c - prev);
        prev = c;
    }
    return s;
}

} // namespace

TEST_CASE("rank one panel") {
    Eigen::VectorXd a = Eigen::VectorXd::LinSpaced(30, 1, 30);
    Eigen::RowVectorXd b(10);
    b << 1, 3, 2, 5, 4, 1, 2, 6, 3, 9;
    Eigen::MatrixXd c = a * b;
    c.rowwise() += Eigen::RowVectorXd::LinSpaced(10, 0, 90);
    const auto s = variance_explained(from_counts(c));
    CHECK(s.fractions.size() == 9);
    CHECK(s.fractions[0] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.recommended_k == 1);
}

TEST_CASE("rank two plus tiny noise") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd c(50, 10);
    for (int i = 0; i < 50; ++i) {
        const double a1 = 20 * z(rng), a2 = 20 * z(rng);
        for (int t = 0; t < 10; ++t) c(i, t) = 200 + a1 * std::sin(t) + a2 * std::cos(t) + 0.01 * z(rng);
    }
    CHECK(variance_explained(from_counts(c)).cumulative[1] >= 0.999);
}

TEST_CASE("iid noise spreads variance") {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd c(100, 10);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = 50 + 5 * z(rng);
    const auto s = variance_explained(from_counts(c));
    for (double f : s.fractions) CHECK(f < 0.3);
    CHECK(s.cumulative.back() == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("invariance to row order and column shifts") {
    std::mt19937_64 rng(4);
    std::poisson_distribution<int> pois(30);
    Eigen::MatrixXd c(40, 10);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = pois(rng);
    const auto base = variance_explained(from_counts(c));
    Eigen::MatrixXd permuted = c.colwise().reverse();
    permuted.col(3).array() += 17;
    const auto other = variance_explained(from_counts(permuted));
    for (std::size_t k = 0; k < base.fractions.size(); ++k) {
        CHECK(other.fractions[k] == doctest::Approx(base.fractions[k]).epsilon(1e-10));
    }
}

TEST_CASE("constant panel") {
    const auto s = variance_explained(from_counts(Eigen::MatrixXd::Constant(10, 10, 4.0)));
    for (double f : s.fractions) CHECK(f == 0.0);
    CHECK(s.recommended_k == 1);
}

TEST_CASE("recommend_k") {
    CHECK(recommend_k({scree({0.5, 0.72, 0.8, 0.9, 1.0})}, 0.7).k == 2);
    CHECK(recommend_k({scree({0.5, 0.72, 0.8, 0.9, 1.0})}, 0.0).k == 1);
    const auto two = recommend_k({scree({0.3, 0.45, 0.55, 0.63, 0.71, 0.8, 1.0}),
                                  scree({0.35, 0.5, 0.6, 0.74, 0.8, 0.9, 1.0})},
                                 0.70);
    CHECK(two.mean_cumulative[3] == doctest::Approx(0.685));
    CHECK(two.k == 5);
    CHECK(two.reached);
    const auto never = recommend_k({scree({0.2, 0.4, 0.6})}, 0.99);
    CHECK_FALSE(never.reached);
    CHECK(never.k == 3);
    CHECK_FALSE(never.warning.empty());
}

TEST_CASE("scree exports") {
    std::mt19937_64 rng(5);
    std::poisson_distribution<int> pois(30);
    Eigen::MatrixXd c(40, 10);
    for (Eigen::Index k = 0; k < c.size(); ++k) c.data()[k] = pois(rng);
    const auto s = variance_explained(from_counts(c));
    const auto dir = std::filesystem::temp_directory_path() / "stormfx_test_scree";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_scree(dir, {s}, recommend_k({s}));
    CHECK(std::filesystem::exists(dir / "scree.csv"));
    CHECK(std::filesystem::exists(dir / "scree.svg"));
}
