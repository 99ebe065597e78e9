#include "stormfx/predictive_model.hpp"

#include "stormfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace stormfx {

std::vector<int> fold_assignment(std::size_t rows, int folds, std::uint64_t seed) {
    require(folds >= 2, "need at least two folds");
    std::vector<std::size_t> order(rows);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(derive_seed(seed, "cv-folds"));
    // Fisher-Yates with an explicit index draw keeps the assignment identical
    // across standard libraries.
    for (std::size_t i = rows; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(rng() % i);
        std::swap(order[i - 1], order[j]);
    }
    std::vector<int> fold(rows);
    for (std::size_t pos = 0; pos < rows; ++pos) fold[order[pos]] = static_cast<int>(pos % static_cast<std::size_t>(folds));
    return fold;
}

std::vector<CvResult> cross_validate_folds(const std::vector<double>& y, const std::vector<PredictorRow>& rows,
                                           const std::vector<Variant>& variants, const std::vector<int>& fold,
                                           int folds) {
    require(y.size() == rows.size() && fold.size() == rows.size(), "response, rows and folds must align");
    require(folds >= 2, "need at least two folds");
    for (int f = 0; f < folds; ++f) {
        const auto size = std::count(fold.begin(), fold.end(), f);
        if (size < 2) {
            fail(ErrorKind::InvalidInput, "fold " + std::to_string(f + 1) + " has " + std::to_string(size) +
                                              " rows; every fold needs at least 2");
        }
    }
    std::vector<CvResult> out;
    for (const auto& variant : variants) {
        double sse = 0.0;
        for (int f = 0; f < folds; ++f) {
            std::vector<PredictorRow> train;
            std::vector<PredictorRow> test;
            std::vector<double> y_train;
            std::vector<double> y_test;
            for (std::size_t i = 0; i < rows.size(); ++i) {
                if (fold[i] == f) {
                    test.push_back(rows[i]);
                    y_test.push_back(y[i]);
                } else {
                    train.push_back(rows[i]);
                    y_train.push_back(y[i]);
                }
            }
            const Design design = build_design(train, variant);
            const LinearSolver solver(design.X, design.meta.columns);
            const Eigen::VectorXd beta =
                solver.least_squares(Eigen::Map<const Eigen::VectorXd>(y_train.data(), static_cast<Eigen::Index>(y_train.size())));
            const Eigen::VectorXd pred = apply_design(test, design.meta, true) * beta;
            for (std::size_t i = 0; i < y_test.size(); ++i) {
                const double e = y_test[i] - pred(static_cast<Eigen::Index>(i));
                sse += e * e;
            }
        }
        out.push_back({variant.name(), folds, rows.size(), std::sqrt(sse / static_cast<double>(rows.size()))});
    }
    return out;
}

std::vector<CvResult> cross_validate(const std::vector<double>& y, const std::vector<PredictorRow>& rows,
                                     const std::vector<Variant>& variants, int folds, std::uint64_t seed) {
    return cross_validate_folds(y, rows, variants, fold_assignment(rows.size(), folds, seed), folds);
}

} // namespace stormfx
