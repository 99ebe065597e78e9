#pragma once

#include "stormfx/panel.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace stormfx {

struct ScreeResult {
    std::string storm_id;
    std::vector<double> fractions;   // descending variance fractions
    std::vector<double> cumulative;
    int recommended_k = 1;           // for the target passed in (0.70 by default)
};

/// PCA by SVD of the column-centred N x (T - 1) count matrix (final column
/// removed). `standardize` also scales columns to unit variance.
ScreeResult variance_explained(const OutcomePanel& panel, bool standardize = false, double target = 0.70);

struct KRecommendation {
    int k = 1;
    std::vector<double> mean_cumulative;
    bool reached = true;
    std::string warning;
};

/// Smallest K whose mean cumulative fraction across storms reaches `target`.
KRecommendation recommend_k(const std::vector<ScreeResult>& screes, double target = 0.70);

/// scree.csv (storm_id,component,fraction,cumulative) and scree.svg.
void write_scree(const std::filesystem::path& dir, const std::vector<ScreeResult>& screes,
                 const KRecommendation& recommendation);

} // namespace stormfx
