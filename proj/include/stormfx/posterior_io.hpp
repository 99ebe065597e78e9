#pragma once

#include "stormfx/fit_mc.hpp"

#include <filesystem>

namespace stormfx {

using CountMatrix = Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic>;

/// Counterfactual draws for the masked cells of one panel.
struct CounterfactualSet {
    std::string storm_id;
    std::vector<MaskedCell> cells;
    CountMatrix draws;  // cells x M
    std::vector<int> chain_of_draw;
};

CounterfactualSet counterfactual_set(const McPosterior& posterior);

/// Writes `<stem>_counterfactuals.csv` (draw,chain,unit_id,t,count; draw and t
/// 1-based), `<stem>_params.csv` (draw,chain,alpha,eta,log_density) and
/// `<stem>_diagnostics.json`.
void write_posterior(const std::filesystem::path& dir, const OutcomePanel& panel, const McPosterior& posterior);

/// Reads the counterfactual file written for `panel`.
CounterfactualSet read_counterfactuals(const std::filesystem::path& dir, const OutcomePanel& panel);

std::string diagnostics_json(const OutcomePanel& panel, const McPosterior& posterior);

} // namespace stormfx
