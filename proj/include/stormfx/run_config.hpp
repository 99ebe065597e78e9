#pragma once

#include "stormfx/design.hpp"
#include "stormfx/panel.hpp"
#include "stormfx/sampler.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace stormfx {

/// Settings for a whole study run, read from a `key = value` file. Blank
/// lines and text after `#` are ignored; relative paths resolve against the
/// directory holding the file. Keys are listed in README.md.
struct RunConfig {
    // Inputs: either raw records or a directory of prebuilt panels.
    std::filesystem::path counties;
    std::filesystem::path counts;
    std::filesystem::path exposures;
    std::filesystem::path panels_dir;
    std::filesystem::path predictors;
    std::filesystem::path adjacency;
    std::filesystem::path out_dir = "run";

    std::string outcome;
    std::optional<std::uint64_t> seed;

    int factors = 4;          // 0 with auto_factors: pick from the scree
    bool auto_factors = false;
    double variance_target = 0.70;
    int chains = 2;
    int warmup = -1;
    int draws = 1000;
    SamplerKind sampler = SamplerKind::Nuts;
    int max_depth = 10;
    double rhat_limit = 1.05;

    double wind_threshold = kGaleForceMps;
    double control_radius_miles = 150.0;
    InclusionThresholds thresholds;

    bool predictive = true;
    Variant variant;
    bool cross_validation = true;
    int cv_folds = 5;
    double level = 0.95;

    std::vector<int> sensitivity_factors;  // e.g. 3,5
    bool sensitivity_adjacency = false;
    bool sensitivity_precip = false;
    int precip_last_year = 2011;

    int threads = 0;  // 0: hardware concurrency

    /// Canonical text used for the manifest config hash.
    std::string source_text;

    std::uint64_t master_seed() const;
    void validate() const;
    bool has_sensitivity() const {
        return !sensitivity_factors.empty() || sensitivity_adjacency || sensitivity_precip;
    }
};

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir = {});
RunConfig read_run_config(const std::filesystem::path& path);

/// `key = value` text that parses back to the same settings.
std::string format_run_config(const RunConfig& config);

} // namespace stormfx
