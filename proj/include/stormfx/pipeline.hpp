#pragma once

#include "stormfx/estimands.hpp"
#include "stormfx/factor_select.hpp"
#include "stormfx/fit_mc.hpp"
#include "stormfx/predictive_model.hpp"
#include "stormfx/run_config.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace stormfx {

using AdjacencyPairs = std::vector<std::pair<std::string, std::string>>;

/// county_a,county_b rows; pairs are symmetric.
AdjacencyPairs read_adjacency(const std::filesystem::path& path);

struct StudyData {
    std::vector<OutcomePanel> panels;
    std::vector<Exclusion> exclusions;
    std::vector<PredictorRow> predictors;  // empty when none supplied
    AdjacencyPairs adjacency;
};

/// Reads every input named by the config and builds the storm panels.
StudyData load_study(const RunConfig& config);

/// Per-storm sampler settings; the seed is derive_seed(master, storm_id).
McConfig storm_mc_config(const RunConfig& config, const std::string& storm_id, int factors, int chain_threads);

struct CausalStage {
    int factors = 0;
    std::vector<McPosterior> posteriors;             // panel order
    std::vector<CounterfactualSet> counterfactuals;  // panel order
    EffectDraws effects;

    std::vector<std::string> warnings() const;
};

/// Independent per-storm fits spread over `config.threads` workers, then
/// draw-aligned effects. Output does not depend on the worker count.
CausalStage run_causal_stage(const RunConfig& config, const std::vector<OutcomePanel>& panels, int factors);

/// Panel with the listed rows removed; treatment is carried over.
OutcomePanel drop_units(const OutcomePanel& panel, const std::vector<int>& rows);

/// Rows of control units adjacent to any treated unit of the panel.
std::vector<int> adjacent_controls(const OutcomePanel& panel, const AdjacencyPairs& adjacency);

/// Effect blocks restricted to the given storms, aggregates recomputed.
EffectDraws subset_effects(const EffectDraws& effects, const std::vector<std::string>& storm_ids);

struct RateComparison {
    std::string name;
    std::vector<std::string> storm_ids;
    std::vector<std::string> county_ids;
    std::vector<double> baseline;     // posterior-mean excess rates
    std::vector<double> alternative;
    double correlation = 1.0;
};

/// Pairs posterior-mean excess rates by (storm, county) present in both.
RateComparison compare_rates(const std::string& name, const EffectDraws& baseline, const EffectDraws& alternative);

struct SensitivityReport {
    std::vector<RateComparison> comparisons;
    std::optional<PredictiveFit> precip_fit;
    std::optional<PredictiveFit> precip_baseline_fit;  // same storms, no precipitation term
    std::vector<std::string> precip_storms;
    std::vector<std::string> warnings;
};

/// Causal reruns per toggle, compared against `baseline` (computed when
/// null). Exports land in `dir`.
SensitivityReport run_sensitivity(const RunConfig& config, const StudyData& data, const CausalStage* baseline,
                                  const std::filesystem::path& dir);

struct StageTiming {
    std::string stage;
    double seconds = 0.0;
};

struct StudyReport {
    std::vector<ScreeResult> screes;
    KRecommendation recommendation;
    CausalStage causal;
    std::optional<PredictiveFit> fit;
    std::vector<CvResult> cv;
    std::optional<SensitivityReport> sensitivity;
    std::vector<Exclusion> exclusions;
    std::vector<StageTiming> timings;
};

/// Scree, causal stage, estimands, predictive stage and sensitivity reruns,
/// exported under config.out_dir with report.json and manifests. The
/// predictive stage only reads the effect draws.
StudyReport run_full(const RunConfig& config, const StudyData& data);

/// Causal-stage part of a config, hashed into the causal manifests so they
/// do not change with predictive settings.
std::string causal_config_text(const RunConfig& config, int factors);

void write_exclusions(const std::filesystem::path& path, const std::vector<Exclusion>& exclusions);

} // namespace stormfx
