#pragma once

#include "stormfx/panel.hpp"
#include "stormfx/posterior_io.hpp"

#include <string>
#include <vector>

namespace stormfx {

inline constexpr double kRateScale = 100000.0;

/// Draws of individual excess events and excess rate for one treated unit.
struct UnitEffect {
    std::string storm_id;
    std::string county_id;
    double population = 0.0;        // p_iT
    std::vector<long long> iee;     // theta^(m)
    std::vector<double> rate;       // theta*^(m)
};

struct StormEffect {
    std::string storm_id;
    double population = 0.0;        // sum of treated p_iT
    std::vector<long long> events;
    std::vector<double> rate;
};

/// Draw-aligned effects for a whole study; index m pairs across every block.
struct EffectDraws {
    std::vector<UnitEffect> units;
    std::vector<StormEffect> storms;
    std::vector<long long> tee;
    std::vector<double> aer;

    int draw_count() const { return tee.empty() ? 0 : static_cast<int>(tee.size()); }
};

struct PosteriorSummary {
    double mean = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
};

/// theta_i^(m) = sum over treated periods of (Y_it - Y_it^(m)(0)).
std::vector<UnitEffect> iee_draws(const OutcomePanel& panel, const CounterfactualSet& counterfactuals);

double excess_rate(double theta, double population);

StormEffect storm_aggregates(const std::string& storm_id, const std::vector<UnitEffect>& units);

/// Fills tee and aer from the unit blocks.
void study_aggregates(EffectDraws& effects);

/// Unit effects, per-storm aggregates and study aggregates for every storm.
EffectDraws assemble_effects(const std::vector<OutcomePanel>& panels,
                             const std::vector<CounterfactualSet>& counterfactuals);

/// Mean and equal-tail type-7 quantiles at (1 - level) / 2 and (1 + level) / 2.
PosteriorSummary summarize(const std::vector<double>& draws, double level = 0.95);
PosteriorSummary summarize(const std::vector<long long>& draws, double level = 0.95);

/// Posterior-mean excess rate per treated unit, in `effects.units` order.
std::vector<double> point_estimates(const EffectDraws& effects);

} // namespace stormfx
