#pragma once

#include "stormfx/estimands.hpp"

#include <filesystem>

namespace stormfx {

/// effect_draws.csv (storm_id,county_id,population,draw,iee,excess_rate),
/// county_rates.csv, storm_effects.csv, study_summary.json and two SVG charts
/// (county excess rates by storm, storm excess events).
void write_effects(const std::filesystem::path& dir, const EffectDraws& effects, double level = 0.95);

/// Reads effect_draws.csv back; storm and study aggregates are recomputed.
EffectDraws read_effect_draws(const std::filesystem::path& path);

std::string study_summary_json(const EffectDraws& effects, double level = 0.95);

} // namespace stormfx
