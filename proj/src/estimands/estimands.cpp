#include "stormfx/estimands.hpp"

#include "stormfx/error.hpp"
#include "stormfx/spline_basis.hpp"

#include <algorithm>
#include <cmath>

namespace stormfx {

std::vector<UnitEffect> iee_draws(const OutcomePanel& panel, const CounterfactualSet& cf) {
    validate_panel(panel);
    const auto draws = cf.draws.cols();
    require(draws >= 1, "no counterfactual draws for " + panel.storm_id);
    require(static_cast<Eigen::Index>(cf.cells.size()) == cf.draws.rows(),
            "counterfactual cells and draw rows disagree for " + panel.storm_id);
    std::vector<UnitEffect> out;
    for (int i : panel.treated_units) {
        UnitEffect u;
        u.storm_id = panel.storm_id;
        u.county_id = panel.unit_ids[static_cast<std::size_t>(i)];
        u.population = panel.offsets(i, panel.periods() - 1);
        u.iee.assign(static_cast<std::size_t>(draws), 0);
        for (int t = panel.first_treated_col; t < panel.periods(); ++t) {
            const auto it = std::find_if(cf.cells.begin(), cf.cells.end(),
                                         [&](const MaskedCell& c) { return c.unit == i && c.period == t; });
            if (it == cf.cells.end()) {
                fail(ErrorKind::InvalidInput, "no counterfactual draws for unit " + u.county_id + ", period " +
                                                  std::to_string(t + 1) + " of " + panel.storm_id);
            }
            const auto row = static_cast<Eigen::Index>(it - cf.cells.begin());
            const auto observed = static_cast<long long>(std::llround(panel.counts(i, t)));
            for (Eigen::Index m = 0; m < draws; ++m) {
                u.iee[static_cast<std::size_t>(m)] += observed - cf.draws(row, m);
            }
        }
        u.rate.reserve(u.iee.size());
        for (long long theta : u.iee) u.rate.push_back(excess_rate(static_cast<double>(theta), u.population));
        out.push_back(std::move(u));
    }
    return out;
}

double excess_rate(double theta, double population) {
    require(std::isfinite(population) && population > 0, "population must be positive");
    return kRateScale * theta / population;
}

StormEffect storm_aggregates(const std::string& storm_id, const std::vector<UnitEffect>& units) {
    require(!units.empty(), "storm " + storm_id + " has no treated units");
    StormEffect s;
    s.storm_id = storm_id;
    const std::size_t draws = units.front().iee.size();
    s.events.assign(draws, 0);
    for (const auto& u : units) {
        require(u.iee.size() == draws, "draw counts differ across units of " + storm_id);
        s.population += u.population;
        for (std::size_t m = 0; m < draws; ++m) s.events[m] += u.iee[m];
    }
    for (long long e : s.events) s.rate.push_back(excess_rate(static_cast<double>(e), s.population));
    return s;
}

void study_aggregates(EffectDraws& effects) {
    require(!effects.units.empty(), "study has no treated units");
    const std::size_t draws = effects.units.front().iee.size();
    effects.tee.assign(draws, 0);
    effects.aer.assign(draws, 0.0);
    for (const auto& u : effects.units) {
        require(u.iee.size() == draws && u.rate.size() == draws, "draw counts differ across storms");
        for (std::size_t m = 0; m < draws; ++m) {
            effects.tee[m] += u.iee[m];
            effects.aer[m] += u.rate[m];
        }
    }
    const double n_total = static_cast<double>(effects.units.size());
    for (double& a : effects.aer) a /= n_total;
}

EffectDraws assemble_effects(const std::vector<OutcomePanel>& panels, const std::vector<CounterfactualSet>& cf) {
    require(panels.size() == cf.size(), "one counterfactual set is needed per panel");
    EffectDraws effects;
    for (std::size_t s = 0; s < panels.size(); ++s) {
        require(panels[s].storm_id == cf[s].storm_id, "panel and counterfactual storms are out of order");
        auto units = iee_draws(panels[s], cf[s]);
        if (!effects.units.empty()) {
            require(units.front().iee.size() == effects.units.front().iee.size(),
                    "storm " + panels[s].storm_id + " has a different number of draws");
        }
        effects.storms.push_back(storm_aggregates(panels[s].storm_id, units));
        for (auto& u : units) effects.units.push_back(std::move(u));
    }
    study_aggregates(effects);
    return effects;
}

PosteriorSummary summarize(const std::vector<double>& draws, double level) {
    require(!draws.empty(), "cannot summarize an empty draw set");
    require(level > 0 && level < 1, "credible level must be in (0, 1)");
    std::vector<double> sorted = draws;
    std::sort(sorted.begin(), sorted.end());
    PosteriorSummary s;
    s.level = level;
    // Deviations from the minimum, summed in sorted order: permutation
    // invariant, and exact for constant input.
    double dev = 0.0;
    for (double v : sorted) dev += v - sorted.front();
    s.mean = sorted.front() + dev / static_cast<double>(sorted.size());
    s.ci_low = sorted_quantile(sorted, (1.0 - level) / 2.0);
    s.ci_high = sorted_quantile(sorted, (1.0 + level) / 2.0);
    return s;
}

PosteriorSummary summarize(const std::vector<long long>& draws, double level) {
    return summarize(std::vector<double>(draws.begin(), draws.end()), level);
}

std::vector<double> point_estimates(const EffectDraws& effects) {
    std::vector<double> out;
    for (const auto& u : effects.units) {
        double sum = 0.0;
        for (double r : u.rate) sum += r;
        out.push_back(sum / static_cast<double>(u.rate.size()));
    }
    return out;
}

} // namespace stormfx
