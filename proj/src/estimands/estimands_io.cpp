#include "stormfx/estimands_io.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/svg.hpp"

#include "json.hpp"

#include <algorithm>
#include <map>

namespace stormfx {

namespace {

nlohmann::ordered_json summary_json(const PosteriorSummary& s) {
    return {{"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}};
}

std::vector<std::string> summary_fields(const PosteriorSummary& s) {
    return {format_double(s.mean), format_double(s.ci_low), format_double(s.ci_high)};
}

void append(std::vector<std::string>& row, const std::vector<std::string>& more) {
    row.insert(row.end(), more.begin(), more.end());
}

} // namespace

std::string study_summary_json(const EffectDraws& effects, double level) {
    nlohmann::ordered_json j;
    j["level"] = level;
    j["draws"] = effects.draw_count();
    j["storms"] = effects.storms.size();
    j["n_total"] = effects.units.size();
    j["TEE"] = summary_json(summarize(effects.tee, level));
    j["AER"] = summary_json(summarize(effects.aer, level));
    return j.dump(2) + "\n";
}

void write_effects(const std::filesystem::path& dir, const EffectDraws& effects, double level) {
    CsvTable draws({"storm_id", "county_id", "population", "draw", "iee", "excess_rate"});
    CsvTable county({"storm_id", "county_id", "population", "iee_mean", "iee_low", "iee_high", "rate_mean",
                     "rate_low", "rate_high"});
    svg::Chart beeswarm{"County excess rates", "storm", "excess rate per 100,000", {}, false, true};
    std::map<std::string, int> storm_pos;
    for (const auto& s : effects.storms) storm_pos.emplace(s.storm_id, static_cast<int>(storm_pos.size()) + 1);
    svg::Series counties{"posterior mean", {}, {}, true, false};
    for (std::size_t u = 0; u < effects.units.size(); ++u) {
        const auto& e = effects.units[u];
        const std::string pop = format_double(e.population);
        for (std::size_t m = 0; m < e.iee.size(); ++m) {
            draws.add_row({e.storm_id, e.county_id, pop, std::to_string(m + 1), std::to_string(e.iee[m]),
                           format_double(e.rate[m])});
        }
        const auto rate = summarize(e.rate, level);
        std::vector<std::string> row{e.storm_id, e.county_id, pop};
        append(row, summary_fields(summarize(e.iee, level)));
        append(row, summary_fields(rate));
        county.add_row(row);
        // Deterministic horizontal spread within each storm's column.
        const double jitter = 0.3 * (static_cast<double>((u * 7919) % 101) / 100.0 - 0.5);
        counties.x.push_back(storm_pos[e.storm_id] + jitter);
        counties.y.push_back(rate.mean);
    }
    beeswarm.series.push_back(counties);

    CsvTable storms({"storm_id", "treated_counties", "population", "events_mean", "events_low", "events_high",
                     "rate_mean", "rate_low", "rate_high"});
    svg::Chart storm_chart{"Storm excess events", "storm", "excess events", {}, false, true};
    svg::Series means{"posterior mean", {}, {}, true, false};
    svg::Series lows{"lower limit", {}, {}, true, true};
    svg::Series highs{"upper limit", {}, {}, true, true};
    for (const auto& s : effects.storms) {
        int treated = 0;
        for (const auto& u : effects.units) treated += u.storm_id == s.storm_id ? 1 : 0;
        std::vector<std::string> row{s.storm_id, std::to_string(treated), format_double(s.population)};
        const auto ev = summarize(s.events, level);
        append(row, summary_fields(ev));
        append(row, summary_fields(summarize(s.rate, level)));
        storms.add_row(row);
        const double x = storm_pos[s.storm_id];
        means.x.push_back(x);
        means.y.push_back(ev.mean);
        lows.x.push_back(x);
        lows.y.push_back(ev.ci_low);
        highs.x.push_back(x);
        highs.y.push_back(ev.ci_high);
    }
    storm_chart.series = {means, lows, highs};

    draws.write(dir / "effect_draws.csv");
    county.write(dir / "county_rates.csv");
    storms.write(dir / "storm_effects.csv");
    write_text(dir / "study_summary.json", study_summary_json(effects, level));
    write_text(dir / "county_rates.svg", svg::render(beeswarm));
    write_text(dir / "storm_effects.svg", svg::render(storm_chart));
}

EffectDraws read_effect_draws(const std::filesystem::path& path) {
    const CsvTable t = CsvTable::read(path);
    EffectDraws effects;
    std::map<std::pair<std::string, std::string>, std::size_t> index;
    std::vector<std::string> storm_order;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const std::pair<std::string, std::string> key{t.at(r, "storm_id"), t.at(r, "county_id")};
        auto it = index.find(key);
        if (it == index.end()) {
            it = index.emplace(key, effects.units.size()).first;
            UnitEffect u;
            u.storm_id = key.first;
            u.county_id = key.second;
            u.population = t.number(r, "population");
            effects.units.push_back(std::move(u));
            if (std::find(storm_order.begin(), storm_order.end(), key.first) == storm_order.end()) {
                storm_order.push_back(key.first);
            }
        }
        auto& u = effects.units[it->second];
        const long long m = t.integer(r, "draw");
        require(m == static_cast<long long>(u.iee.size()) + 1,
                path.string() + ": draws must be listed in order for each county (row " + std::to_string(r + 2) + ")");
        u.iee.push_back(t.integer(r, "iee"));
        u.rate.push_back(excess_rate(static_cast<double>(u.iee.back()), u.population));
    }
    require(!effects.units.empty(), path.string() + " holds no effect draws");
    for (const auto& s : storm_order) {
        std::vector<UnitEffect> units;
        for (const auto& u : effects.units) {
            if (u.storm_id == s) units.push_back(u);
        }
        effects.storms.push_back(storm_aggregates(s, units));
    }
    study_aggregates(effects);
    return effects;
}

} // namespace stormfx
