#include "stormfx/panel.hpp"

#include "stormfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>

namespace stormfx {

void set_treatment(OutcomePanel& panel, const std::vector<int>& treated_units,
                   int first_treated_col) {
    const int n = panel.units();
    const int t = panel.periods();
    require(first_treated_col >= 0 && first_treated_col < t, "T0 outside the panel columns");
    panel.first_treated_col = first_treated_col;
    panel.treated_units = treated_units;
    std::sort(panel.treated_units.begin(), panel.treated_units.end());
    panel.treated_mask = Eigen::MatrixXi::Zero(n, t);
    for (int i : panel.treated_units) {
        require(i >= 0 && i < n, "treated unit index out of range");
        panel.treated_mask.row(i).tail(t - first_treated_col).setOnes();
    }
}

void validate_panel(const OutcomePanel& panel) {
    const auto n = panel.counts.rows();
    const auto t = panel.counts.cols();
    require(n > 0 && t > 0, "panel " + panel.storm_id + " is empty");
    require(static_cast<Eigen::Index>(panel.unit_ids.size()) == n,
            "panel " + panel.storm_id + ": unit id count does not match rows");
    require(panel.offsets.rows() == n && panel.offsets.cols() == t,
            "panel " + panel.storm_id + ": offset matrix shape mismatch");
    require(panel.treated_mask.rows() == n && panel.treated_mask.cols() == t,
            "panel " + panel.storm_id + ": treatment mask shape mismatch");
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            const double y = panel.counts(i, j);
            require(std::isfinite(y) && y >= 0 && y == std::floor(y),
                    "panel " + panel.storm_id + ": counts must be non-negative integers");
            require(std::isfinite(panel.offsets(i, j)) && panel.offsets(i, j) > 0,
                    "panel " + panel.storm_id + ": offsets must be positive");
        }
    }
    std::vector<char> treated(static_cast<std::size_t>(n), 0);
    for (int i : panel.treated_units) {
        require(i >= 0 && i < n, "panel " + panel.storm_id + ": treated index out of range");
        treated[static_cast<std::size_t>(i)] = 1;
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < t; ++j) {
            const int expected = treated[static_cast<std::size_t>(i)] && j >= panel.first_treated_col;
            require(panel.treated_mask(i, j) == expected,
                    "panel " + panel.storm_id + ": treatment mask is not absorbing at T0");
        }
    }
}

bool classify_treated(double vmax_sust, double threshold) {
    require(std::isfinite(vmax_sust) && std::isfinite(threshold),
            "windspeed must be finite");
    require(vmax_sust >= 0, "windspeed must be non-negative");
    return vmax_sust >= threshold;
}

double great_circle_miles(const LatLon& a, const LatLon& b) {
    auto valid = [](const LatLon& p) {
        return std::isfinite(p.lat) && std::isfinite(p.lon) && std::abs(p.lat) <= 90.0 &&
               std::abs(p.lon) <= 180.0;
    };
    require(valid(a) && valid(b), "coordinates out of range");
    constexpr double deg = std::numbers::pi / 180.0;
    const double dlat = (b.lat - a.lat) * deg;
    const double dlon = (b.lon - a.lon) * deg;
    const double s = std::sin(dlat / 2);
    const double c = std::sin(dlon / 2);
    double h = s * s + std::cos(a.lat * deg) * std::cos(b.lat * deg) * c * c;
    h = std::clamp(h, 0.0, 1.0);
    return 2.0 * kEarthRadiusMiles * std::asin(std::sqrt(h));
}

std::vector<std::string> select_controls(const std::vector<CountyLocation>& treated,
                                         const std::vector<CountyLocation>& candidates,
                                         double radius_miles) {
    require(radius_miles > 0, "control radius must be positive");
    std::vector<std::string> kept;
    if (treated.empty()) return kept;
    for (const auto& c : candidates) {
        double nearest = INFINITY;
        for (const auto& t : treated) {
            nearest = std::min(nearest, great_circle_miles(c.centroid, t.centroid));
        }
        if (nearest <= radius_miles) kept.push_back(c.county_id);
    }
    std::sort(kept.begin(), kept.end());
    kept.erase(std::unique(kept.begin(), kept.end()), kept.end());
    return kept;
}

InclusionResult apply_inclusion_criteria(const std::vector<DraftPanel>& drafts,
                                         const InclusionThresholds& thresholds) {
    InclusionResult result;
    for (const auto& draft : drafts) {
        DraftPanel kept{draft.storm_id, draft.approach_date, {}};
        for (const auto& unit : draft.units) {
            if (unit.population < thresholds.min_population) {
                result.report.push_back({draft.storm_id, unit.county_id,
                                         "population < " +
                                             std::to_string(thresholds.min_population)});
                continue;
            }
            std::string sparse;
            for (const auto& [outcome, total] : unit.event_totals) {
                if (total <= thresholds.min_events) {
                    sparse = outcome;
                    break;
                }
            }
            if (!sparse.empty()) {
                result.report.push_back({draft.storm_id, unit.county_id,
                                         "events <= " + std::to_string(thresholds.min_events) +
                                             " (" + sparse + ")"});
                continue;
            }
            kept.units.push_back(unit);
        }
        const auto treated = std::count_if(kept.units.begin(), kept.units.end(),
                                           [](const DraftUnit& u) { return u.treated; });
        const auto total = static_cast<long>(kept.units.size());
        const auto controls = total - treated;
        if (treated == 0) {
            result.report.push_back({draft.storm_id, "", "no treated counties"});
        } else if (total < thresholds.min_total) {
            result.report.push_back(
                {draft.storm_id, "", "total counties < " + std::to_string(thresholds.min_total)});
        } else if (controls < thresholds.min_controls) {
            result.report.push_back({draft.storm_id, "",
                                     "control counties < " +
                                         std::to_string(thresholds.min_controls)});
        } else {
            result.panels.push_back(std::move(kept));
        }
    }
    return result;
}

std::pair<int, int> window_offsets(int col, int columns) {
    require(col >= 0 && col < columns, "window column out of range");
    const int shift = kWindowDays * (columns - 1 - col);
    return {kTreatedWindowStart - shift, kTreatedWindowEnd - shift};
}

namespace {

/// Sum of daily counts over [first, last] offsets; throws DataGap naming the
/// missing range.
long long window_total(const CountyRecord& record, Date approach, int first, int last) {
    long long total = 0;
    std::optional<int> gap_begin;
    std::optional<int> gap_end;
    for (int off = first; off <= last; ++off) {
        auto it = record.daily_counts.find(approach + off);
        if (it == record.daily_counts.end()) {
            if (!gap_begin) gap_begin = off;
            gap_end = off;
            continue;
        }
        total += it->second;
    }
    if (gap_begin) {
        fail(ErrorKind::DataGap, "county " + record.county_id + " has no counts for " +
                                     (approach + *gap_begin).to_string() + " .. " +
                                     (approach + *gap_end).to_string());
    }
    return total;
}

} // namespace

OutcomePanel build_outcome_panel(const std::map<std::string, CountyRecord>& records,
                                 const std::vector<std::string>& unit_ids,
                                 const std::vector<std::string>& treated_ids,
                                 const std::string& storm_id, Date approach_date) {
    const int n = static_cast<int>(unit_ids.size());
    OutcomePanel panel;
    panel.storm_id = storm_id;
    panel.unit_ids = unit_ids;
    panel.counts.resize(n, kPanelColumns);
    panel.offsets.resize(n, kPanelColumns);
    const std::set<std::string> treated(treated_ids.begin(), treated_ids.end());
    std::vector<int> treated_rows;
    for (int i = 0; i < n; ++i) {
        auto it = records.find(unit_ids[static_cast<std::size_t>(i)]);
        if (it == records.end()) {
            fail(ErrorKind::DataGap, "no count record for county " + unit_ids[static_cast<std::size_t>(i)]);
        }
        const CountyRecord& record = it->second;
        require(record.population > 0, "county " + record.county_id + " has non-positive population");
        for (int col = 0; col < kPanelColumns; ++col) {
            const auto [first, last] = window_offsets(col);
            panel.counts(i, col) = static_cast<double>(window_total(record, approach_date, first, last));
            panel.offsets(i, col) = static_cast<double>(record.population);
        }
        if (treated.contains(record.county_id)) treated_rows.push_back(i);
    }
    set_treatment(panel, treated_rows, kPanelColumns - 1);
    return panel;
}

PanelBuildResult build_panels(const OutcomeRecords& records,
                              const std::vector<ExposureRecord>& exposures,
                              const PanelBuildOptions& options) {
    require(!records.empty(), "no outcome count records supplied");
    const std::string outcome = options.outcome.empty() ? records.begin()->first : options.outcome;
    auto primary_it = records.find(outcome);
    require(primary_it != records.end(), "unknown outcome '" + outcome + "'");
    const auto& primary = primary_it->second;

    std::map<std::string, std::vector<const ExposureRecord*>> by_storm;
    for (const auto& e : exposures) by_storm[e.storm_id].push_back(&e);

    const auto [first_offset, unused_a] = window_offsets(0);
    const auto [unused_b, last_offset] = window_offsets(kPanelColumns - 1);

    std::vector<DraftPanel> drafts;
    for (const auto& [storm_id, list] : by_storm) {
        std::set<std::string> treated_ids;
        std::optional<Date> approach;
        for (const auto* e : list) {
            if (classify_treated(e->vmax_sust, options.wind_threshold)) {
                treated_ids.insert(e->county_id);
                if (!approach || e->closest_approach < *approach) approach = e->closest_approach;
            }
        }
        DraftPanel draft;
        draft.storm_id = storm_id;
        if (!approach) {
            drafts.push_back(std::move(draft));
            continue;
        }
        draft.approach_date = *approach;
        std::vector<CountyLocation> treated_locs;
        std::vector<CountyLocation> candidates;
        for (const auto& [id, rec] : primary) {
            (treated_ids.contains(id) ? treated_locs : candidates).push_back({id, rec.centroid});
        }
        std::vector<std::string> unit_ids;
        for (const auto& loc : treated_locs) unit_ids.push_back(loc.county_id);
        for (const auto& id : select_controls(treated_locs, candidates, options.control_radius_miles)) {
            unit_ids.push_back(id);
        }
        for (const auto& id : unit_ids) {
            DraftUnit unit;
            unit.county_id = id;
            unit.treated = treated_ids.contains(id);
            unit.population = primary.at(id).population;
            for (const auto& [name, table] : records) {
                auto rec = table.find(id);
                if (rec == table.end()) {
                    fail(ErrorKind::DataGap, "county " + id + " has no '" + name + "' counts");
                }
                unit.event_totals[name] = window_total(rec->second, *approach, first_offset, last_offset);
            }
            draft.units.push_back(std::move(unit));
        }
        drafts.push_back(std::move(draft));
    }

    auto included = apply_inclusion_criteria(drafts, options.thresholds);
    PanelBuildResult result;
    result.report = std::move(included.report);
    for (auto& draft : included.panels) {
        std::vector<std::string> unit_ids;
        std::vector<std::string> treated;
        for (const auto& u : draft.units) {
            unit_ids.push_back(u.county_id);
            if (u.treated) treated.push_back(u.county_id);
        }
        result.panels.push_back(
            build_outcome_panel(primary, unit_ids, treated, draft.storm_id, draft.approach_date));
        result.drafts.push_back(std::move(draft));
    }
    return result;
}

} // namespace stormfx
