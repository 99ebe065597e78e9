#pragma once

#include "stormfx/dates.hpp"

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace stormfx {

inline constexpr double kGaleForceMps = 17.4;
inline constexpr double kEarthRadiusMiles = 3958.8;
inline constexpr int kWindowDays = 14;
inline constexpr int kPanelColumns = 10;
/// Day offsets (relative to first approach) covered by the final, treated window.
inline constexpr int kTreatedWindowStart = -2;
inline constexpr int kTreatedWindowEnd = 11;

struct LatLon {
    double lat = 0.0;
    double lon = 0.0;
};

struct CountyRecord {
    std::string county_id;
    LatLon centroid;
    long long population = 0;
    std::map<Date, long long> daily_counts;
};

struct ExposureRecord {
    std::string storm_id;
    std::string county_id;
    double vmax_sust = 0.0;
    double sust_dur = 0.0;
    std::optional<double> precip;
    Date closest_approach;
    int exposure_count = 0;
};

/// Per-storm count panel. Rows are units, columns are two-week windows.
/// Treatment is absorbing: D(i, t) = 1 exactly when i is treated and t >= T0.
struct OutcomePanel {
    std::string storm_id;
    std::vector<std::string> unit_ids;
    Eigen::MatrixXd counts;   // N x T, non-negative integers
    Eigen::MatrixXd offsets;  // N x T, positive populations
    Eigen::MatrixXi treated_mask;
    int first_treated_col = 0;  // zero-based column index of T0
    std::vector<int> treated_units;

    int units() const { return static_cast<int>(counts.rows()); }
    int periods() const { return static_cast<int>(counts.cols()); }
    bool is_treated(int i, int t) const { return treated_mask(i, t) != 0; }
    int control_units() const { return units() - static_cast<int>(treated_units.size()); }
};

/// Builds the absorbing treatment mask and treated-unit list for a panel.
void set_treatment(OutcomePanel& panel, const std::vector<int>& treated_units,
                   int first_treated_col);

/// Throws InvalidInput when any OutcomePanel invariant is violated.
void validate_panel(const OutcomePanel& panel);

bool classify_treated(double vmax_sust, double threshold = kGaleForceMps);

/// Haversine distance between centroids.
double great_circle_miles(const LatLon& a, const LatLon& b);

struct CountyLocation {
    std::string county_id;
    LatLon centroid;
};

/// Candidates within `radius_miles` (inclusive) of at least one treated county,
/// returned sorted by county id.
std::vector<std::string> select_controls(const std::vector<CountyLocation>& treated,
                                         const std::vector<CountyLocation>& candidates,
                                         double radius_miles = 150.0);

struct InclusionThresholds {
    long long min_population = 100;  // exclude when population < this
    long long min_events = 5;        // exclude when any outcome total <= this
    int min_total = 20;              // exclude storm when N < this
    int min_controls = 5;            // exclude storm when controls < this
};

struct DraftUnit {
    std::string county_id;
    bool treated = false;
    long long population = 0;
    /// Study-window event totals keyed by outcome name.
    std::map<std::string, long long> event_totals;
};

struct DraftPanel {
    std::string storm_id;
    Date approach_date;
    std::vector<DraftUnit> units;
};

struct Exclusion {
    std::string storm_id;
    std::string county_id;  // empty for storm-level exclusions
    std::string rule;
};

struct InclusionResult {
    std::vector<DraftPanel> panels;
    std::vector<Exclusion> report;
};

InclusionResult apply_inclusion_criteria(const std::vector<DraftPanel>& drafts,
                                         const InclusionThresholds& thresholds = {});

/// Inclusive day-offset range covered by zero-based panel column `col`.
std::pair<int, int> window_offsets(int col, int columns = kPanelColumns);

/// Aggregates daily counts into 14-day windows ending at offset +11.
/// Rows follow `unit_ids`; rows listed in `treated_ids` are treated from the
/// final column on. Throws DataGap when a county lacks a day in the window.
OutcomePanel build_outcome_panel(const std::map<std::string, CountyRecord>& records,
                                 const std::vector<std::string>& unit_ids,
                                 const std::vector<std::string>& treated_ids,
                                 const std::string& storm_id, Date approach_date);

/// County records per outcome name (outcome -> county id -> record).
using OutcomeRecords = std::map<std::string, std::map<std::string, CountyRecord>>;

struct PanelBuildOptions {
    double wind_threshold = kGaleForceMps;
    double control_radius_miles = 150.0;
    InclusionThresholds thresholds;
    /// Outcome whose panels are emitted; empty picks the first outcome.
    std::string outcome;
};

struct PanelBuildResult {
    std::vector<OutcomePanel> panels;
    std::vector<DraftPanel> drafts;  // analytic drafts, aligned with panels
    std::vector<Exclusion> report;
};

/// Whole ingestion flow: classify, pick controls, apply the inclusion rules
/// (event totals checked for every outcome present), aggregate one outcome.
PanelBuildResult build_panels(const OutcomeRecords& records,
                              const std::vector<ExposureRecord>& exposures,
                              const PanelBuildOptions& options = {});

} // namespace stormfx
