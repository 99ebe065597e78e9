#include "stormfx/panel_io.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>

namespace stormfx {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

OutcomeRecords read_county_records(const fs::path& counties_csv, const fs::path& counts_csv) {
    const auto counties = CsvTable::read(counties_csv);
    std::map<std::string, CountyRecord> base;
    for (std::size_t r = 0; r < counties.rows(); ++r) {
        CountyRecord rec;
        rec.county_id = counties.at(r, "county_id");
        rec.centroid = {counties.number(r, "lat"), counties.number(r, "lon")};
        rec.population = counties.integer(r, "population");
        require(rec.population > 0, "county " + rec.county_id + ": population must be positive");
        require(!base.contains(rec.county_id), "duplicate county " + rec.county_id);
        base.emplace(rec.county_id, std::move(rec));
    }

    const auto counts = CsvTable::read(counts_csv);
    const bool has_outcome = counts.has_column("outcome");
    OutcomeRecords out;
    for (std::size_t r = 0; r < counts.rows(); ++r) {
        const std::string outcome = has_outcome ? counts.at(r, "outcome") : "events";
        const auto& id = counts.at(r, "county_id");
        auto it = base.find(id);
        require(it != base.end(), counts_csv.string() + ": unknown county " + id);
        auto& table = out[outcome];
        auto rec = table.find(id);
        if (rec == table.end()) {
            CountyRecord fresh = it->second;
            rec = table.emplace(id, std::move(fresh)).first;
        }
        const long long count = counts.integer(r, "count");
        require(count >= 0, "negative count for county " + id);
        rec->second.daily_counts[Date::parse(counts.at(r, "date"))] += count;
    }
    // Counties without any count rows still exist as (empty) records so the
    // data-gap check can name them if they are selected.
    for (auto& [outcome, table] : out) {
        for (const auto& [id, rec] : base) table.try_emplace(id, rec);
    }
    return out;
}

std::vector<ExposureRecord> read_exposures(const fs::path& exposures_csv) {
    const auto table = CsvTable::read(exposures_csv);
    std::vector<ExposureRecord> out;
    for (std::size_t r = 0; r < table.rows(); ++r) {
        ExposureRecord e;
        e.storm_id = table.at(r, "storm_id");
        e.county_id = table.at(r, "county_id");
        e.vmax_sust = table.number(r, "vmax_sust");
        e.sust_dur = table.number(r, "sust_dur");
        e.precip = table.optional_number(r, "precip");
        e.closest_approach = Date::parse(table.at(r, "closest_approach"));
        e.exposure_count = static_cast<int>(table.integer(r, "exposure_count"));
        require(std::isfinite(e.vmax_sust) && e.vmax_sust >= 0,
                "exposure " + e.storm_id + "/" + e.county_id + ": invalid vmax_sust");
        require(e.sust_dur >= 0, "exposure " + e.storm_id + "/" + e.county_id + ": negative sust_dur");
        out.push_back(std::move(e));
    }
    return out;
}

std::string storm_file_stem(const std::string& storm_id) {
    std::string stem;
    for (char c : storm_id) {
        const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.';
        stem.push_back(ok ? c : '_');
    }
    return stem.empty() ? "storm" : stem;
}

void write_panel(const fs::path& dir, const OutcomePanel& panel,
                 const std::vector<Exclusion>& exclusions) {
    CsvTable csv({"unit_id", "t", "count", "offset", "treated"});
    for (int i = 0; i < panel.units(); ++i) {
        for (int t = 0; t < panel.periods(); ++t) {
            csv.add_row({panel.unit_ids[static_cast<std::size_t>(i)], std::to_string(t + 1),
                         format_double(panel.counts(i, t)), format_double(panel.offsets(i, t)),
                         std::to_string(panel.treated_mask(i, t))});
        }
    }
    const auto stem = storm_file_stem(panel.storm_id);
    csv.write(dir / (stem + ".csv"));

    ordered_json side;
    side["storm_id"] = panel.storm_id;
    side["unit_ids"] = panel.unit_ids;
    side["T"] = panel.periods();
    side["T0"] = panel.first_treated_col + 1;
    ordered_json w = ordered_json::array();
    for (int i : panel.treated_units) w.push_back(i + 1);
    side["W"] = w;
    ordered_json ex = ordered_json::array();
    for (const auto& e : exclusions) {
        if (e.storm_id != panel.storm_id) continue;
        ex.push_back({{"county_id", e.county_id}, {"rule", e.rule}});
    }
    side["exclusions"] = ex;
    write_text(dir / (stem + ".json"), side.dump(2) + "\n");
}

OutcomePanel read_panel(const fs::path& csv_path) {
    fs::path sidecar = csv_path;
    sidecar.replace_extension(".json");
    const auto side = ordered_json::parse(read_text(sidecar));
    OutcomePanel panel;
    panel.storm_id = side.at("storm_id").get<std::string>();
    panel.unit_ids = side.at("unit_ids").get<std::vector<std::string>>();
    const int n = static_cast<int>(panel.unit_ids.size());
    const int t_cols = side.at("T").get<int>();
    const int t0 = side.at("T0").get<int>() - 1;
    std::vector<int> treated;
    for (const auto& w : side.at("W")) treated.push_back(w.get<int>() - 1);

    std::map<std::string, int> row_of;
    for (int i = 0; i < n; ++i) row_of[panel.unit_ids[static_cast<std::size_t>(i)]] = i;

    const auto csv = CsvTable::read(csv_path);
    panel.counts = Eigen::MatrixXd::Constant(n, t_cols, std::nan(""));
    panel.offsets = Eigen::MatrixXd::Constant(n, t_cols, std::nan(""));
    for (std::size_t r = 0; r < csv.rows(); ++r) {
        auto it = row_of.find(csv.at(r, "unit_id"));
        require(it != row_of.end(), csv_path.string() + ": unit not in sidecar: " + csv.at(r, "unit_id"));
        const auto t = csv.integer(r, "t") - 1;
        require(t >= 0 && t < t_cols, csv_path.string() + ": column index out of range");
        panel.counts(it->second, t) = csv.number(r, "count");
        panel.offsets(it->second, t) = csv.number(r, "offset");
    }
    set_treatment(panel, treated, t0);
    validate_panel(panel);
    return panel;
}

std::vector<OutcomePanel> read_panel_dir(const fs::path& dir) {
    std::vector<fs::path> csvs;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.path().extension() != ".csv") continue;
        fs::path side = entry.path();
        side.replace_extension(".json");
        if (fs::exists(side)) csvs.push_back(entry.path());
    }
    std::sort(csvs.begin(), csvs.end());
    std::vector<OutcomePanel> panels;
    for (const auto& p : csvs) panels.push_back(read_panel(p));
    std::sort(panels.begin(), panels.end(),
              [](const OutcomePanel& a, const OutcomePanel& b) { return a.storm_id < b.storm_id; });
    return panels;
}

} // namespace stormfx
