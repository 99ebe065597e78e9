#pragma once

#include "stormfx/panel.hpp"

#include <filesystem>
#include <vector>

namespace stormfx {

/// counties.csv (county_id,lat,lon,population) joined with counts.csv
/// (county_id,date,count[,outcome]). Rows without an outcome column land
/// under outcome "events".
OutcomeRecords read_county_records(const std::filesystem::path& counties_csv,
                                   const std::filesystem::path& counts_csv);

/// exposures.csv (storm_id,county_id,vmax_sust,sust_dur,precip,closest_approach,
/// exposure_count); an empty precip field means absent.
std::vector<ExposureRecord> read_exposures(const std::filesystem::path& exposures_csv);

/// Writes `<storm>.csv` (unit_id,t,count,offset,treated; t is 1-based) and
/// `<storm>.json` (unit_ids, T0 (1-based), W (1-based rows), exclusions).
void write_panel(const std::filesystem::path& dir, const OutcomePanel& panel,
                 const std::vector<Exclusion>& exclusions = {});

OutcomePanel read_panel(const std::filesystem::path& csv_path);

/// All panels in a directory, ordered by storm id.
std::vector<OutcomePanel> read_panel_dir(const std::filesystem::path& dir);

/// File-system safe form of a storm id.
std::string storm_file_stem(const std::string& storm_id);

} // namespace stormfx
