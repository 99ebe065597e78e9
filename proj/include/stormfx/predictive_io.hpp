#pragma once

#include "stormfx/csv.hpp"
#include "stormfx/design.hpp"
#include "stormfx/predictive_model.hpp"

#include <filesystem>
#include <vector>

namespace stormfx {

/// predictors.csv: storm_id,county_id,vmax_sust,sust_dur,year,exposure,poverty,
/// white_pct,owner_occupied,age_pct_65_plus,no_grad,median_age,
/// population_density,median_house_value,cc1,state,precip. Empty state or
/// precip means absent.
std::vector<PredictorRow> read_predictors(const std::filesystem::path& path);
CsvTable predictors_table(const std::vector<PredictorRow>& rows);


/// Coefficient summary (column,mean,ci_low,ci_high) on the standardized design.
CsvTable coefficient_table(const PredictiveFit& fit, double level = 0.95);

/// storm_id,county_id,mean,ci_low,ci_high
CsvTable prediction_table(const std::vector<Prediction>& predictions);

/// outcome,variant,folds,rows,rmse
CsvTable cv_table(const std::string& outcome, const std::vector<CvResult>& results);

/// Self-contained JSON archive: design metadata and every draw.
std::string fit_archive_json(const PredictiveFit& fit);
void write_fit_archive(const std::filesystem::path& path, const PredictiveFit& fit);
PredictiveFit read_fit_archive(const std::filesystem::path& path);

/// A typical row: continuous predictors at their training means, cc1 = 0,
/// reference state; used for effect curves.
PredictorRow reference_row(const DesignMetadata& meta);

/// Fitted mean and credible band of the linear predictor over a windspeed
/// sweep (csv: vmax_sust,mean,ci_low,ci_high) plus an SVG of the curve.
void write_wind_curve(const std::filesystem::path& dir, const PredictiveFit& fit, double from = 17.0,
                      double to = 70.0, int points = 54, double level = 0.95);

} // namespace stormfx
