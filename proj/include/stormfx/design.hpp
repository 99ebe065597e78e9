#pragma once

#include "stormfx/spline_basis.hpp"

#include <Eigen/Dense>
#include <optional>
#include <string>
#include <vector>

namespace stormfx {

inline constexpr double kHurricaneMps = 33.0;

/// Features of one exposure (storm, treated county).
struct PredictorRow {
    std::string storm_id;
    std::string county_id;
    double vmax_sust = 0.0;       // m/s
    double sust_dur = 0.0;        // minutes
    int year = 0;
    double exposure = 0.0;        // study-period exposure count
    double poverty = 0.0;         // fractions in [0, 1]
    double white_pct = 0.0;
    double owner_occupied = 0.0;
    double age_pct_65_plus = 0.0;
    double no_grad = 0.0;
    double median_age = 0.0;
    double population_density = 0.0;
    double median_house_value = 0.0;
    int cc1 = 0;                  // coastal indicator
    std::optional<std::string> state;
    std::optional<double> precip; // mm

    void validate() const;
};

/// The continuous predictors entered linearly in every variant.
const std::vector<std::string>& linear_predictor_names();

enum class WindForm { Linear, Spline };

struct Variant {
    WindForm wind = WindForm::Spline;
    bool state = false;
    bool stratified = false;  // interact every column with vmax_sust > 33
    bool precip = false;      // adds a 3-knot precipitation spline

    std::string name() const;
    static Variant parse(const std::string& name);
    bool operator==(const Variant&) const = default;
};

/// Linear and spline, each with and without state; linear and spline
/// hurricane-stratified.
std::vector<Variant> cv_variants();

/// Everything needed to rebuild a design matrix from raw rows.
struct DesignMetadata {
    Variant variant;
    std::vector<std::string> columns;      // final column order
    std::vector<SplineSpec> splines;
    std::vector<std::string> state_levels; // sorted; the first is the reference
    std::vector<double> centers;           // per final base column (0 when unscaled)
    std::vector<double> scales;            // per final base column (1 when unscaled)
    std::vector<std::string> base_columns; // columns before stratification
    std::vector<std::string> dropped;      // zero-variance columns removed
    std::vector<std::string> warnings;
};

struct Design {
    Eigen::MatrixXd X;
    DesignMetadata meta;
};

/// Learns knots, state levels and standardization from `rows`, then builds
/// the matrix.
Design build_design(const std::vector<PredictorRow>& rows, const Variant& variant);

DesignMetadata learn_design(const std::vector<PredictorRow>& rows, const Variant& variant);

/// Rebuilds the design for new rows under fixed metadata. Unseen state
/// levels raise an error unless `unseen_as_reference`.
Eigen::MatrixXd apply_design(const std::vector<PredictorRow>& rows, const DesignMetadata& meta,
                             bool unseen_as_reference = false);

} // namespace stormfx
