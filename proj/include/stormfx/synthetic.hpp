#pragma once

#include "stormfx/design.hpp"
#include "stormfx/mc_model.hpp"
#include "stormfx/panel.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

namespace stormfx {

struct TruthConfig {
    int units = 60;          // N per storm
    int periods = 10;        // T; the final column is treated
    int factors = 2;         // K_true
    int storms = 1;          // S
    int treated = 15;        // treated units per storm
    double alpha = -7.6;     // log rate per person per window
    double gamma_sd = 0.3;
    double psi_sd = 0.1;
    double factor_sd = 0.4;  // entries of U and V
    double eta = 50.0;
    double rho = 1.5;        // treated-cell rate ratio
    /// Log rate ratio slope per standardized windspeed; 0 leaves rho flat.
    double rho_wind_slope = 0.0;
    double population_min = 100000.0;
    double population_max = 400000.0;
    int first_year = 1999;
    int last_year = 2015;
    std::uint64_t seed = 1;

    void validate() const;
};

struct StormTruth {
    std::string storm_id;
    McParams params;
    Eigen::MatrixXd mu;            // N x T untreated means
    std::vector<int> treated_units;
    Eigen::MatrixXd y0;            // N x T; Y(0) everywhere
    Eigen::MatrixXd y1;            // N x T; Y(1) on treated cells, Y(0) elsewhere
    std::vector<double> rate_ratio;  // per treated unit
    std::vector<double> iee;       // per treated unit: sum over treated cells of Y(1) - Y(0)
    std::vector<double> excess_rate;
};

struct GroundTruth {
    std::vector<StormTruth> storms;
    double tee = 0.0;
    double aer = 0.0;
};

/// Raw records in the ingestion schemas.
struct SyntheticRecords {
    std::vector<CountyRecord> counties;
    std::vector<ExposureRecord> exposures;
};

struct SyntheticStudy {
    std::vector<OutcomePanel> panels;
    std::vector<PredictorRow> predictors;  // one per treated (storm, county), panel order
    GroundTruth truth;
    SyntheticRecords records;
};

/// Each storm owns a disjoint cluster of counties far from every other
/// cluster, so panel construction from the raw records reproduces `panels`.
/// Storm years are distinct until the year range is used up.
SyntheticStudy simulate_study(const TruthConfig& config);

/// Writes counties.csv, counts.csv, exposures.csv, predictors.csv and
/// truth.csv into `dir`.
void write_study(const SyntheticStudy& study, const std::filesystem::path& dir);

/// county_a,county_b pairs of counties whose centroids lie within `miles`.
std::vector<std::pair<std::string, std::string>> proximity_adjacency(const std::vector<CountyRecord>& counties,
                                                                     double miles = 8.0);

struct GridPosterior {
    double alpha_mean = 0.0;
    double log_eta_mean = 0.0;
    double eta_mean = 0.0;
    Eigen::MatrixXd mu_mean;  // N x T posterior mean of exp(log mean), every cell
    double boundary_mass = 0.0;
    int grid_points = 0;
    Eigen::Vector2d alpha_range;
    Eigen::Vector2d log_eta_range;
};

struct GridOptions {
    int resolution = 241;         // points per axis
    double boundary_tol = 1e-6;
    int max_widenings = 8;
};

/// Brute-force posterior of the intercept-and-dispersion model (no unit,
/// time or factor terms) on a 2-D grid in (alpha, log eta).
GridPosterior grid_posterior_k0(const OutcomePanel& panel, const PriorConfig& prior,
                                const GridOptions& options = {});

} // namespace stormfx
