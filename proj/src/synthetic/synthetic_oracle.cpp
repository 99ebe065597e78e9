#include "stormfx/synthetic.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/negative_binomial.hpp"
#include "stormfx/predictive_io.hpp"
#include "stormfx/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace stormfx {

namespace {

constexpr const char* kStates[] = {"AL", "FL", "GA", "LA", "NC", "SC", "TX"};
constexpr double kTreatedWindMin = 18.0;
constexpr double kTreatedWindMax = 70.0;

std::string padded(const char* prefix, int value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%s%03d", prefix, value);
    return buf;
}

LatLon cluster_center(int storm) {
    // 13 x 35 grid of centres 10 degrees apart.
    const int row = storm % 13;
    const int col = storm / 13;
    require(col < 35, "too many synthetic storms");
    return {-60.0 + 10.0 * row, -170.0 + 10.0 * col};
}

} // namespace

void TruthConfig::validate() const {
    require(units >= 2 && periods >= 2, "synthetic panels need N >= 2 and T >= 2");
    require(periods == kPanelColumns, "synthetic storms use the standard 10-column window");
    require(factors >= 0 && factors < std::min(units, periods), "K_true must be below min(N, T)");
    require(storms >= 1, "need at least one storm");
    require(treated >= 1 && treated < units, "treated count must be in [1, N)");
    require(rho > 0, "rate ratio must be positive");
    require(eta > 0, "dispersion must be positive");
    require(population_min >= 100 && population_max >= population_min, "invalid population range");
    require(first_year <= last_year, "invalid year range");
}

SyntheticStudy simulate_study(const TruthConfig& config) {
    config.validate();
    SyntheticStudy study;
    const int n = config.units;
    const int t_count = config.periods;
    const int t0 = t_count - 1;
    const double wind_mean = 0.5 * (kTreatedWindMin + kTreatedWindMax);
    const double wind_sd = (kTreatedWindMax - kTreatedWindMin) / std::sqrt(12.0);

    std::vector<int> years;
    for (int y = config.first_year; y <= config.last_year; ++y) years.push_back(y);
    Rng year_rng(derive_seed(config.seed, "years"));
    std::shuffle(years.begin(), years.end(), year_rng);

    for (int s = 0; s < config.storms; ++s) {
        const std::string storm_id = padded("S", s + 1);
        Rng rng(derive_seed(config.seed, storm_id));
        std::normal_distribution<double> normal(0.0, 1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        auto uniform = [&](double lo, double hi) { return lo + (hi - lo) * unif(rng); };

        StormTruth truth;
        truth.storm_id = storm_id;
        McParams& p = truth.params;
        p = McParams::zeros(n, t_count, config.factors);
        p.alpha = config.alpha;
        for (int i = 0; i < n; ++i) p.gamma(i) = config.gamma_sd * normal(rng);
        for (int t = 0; t < t_count; ++t) p.psi(t) = config.psi_sd * normal(rng);
        for (Eigen::Index k = 0; k < p.U.size(); ++k) p.U.data()[k] = config.factor_sd * normal(rng);
        for (Eigen::Index k = 0; k < p.V.size(); ++k) p.V.data()[k] = config.factor_sd * normal(rng);
        p.eta = config.eta;

        const int year = years[static_cast<std::size_t>(s) % years.size()];
        const Date approach = Date::from_ymd(year, 8, 1) + static_cast<int>(unif(rng) * 60);
        const LatLon center = cluster_center(s);

        OutcomePanel panel;
        panel.storm_id = storm_id;
        panel.counts.resize(n, t_count);
        panel.offsets.resize(n, t_count);
        std::vector<double> vmax(static_cast<std::size_t>(n));
        std::vector<long long> population(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            panel.unit_ids.push_back(storm_id + "-" + padded("C", i + 1));
            population[static_cast<std::size_t>(i)] =
                static_cast<long long>(std::llround(uniform(config.population_min, config.population_max)));
            panel.offsets.row(i).setConstant(static_cast<double>(population[static_cast<std::size_t>(i)]));
            vmax[static_cast<std::size_t>(i)] =
                i < config.treated ? uniform(kTreatedWindMin, kTreatedWindMax) : uniform(0.0, 17.0);
        }
        truth.mu = log_mean_matrix(p, panel.offsets).array().exp();
        truth.y0.resize(n, t_count);
        for (int i = 0; i < n; ++i) {
            for (int t = 0; t < t_count; ++t) {
                truth.y0(i, t) = static_cast<double>(sample_nb(rng, truth.mu(i, t), p.eta));
            }
        }
        truth.y1 = truth.y0;
        for (int i = 0; i < config.treated; ++i) {
            const double z = (vmax[static_cast<std::size_t>(i)] - wind_mean) / wind_sd;
            const double ratio = config.rho * std::exp(config.rho_wind_slope * z);
            truth.rate_ratio.push_back(ratio);
            truth.treated_units.push_back(i);
            double iee = 0.0;
            for (int t = t0; t < t_count; ++t) {
                truth.y1(i, t) = static_cast<double>(sample_nb(rng, ratio * truth.mu(i, t), p.eta));
                iee += truth.y1(i, t) - truth.y0(i, t);
            }
            truth.iee.push_back(iee);
            truth.excess_rate.push_back(1e5 * iee / static_cast<double>(population[static_cast<std::size_t>(i)]));
            study.truth.tee += iee;
        }
        panel.counts = truth.y1;
        set_treatment(panel, truth.treated_units, t0);

        // Raw records: daily splits of each window, exposures and predictors.
        for (int i = 0; i < n; ++i) {
            const auto ui = static_cast<std::size_t>(i);
            CountyRecord rec;
            rec.county_id = panel.unit_ids[ui];
            rec.centroid = {center.lat + uniform(-0.5, 0.5), center.lon + uniform(-0.5, 0.5)};
            rec.population = population[ui];
            for (int t = 0; t < t_count; ++t) {
                const auto [first, last] = window_offsets(t);
                auto remaining = static_cast<long long>(panel.counts(i, t));
                const int days = last - first + 1;
                for (int d = 0; d < days; ++d) {
                    long long share = remaining;
                    if (d + 1 < days && remaining > 0) {
                        std::binomial_distribution<long long> split(remaining, 1.0 / (days - d));
                        share = split(rng);
                    }
                    rec.daily_counts[approach + (first + d)] = share;
                    remaining -= share;
                }
            }
            study.records.counties.push_back(std::move(rec));

            ExposureRecord e;
            e.storm_id = storm_id;
            e.county_id = panel.unit_ids[ui];
            e.vmax_sust = vmax[ui];
            e.sust_dur = i < config.treated ? uniform(60.0, 1500.0) : 0.0;
            if (year <= 2011) e.precip = uniform(5.0, 300.0);
            e.closest_approach = approach;
            e.exposure_count = 1 + static_cast<long long>(unif(rng) * 8);
            study.records.exposures.push_back(e);

            if (i >= config.treated) continue;
            PredictorRow row;
            row.storm_id = storm_id;
            row.county_id = e.county_id;
            row.vmax_sust = e.vmax_sust;
            row.sust_dur = e.sust_dur;
            row.year = year;
            row.exposure = static_cast<double>(e.exposure_count);
            row.poverty = uniform(0.05, 0.35);
            row.white_pct = uniform(0.3, 0.95);
            row.owner_occupied = uniform(0.5, 0.85);
            row.age_pct_65_plus = uniform(0.1, 0.3);
            row.no_grad = uniform(0.05, 0.3);
            row.median_age = uniform(30.0, 50.0);
            row.population_density = std::exp(uniform(std::log(10.0), std::log(3000.0)));
            row.median_house_value = uniform(80000.0, 400000.0);
            row.cc1 = unif(rng) < 0.5 ? 1 : 0;
            row.state = kStates[static_cast<std::size_t>(unif(rng) * std::size(kStates))];
            row.precip = e.precip;
            study.predictors.push_back(row);
        }
        study.panels.push_back(std::move(panel));
        study.truth.storms.push_back(std::move(truth));
    }
    double rate_sum = 0.0;
    std::size_t exposures = 0;
    for (const auto& st : study.truth.storms) {
        for (double r : st.excess_rate) {
            rate_sum += r;
            ++exposures;
        }
    }
    study.truth.aer = rate_sum / static_cast<double>(exposures);
    return study;
}

void write_study(const SyntheticStudy& study, const std::filesystem::path& dir) {
    CsvTable counties({"county_id", "lat", "lon", "population"});
    CsvTable counts({"county_id", "date", "count"});
    for (const auto& c : study.records.counties) {
        counties.add_row({c.county_id, format_double(c.centroid.lat), format_double(c.centroid.lon),
                          std::to_string(c.population)});
        for (const auto& [date, value] : c.daily_counts) {
            counts.add_row({c.county_id, date.to_string(), std::to_string(value)});
        }
    }
    CsvTable exposures({"storm_id", "county_id", "vmax_sust", "sust_dur", "precip", "closest_approach",
                        "exposure_count"});
    for (const auto& e : study.records.exposures) {
        exposures.add_row({e.storm_id, e.county_id, format_double(e.vmax_sust), format_double(e.sust_dur),
                           e.precip ? format_double(*e.precip) : "", e.closest_approach.to_string(),
                           std::to_string(e.exposure_count)});
    }
    CsvTable truth({"storm_id", "county_id", "population", "rate_ratio", "y0", "y1", "iee", "excess_rate"});
    for (std::size_t s = 0; s < study.truth.storms.size(); ++s) {
        const auto& st = study.truth.storms[s];
        const auto& panel = study.panels[s];
        for (std::size_t k = 0; k < st.treated_units.size(); ++k) {
            const int i = st.treated_units[k];
            truth.add_row({st.storm_id, panel.unit_ids[static_cast<std::size_t>(i)],
                           format_double(panel.offsets(i, 0)), format_double(st.rate_ratio[k]),
                           format_double(st.y0.row(i).tail(1)(0)), format_double(st.y1.row(i).tail(1)(0)),
                           format_double(st.iee[k]), format_double(st.excess_rate[k])});
        }
    }
    counties.write(dir / "counties.csv");
    counts.write(dir / "counts.csv");
    exposures.write(dir / "exposures.csv");
    predictors_table(study.predictors).write(dir / "predictors.csv");
    truth.write(dir / "truth.csv");
}

std::vector<std::pair<std::string, std::string>> proximity_adjacency(const std::vector<CountyRecord>& counties,
                                                                     double miles) {
    std::vector<std::pair<std::string, std::string>> out;
    for (std::size_t a = 0; a < counties.size(); ++a) {
        for (std::size_t b = a + 1; b < counties.size(); ++b) {
            if (great_circle_miles(counties[a].centroid, counties[b].centroid) <= miles) {
                out.emplace_back(counties[a].county_id, counties[b].county_id);
            }
        }
    }
    return out;
}

} // namespace stormfx
