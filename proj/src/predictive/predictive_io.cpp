#include "stormfx/predictive_io.hpp"

#include "stormfx/error.hpp"
#include "stormfx/svg.hpp"

#include "json.hpp"

#include <algorithm>

namespace stormfx {

namespace {

const std::vector<std::string>& predictor_columns() {
    static const std::vector<std::string> cols = {
        "storm_id", "county_id", "vmax_sust", "sust_dur", "year", "exposure", "poverty", "white_pct",
        "owner_occupied", "age_pct_65_plus", "no_grad", "median_age", "population_density",
        "median_house_value", "cc1", "state", "precip"};
    return cols;
}

} // namespace

std::vector<PredictorRow> read_predictors(const std::filesystem::path& path) {
    const CsvTable t = CsvTable::read(path);
    for (const auto& c : predictor_columns()) {
        if (c == "state" || c == "precip") continue;
        require(t.has_column(c), path.string() + " lacks column " + c);
    }
    std::vector<PredictorRow> rows;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        PredictorRow row;
        row.storm_id = t.at(r, "storm_id");
        row.county_id = t.at(r, "county_id");
        row.vmax_sust = t.number(r, "vmax_sust");
        row.sust_dur = t.number(r, "sust_dur");
        row.year = static_cast<int>(t.integer(r, "year"));
        row.exposure = t.number(r, "exposure");
        row.poverty = t.number(r, "poverty");
        row.white_pct = t.number(r, "white_pct");
        row.owner_occupied = t.number(r, "owner_occupied");
        row.age_pct_65_plus = t.number(r, "age_pct_65_plus");
        row.no_grad = t.number(r, "no_grad");
        row.median_age = t.number(r, "median_age");
        row.population_density = t.number(r, "population_density");
        row.median_house_value = t.number(r, "median_house_value");
        row.cc1 = static_cast<int>(t.integer(r, "cc1"));
        if (t.has_column("state") && !t.at(r, "state").empty() && t.at(r, "state") != "NA") {
            row.state = t.at(r, "state");
        }
        if (t.has_column("precip")) row.precip = t.optional_number(r, "precip");
        row.validate();
        rows.push_back(std::move(row));
    }
    return rows;
}

CsvTable predictors_table(const std::vector<PredictorRow>& rows) {
    CsvTable t(predictor_columns());
    for (const auto& r : rows) {
        t.add_row({r.storm_id, r.county_id, format_double(r.vmax_sust), format_double(r.sust_dur),
                   std::to_string(r.year), format_double(r.exposure), format_double(r.poverty),
                   format_double(r.white_pct), format_double(r.owner_occupied), format_double(r.age_pct_65_plus),
                   format_double(r.no_grad), format_double(r.median_age), format_double(r.population_density),
                   format_double(r.median_house_value), std::to_string(r.cc1), r.state.value_or(""),
                   r.precip ? format_double(*r.precip) : ""});
    }
    return t;
}

CsvTable coefficient_table(const PredictiveFit& fit, double level) {
    CsvTable t({"column", "mean", "ci_low", "ci_high"});
    for (Eigen::Index j = 0; j < fit.beta.cols(); ++j) {
        const Eigen::VectorXd col = fit.beta.col(j);
        const auto s = summarize(std::vector<double>(col.begin(), col.end()), level);
        t.add_row({fit.design.columns[static_cast<std::size_t>(j)], format_double(s.mean), format_double(s.ci_low),
                   format_double(s.ci_high)});
    }
    const auto s = summarize(std::vector<double>(fit.sigma2.begin(), fit.sigma2.end()), level);
    t.add_row({"sigma2", format_double(s.mean), format_double(s.ci_low), format_double(s.ci_high)});
    return t;
}

CsvTable prediction_table(const std::vector<Prediction>& predictions) {
    CsvTable t({"storm_id", "county_id", "mean", "ci_low", "ci_high"});
    for (const auto& p : predictions) {
        t.add_row({p.storm_id, p.county_id, format_double(p.summary.mean), format_double(p.summary.ci_low),
                   format_double(p.summary.ci_high)});
    }
    return t;
}

CsvTable cv_table(const std::string& outcome, const std::vector<CvResult>& results) {
    CsvTable t({"outcome", "variant", "folds", "rows", "rmse"});
    for (const auto& r : results) {
        t.add_row({outcome, r.variant, std::to_string(r.folds), std::to_string(r.rows), format_double(r.rmse)});
    }
    return t;
}

std::string fit_archive_json(const PredictiveFit& fit) {
    nlohmann::ordered_json j;
    const auto& m = fit.design;
    j["format"] = "stormfx-predictive-fit";
    j["variant"] = m.variant.name();
    j["seed"] = std::to_string(fit.seed);
    j["draw_matched"] = fit.draw_matched;
    j["columns"] = m.columns;
    j["base_columns"] = m.base_columns;
    j["centers"] = m.centers;
    j["scales"] = m.scales;
    auto splines = nlohmann::ordered_json::array();
    for (const auto& s : m.splines) splines.push_back({{"variable", s.variable}, {"knots", s.knots}});
    j["splines"] = splines;
    j["state_levels"] = m.state_levels;
    j["dropped"] = m.dropped;
    j["warnings"] = m.warnings;
    j["rows"] = fit.row_keys;
    j["sigma2"] = std::vector<double>(fit.sigma2.begin(), fit.sigma2.end());
    auto beta = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < fit.beta.rows(); ++r) {
        const Eigen::RowVectorXd row = fit.beta.row(r);
        beta.push_back(std::vector<double>(row.begin(), row.end()));
    }
    j["beta"] = beta;
    return j.dump(1) + "\n";
}

void write_fit_archive(const std::filesystem::path& path, const PredictiveFit& fit) {
    write_text(path, fit_archive_json(fit));
}

PredictiveFit read_fit_archive(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text(path));
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, path.string() + " is not valid JSON: " + e.what());
    }
    require(j.value("format", "") == "stormfx-predictive-fit", path.string() + " is not a predictive fit archive");
    PredictiveFit fit;
    try {
        auto& m = fit.design;
        m.variant = Variant::parse(j.at("variant").get<std::string>());
        m.columns = j.at("columns").get<std::vector<std::string>>();
        m.base_columns = j.at("base_columns").get<std::vector<std::string>>();
        m.centers = j.at("centers").get<std::vector<double>>();
        m.scales = j.at("scales").get<std::vector<double>>();
        for (const auto& s : j.at("splines")) {
            m.splines.push_back({s.at("variable").get<std::string>(), s.at("knots").get<std::vector<double>>()});
        }
        m.state_levels = j.at("state_levels").get<std::vector<std::string>>();
        m.dropped = j.at("dropped").get<std::vector<std::string>>();
        m.warnings = j.at("warnings").get<std::vector<std::string>>();
        fit.row_keys = j.at("rows").get<std::vector<std::string>>();
        fit.seed = std::stoull(j.at("seed").get<std::string>());
        fit.draw_matched = j.at("draw_matched").get<bool>();
        const auto sigma2 = j.at("sigma2").get<std::vector<double>>();
        fit.sigma2 = Eigen::Map<const Eigen::VectorXd>(sigma2.data(), static_cast<Eigen::Index>(sigma2.size()));
        const auto& beta = j.at("beta");
        fit.beta.resize(static_cast<Eigen::Index>(beta.size()), static_cast<Eigen::Index>(m.columns.size()));
        for (std::size_t r = 0; r < beta.size(); ++r) {
            const auto row = beta[r].get<std::vector<double>>();
            require(row.size() == m.columns.size(), path.string() + ": coefficient draw has the wrong length");
            for (std::size_t c = 0; c < row.size(); ++c) {
                fit.beta(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorKind::InvalidInput, path.string() + ": malformed fit archive: " + e.what());
    }
    require(fit.beta.rows() == fit.sigma2.size(), path.string() + ": beta and sigma2 draw counts differ");
    const auto& m = fit.design;
    const std::size_t blocks = m.variant.stratified ? 2 : 1;
    require(m.centers.size() == m.base_columns.size() && m.scales.size() == m.base_columns.size() &&
                m.columns.size() == blocks * m.base_columns.size(),
            path.string() + ": inconsistent design metadata");
    return fit;
}

PredictorRow reference_row(const DesignMetadata& meta) {
    auto center = [&](const std::string& name, double fallback) {
        const auto it = std::find(meta.base_columns.begin(), meta.base_columns.end(), name);
        if (it == meta.base_columns.end()) return fallback;
        return meta.centers[static_cast<std::size_t>(it - meta.base_columns.begin())];
    };
    PredictorRow r;
    r.storm_id = "reference";
    r.county_id = "reference";
    r.vmax_sust = center(meta.variant.wind == WindForm::Linear ? "vmax_sust" : "vmax_sust_s1", 40.0);
    r.sust_dur = center("sust_dur", 0.0);
    r.year = static_cast<int>(std::lround(center("year_s1", 2005.0)));
    r.exposure = center("exposure", 0.0);
    r.poverty = std::clamp(center("poverty", 0.0), 0.0, 1.0);
    r.white_pct = std::clamp(center("white_pct", 0.0), 0.0, 1.0);
    r.owner_occupied = std::clamp(center("owner_occupied", 0.0), 0.0, 1.0);
    r.age_pct_65_plus = std::clamp(center("age_pct_65_plus", 0.0), 0.0, 1.0);
    r.no_grad = std::clamp(center("no_grad", 0.0), 0.0, 1.0);
    r.median_age = center("median_age", 0.0);
    r.population_density = center("population_density", 0.0);
    r.median_house_value = center("median_house_value", 0.0);
    r.cc1 = 0;
    if (meta.variant.state && !meta.state_levels.empty()) r.state = meta.state_levels.front();
    if (meta.variant.precip) r.precip = std::max(0.0, center("precip_s1", 0.0));
    return r;
}

void write_wind_curve(const std::filesystem::path& dir, const PredictiveFit& fit, double from, double to, int points,
                      double level) {
    require(points >= 2 && to > from, "invalid windspeed sweep");
    std::vector<PredictorRow> rows;
    const PredictorRow base = reference_row(fit.design);
    for (int k = 0; k < points; ++k) {
        PredictorRow r = base;
        r.vmax_sust = from + (to - from) * k / (points - 1);
        rows.push_back(r);
    }
    const Eigen::MatrixXd eta = linear_predictor(fit, rows);
    CsvTable t({"vmax_sust", "mean", "ci_low", "ci_high"});
    svg::Series mean{"posterior mean", {}, {}, false, false};
    svg::Series lo{"lower limit", {}, {}, false, true};
    svg::Series hi{"upper limit", {}, {}, false, true};
    for (int k = 0; k < points; ++k) {
        const Eigen::RowVectorXd row = eta.row(k);
        const auto s = summarize(std::vector<double>(row.begin(), row.end()), level);
        const double x = rows[static_cast<std::size_t>(k)].vmax_sust;
        t.add_row({format_double(x), format_double(s.mean), format_double(s.ci_low), format_double(s.ci_high)});
        mean.x.push_back(x);
        mean.y.push_back(s.mean);
        lo.x.push_back(x);
        lo.y.push_back(s.ci_low);
        hi.x.push_back(x);
        hi.y.push_back(s.ci_high);
    }
    t.write(dir / "wind_curve.csv");
    svg::Chart chart{"Excess rate by windspeed", "maximum sustained windspeed (m/s)", "excess rate per 100,000",
                     {mean, lo, hi}, false, true};
    write_text(dir / "wind_curve.svg", svg::render(chart));
}

} // namespace stormfx
