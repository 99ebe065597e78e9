#include "stormfx/design.hpp"

#include "stormfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace stormfx {

namespace {

struct RawColumns {
    std::vector<std::string> names;
    std::vector<bool> binary;
    Eigen::MatrixXd values;
};

double linear_value(const PredictorRow& r, std::size_t j) {
    switch (j) {
    case 0: return r.sust_dur;
    case 1: return r.exposure;
    case 2: return r.poverty;
    case 3: return r.white_pct;
    case 4: return r.owner_occupied;
    case 5: return r.age_pct_65_plus;
    case 6: return r.median_age;
    case 7: return r.population_density;
    case 8: return r.median_house_value;
    case 9: return r.no_grad;
    default: return static_cast<double>(r.cc1);
    }
}

void check_rows(const std::vector<PredictorRow>& rows, const Variant& variant) {
    std::string missing_precip;
    std::string missing_state;
    int n_precip = 0;
    int n_state = 0;
    for (const auto& r : rows) {
        r.validate();
        const std::string key = r.storm_id + "/" + r.county_id;
        if (variant.precip && !r.precip && n_precip++ < 10) missing_precip += (missing_precip.empty() ? "" : ", ") + key;
        if (variant.state && !r.state && n_state++ < 10) missing_state += (missing_state.empty() ? "" : ", ") + key;
    }
    if (n_precip > 0) {
        fail(ErrorKind::InvalidInput, "precipitation absent for " + std::to_string(n_precip) +
                                          " rows required by the precip variant: " + missing_precip);
    }
    if (n_state > 0) {
        fail(ErrorKind::InvalidInput, "state absent for " + std::to_string(n_state) + " rows: " + missing_state);
    }
}

RawColumns raw_columns(const std::vector<PredictorRow>& rows, const Variant& variant,
                       const std::vector<SplineSpec>& splines, const std::vector<std::string>& levels,
                       bool unseen_as_reference) {
    RawColumns raw;
    auto add = [&](const std::string& name, bool binary) {
        raw.names.push_back(name);
        raw.binary.push_back(binary);
    };
    auto find_spline = [&](const std::string& var) -> const SplineSpec& {
        for (const auto& s : splines) {
            if (s.variable == var) return s;
        }
        fail(ErrorKind::InvalidInput, "design metadata has no spline for " + var);
    };
    add("intercept", true);
    if (variant.wind == WindForm::Linear) {
        add("vmax_sust", false);
    } else {
        for (int j = 1; j <= find_spline("vmax_sust").columns(); ++j) add("vmax_sust_s" + std::to_string(j), false);
    }
    for (int j = 1; j <= find_spline("year").columns(); ++j) add("year_s" + std::to_string(j), false);
    for (std::size_t j = 0; j < linear_predictor_names().size(); ++j) {
        add(linear_predictor_names()[j], linear_predictor_names()[j] == "cc1");
    }
    if (variant.precip) {
        for (int j = 1; j <= find_spline("precip").columns(); ++j) add("precip_s" + std::to_string(j), false);
    }
    if (variant.state) {
        for (std::size_t l = 1; l < levels.size(); ++l) add("state_" + levels[l], true);
    }

    const auto n = static_cast<Eigen::Index>(rows.size());
    raw.values.resize(n, static_cast<Eigen::Index>(raw.names.size()));
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& r = rows[static_cast<std::size_t>(i)];
        Eigen::Index c = 0;
        raw.values(i, c++) = 1.0;
        if (variant.wind == WindForm::Linear) {
            raw.values(i, c++) = r.vmax_sust;
        } else {
            for (double v : rcs_basis(r.vmax_sust, find_spline("vmax_sust"))) raw.values(i, c++) = v;
        }
        for (double v : rcs_basis(static_cast<double>(r.year), find_spline("year"))) raw.values(i, c++) = v;
        for (std::size_t j = 0; j < linear_predictor_names().size(); ++j) raw.values(i, c++) = linear_value(r, j);
        if (variant.precip) {
            for (double v : rcs_basis(*r.precip, find_spline("precip"))) raw.values(i, c++) = v;
        }
        if (variant.state) {
            const auto it = std::find(levels.begin(), levels.end(), *r.state);
            if (it == levels.end() && !unseen_as_reference) {
                fail(ErrorKind::InvalidInput, "state level '" + *r.state + "' for " + r.storm_id + "/" +
                                                  r.county_id + " was not seen when the model was fit");
            }
            for (std::size_t l = 1; l < levels.size(); ++l) {
                raw.values(i, c++) = (it != levels.end() && *it == levels[l]) ? 1.0 : 0.0;
            }
        }
    }
    return raw;
}

} // namespace

void PredictorRow::validate() const {
    const std::string key = storm_id + "/" + county_id;
    const double continuous[] = {vmax_sust, sust_dur, exposure, median_age, population_density, median_house_value};
    for (double v : continuous) require(std::isfinite(v), "non-finite predictor for " + key);
    const double fractions[] = {poverty, white_pct, owner_occupied, age_pct_65_plus, no_grad};
    for (double v : fractions) require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "fraction outside [0, 1] for " + key);
    require(cc1 == 0 || cc1 == 1, "cc1 must be 0 or 1 for " + key);
    if (precip) require(std::isfinite(*precip) && *precip >= 0.0, "precipitation must be >= 0 for " + key);
}

const std::vector<std::string>& linear_predictor_names() {
    static const std::vector<std::string> names = {
        "sust_dur", "exposure", "poverty", "white_pct", "owner_occupied", "age_pct_65_plus",
        "median_age", "population_density", "median_house_value", "no_grad", "cc1"};
    return names;
}

std::string Variant::name() const {
    std::string s = wind == WindForm::Linear ? "linear" : "spline";
    if (stratified) s += "-stratified";
    if (state) s += "-state";
    if (precip) s += "-precip";
    return s;
}

Variant Variant::parse(const std::string& name) {
    Variant v;
    std::size_t pos = 0;
    std::vector<std::string> parts;
    while (pos <= name.size()) {
        const auto next = name.find('-', pos);
        parts.push_back(name.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    if (parts.empty() || (parts[0] != "linear" && parts[0] != "spline")) {
        fail(ErrorKind::InvalidInput, "unknown predictive variant '" + name + "'");
    }
    v.wind = parts[0] == "linear" ? WindForm::Linear : WindForm::Spline;
    for (std::size_t i = 1; i < parts.size(); ++i) {
        if (parts[i] == "stratified") v.stratified = true;
        else if (parts[i] == "state") v.state = true;
        else if (parts[i] == "precip") v.precip = true;
        else fail(ErrorKind::InvalidInput, "unknown predictive variant modifier '" + parts[i] + "'");
    }
    return v;
}

std::vector<Variant> cv_variants() {
    return {
        {WindForm::Linear, false, false, false}, {WindForm::Linear, true, false, false},
        {WindForm::Spline, false, false, false}, {WindForm::Spline, true, false, false},
        {WindForm::Linear, false, true, false},  {WindForm::Spline, false, true, false},
    };
}

DesignMetadata learn_design(const std::vector<PredictorRow>& rows, const Variant& variant) {
    require(!rows.empty(), "no predictor rows");
    check_rows(rows, variant);
    DesignMetadata meta;
    meta.variant = variant;
    auto collect = [&](auto getter) {
        std::vector<double> x;
        for (const auto& r : rows) x.push_back(getter(r));
        return x;
    };
    if (variant.wind == WindForm::Spline) {
        meta.splines.push_back({"vmax_sust", quantile_knots(collect([](const PredictorRow& r) { return r.vmax_sust; }), 4)});
    }
    meta.splines.push_back({"year", quantile_knots(collect([](const PredictorRow& r) { return double(r.year); }), 3)});
    if (variant.precip) {
        meta.splines.push_back({"precip", quantile_knots(collect([](const PredictorRow& r) { return *r.precip; }), 3)});
    }
    if (variant.state) {
        std::set<std::string> levels;
        for (const auto& r : rows) levels.insert(*r.state);
        meta.state_levels.assign(levels.begin(), levels.end());
    }

    const RawColumns raw = raw_columns(rows, variant, meta.splines, meta.state_levels, false);
    const double n = static_cast<double>(rows.size());
    for (std::size_t j = 0; j < raw.names.size(); ++j) {
        const auto col = raw.values.col(static_cast<Eigen::Index>(j));
        if (raw.binary[j]) {
            meta.base_columns.push_back(raw.names[j]);
            meta.centers.push_back(0.0);
            meta.scales.push_back(1.0);
            continue;
        }
        const double mean = col.mean();
        const double sd = n > 1 ? std::sqrt((col.array() - mean).square().sum() / (n - 1.0)) : 0.0;
        if (!(sd > 1e-12 * std::max(1.0, std::abs(mean)))) {
            meta.dropped.push_back(raw.names[j]);
            meta.warnings.push_back("column " + raw.names[j] + " has zero standard deviation and was dropped");
            continue;
        }
        meta.base_columns.push_back(raw.names[j]);
        meta.centers.push_back(mean);
        meta.scales.push_back(sd);
    }
    meta.columns = meta.base_columns;
    if (variant.stratified) {
        for (const auto& c : meta.base_columns) meta.columns.push_back("hurricane:" + c);
    }
    return meta;
}

Eigen::MatrixXd apply_design(const std::vector<PredictorRow>& rows, const DesignMetadata& meta,
                             bool unseen_as_reference) {
    check_rows(rows, meta.variant);
    const RawColumns raw = raw_columns(rows, meta.variant, meta.splines, meta.state_levels, unseen_as_reference);
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(meta.base_columns.size());
    Eigen::MatrixXd base(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        const auto& name = meta.base_columns[static_cast<std::size_t>(j)];
        const auto it = std::find(raw.names.begin(), raw.names.end(), name);
        require(it != raw.names.end(), "design column " + name + " cannot be rebuilt");
        const auto src = static_cast<Eigen::Index>(it - raw.names.begin());
        base.col(j) = (raw.values.col(src).array() - meta.centers[static_cast<std::size_t>(j)]) /
                      meta.scales[static_cast<std::size_t>(j)];
    }
    if (!meta.variant.stratified) return base;
    Eigen::MatrixXd X(n, 2 * p);
    X.leftCols(p) = base;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = rows[static_cast<std::size_t>(i)].vmax_sust > kHurricaneMps ? 1.0 : 0.0;
        X.row(i).tail(p) = h * base.row(i);
    }
    return X;
}

Design build_design(const std::vector<PredictorRow>& rows, const Variant& variant) {
    Design d;
    d.meta = learn_design(rows, variant);
    d.X = apply_design(rows, d.meta);
    return d;
}

} // namespace stormfx
