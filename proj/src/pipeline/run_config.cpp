#include "stormfx/run_config.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"

#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace stormfx {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    fail(ErrorKind::InvalidInput, "config key " + key + ": expected a boolean, got '" + v + "'");
}

int parse_int(const std::string& v, const std::string& key) {
    return static_cast<int>(parse_integer(v, "config key " + key));
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_int(item, key));
    }
    return out;
}

std::string join(const std::vector<int>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s;
}

} // namespace

std::uint64_t RunConfig::master_seed() const {
    if (!seed) fail(ErrorKind::InvalidInput, "config: seed is required");
    return *seed;
}

void RunConfig::validate() const {
    master_seed();
    const bool raw = !counties.empty() || !counts.empty() || !exposures.empty();
    if (raw) {
        require(!counties.empty() && !counts.empty() && !exposures.empty(),
                "config: counties, counts and exposures must be given together");
    } else {
        require(!panels_dir.empty(), "config: no input; set counties/counts/exposures or panels");
    }
    require(thresholds.min_population > 0 && thresholds.min_events > 0 && thresholds.min_total > 0 &&
                thresholds.min_controls > 0,
            "config: inclusion thresholds must be positive");
    require(wind_threshold > 0.0 && control_radius_miles > 0.0, "config: wind threshold and radius must be positive");
    require(auto_factors || factors >= 0, "config: factors must be non-negative");
    require(variance_target > 0.0 && variance_target <= 1.0, "config: variance_target must lie in (0, 1]");
    require(chains >= 1 && draws >= 1, "config: chains and draws must be positive");
    require(max_depth >= 1, "config: max_depth must be positive");
    require(rhat_limit > 1.0, "config: rhat_limit must exceed 1");
    require(cv_folds >= 2, "config: cv_folds must be at least 2");
    require(level > 0.0 && level < 1.0, "config: level must lie in (0, 1)");
    require(threads >= 0, "config: threads must be non-negative");
    for (int k : sensitivity_factors) require(k >= 0, "config: sensitivity_factors must be non-negative");
    if (sensitivity_adjacency) {
        require(!adjacency.empty(), "config: sensitivity_adjacency needs an adjacency file");
    }
    if (sensitivity_precip) {
        require(!predictors.empty(), "config: sensitivity_precip needs predictors");
    }
}

RunConfig parse_run_config(const std::string& text, const std::filesystem::path& base_dir) {
    RunConfig c;
    auto path = [&](const std::string& v) {
        std::filesystem::path p(v);
        return p.is_relative() && !base_dir.empty() ? base_dir / p : p;
    };
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter> setters = {
        {"counties", [&](auto& v, auto&) { c.counties = path(v); }},
        {"counts", [&](auto& v, auto&) { c.counts = path(v); }},
        {"exposures", [&](auto& v, auto&) { c.exposures = path(v); }},
        {"panels", [&](auto& v, auto&) { c.panels_dir = path(v); }},
        {"predictors", [&](auto& v, auto&) { c.predictors = path(v); }},
        {"adjacency", [&](auto& v, auto&) { c.adjacency = path(v); }},
        {"out_dir", [&](auto& v, auto&) { c.out_dir = path(v); }},
        {"outcome", [&](auto& v, auto&) { c.outcome = v; }},
        {"seed", [&](auto& v, auto& k) {
             const long long s = parse_integer(v, "config key " + k);
             require(s >= 0, "config key seed must be non-negative");
             c.seed = static_cast<std::uint64_t>(s);
         }},
        {"factors", [&](auto& v, auto& k) {
             if (v == "auto") {
                 c.auto_factors = true;
             } else {
                 c.auto_factors = false;
                 c.factors = parse_int(v, k);
             }
         }},
        {"variance_target", [&](auto& v, auto& k) { c.variance_target = parse_double(v, "config key " + k); }},
        {"chains", [&](auto& v, auto& k) { c.chains = parse_int(v, k); }},
        {"warmup", [&](auto& v, auto& k) { c.warmup = parse_int(v, k); }},
        {"draws", [&](auto& v, auto& k) { c.draws = parse_int(v, k); }},
        {"sampler", [&](auto& v, auto&) { c.sampler = parse_sampler_kind(v); }},
        {"max_depth", [&](auto& v, auto& k) { c.max_depth = parse_int(v, k); }},
        {"rhat_limit", [&](auto& v, auto& k) { c.rhat_limit = parse_double(v, "config key " + k); }},
        {"wind_threshold", [&](auto& v, auto& k) { c.wind_threshold = parse_double(v, "config key " + k); }},
        {"control_radius_miles",
         [&](auto& v, auto& k) { c.control_radius_miles = parse_double(v, "config key " + k); }},
        {"min_population", [&](auto& v, auto& k) { c.thresholds.min_population = parse_integer(v, "config key " + k); }},
        {"min_events", [&](auto& v, auto& k) { c.thresholds.min_events = parse_integer(v, "config key " + k); }},
        {"min_total", [&](auto& v, auto& k) { c.thresholds.min_total = parse_int(v, k); }},
        {"min_controls", [&](auto& v, auto& k) { c.thresholds.min_controls = parse_int(v, k); }},
        {"predictive", [&](auto& v, auto& k) { c.predictive = parse_bool(v, k); }},
        {"variant", [&](auto& v, auto&) { c.variant = Variant::parse(v); }},
        {"cross_validation", [&](auto& v, auto& k) { c.cross_validation = parse_bool(v, k); }},
        {"cv_folds", [&](auto& v, auto& k) { c.cv_folds = parse_int(v, k); }},
        {"level", [&](auto& v, auto& k) { c.level = parse_double(v, "config key " + k); }},
        {"sensitivity_factors", [&](auto& v, auto& k) { c.sensitivity_factors = parse_int_list(v, k); }},
        {"sensitivity_adjacency", [&](auto& v, auto& k) { c.sensitivity_adjacency = parse_bool(v, k); }},
        {"sensitivity_precip", [&](auto& v, auto& k) { c.sensitivity_precip = parse_bool(v, k); }},
        {"precip_last_year", [&](auto& v, auto& k) { c.precip_last_year = parse_int(v, k); }},
        {"threads", [&](auto& v, auto& k) { c.threads = parse_int(v, k); }},
    };

    std::set<std::string> seen;
    std::stringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        const std::string where = "config line " + std::to_string(lineno);
        require(eq != std::string::npos, where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        const auto it = setters.find(key);
        require(it != setters.end(), where + ": unknown key '" + key + "'");
        require(seen.insert(key).second, where + ": duplicate key '" + key + "'");
        require(!value.empty(), where + ": empty value for '" + key + "'");
        it->second(value, key);
    }
    if (!seen.contains("out_dir")) c.out_dir = path(c.out_dir.string());
    c.source_text = text;
    c.validate();
    return c;
}

RunConfig read_run_config(const std::filesystem::path& path) {
    return parse_run_config(read_text(path), path.parent_path());
}

std::string format_run_config(const RunConfig& c) {
    std::ostringstream o;
    auto put = [&](const std::string& k, const std::string& v) {
        if (!v.empty()) o << k << " = " << v << "\n";
    };
    put("counties", c.counties.string());
    put("counts", c.counts.string());
    put("exposures", c.exposures.string());
    put("panels", c.panels_dir.string());
    put("predictors", c.predictors.string());
    put("adjacency", c.adjacency.string());
    put("out_dir", c.out_dir.string());
    put("outcome", c.outcome);
    if (c.seed) put("seed", std::to_string(*c.seed));
    put("factors", c.auto_factors ? "auto" : std::to_string(c.factors));
    put("variance_target", format_double(c.variance_target));
    put("chains", std::to_string(c.chains));
    put("warmup", std::to_string(c.warmup));
    put("draws", std::to_string(c.draws));
    put("sampler", to_string(c.sampler));
    put("max_depth", std::to_string(c.max_depth));
    put("rhat_limit", format_double(c.rhat_limit));
    put("wind_threshold", format_double(c.wind_threshold));
    put("control_radius_miles", format_double(c.control_radius_miles));
    put("min_population", std::to_string(c.thresholds.min_population));
    put("min_events", std::to_string(c.thresholds.min_events));
    put("min_total", std::to_string(c.thresholds.min_total));
    put("min_controls", std::to_string(c.thresholds.min_controls));
    put("predictive", c.predictive ? "true" : "false");
    put("variant", c.variant.name());
    put("cross_validation", c.cross_validation ? "true" : "false");
    put("cv_folds", std::to_string(c.cv_folds));
    put("level", format_double(c.level));
    put("sensitivity_factors", join(c.sensitivity_factors));
    put("sensitivity_adjacency", c.sensitivity_adjacency ? "true" : "false");
    put("sensitivity_precip", c.sensitivity_precip ? "true" : "false");
    put("precip_last_year", std::to_string(c.precip_last_year));
    put("threads", std::to_string(c.threads));
    return o.str();
}

} // namespace stormfx
