#include "stormfx/pipeline.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/estimands_io.hpp"
#include "stormfx/manifest.hpp"
#include "stormfx/panel_io.hpp"
#include "stormfx/posterior_io.hpp"
#include "stormfx/predictive_io.hpp"
#include "stormfx/rng.hpp"
#include "stormfx/svg.hpp"

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <map>
#include <set>
#include <thread>

namespace stormfx {

namespace fs = std::filesystem;

namespace {

int worker_count(int requested, std::size_t jobs) {
    int n = requested > 0 ? requested : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1, std::min(n, static_cast<int>(jobs)));
}

/// Runs `stage`, prefixing any error with its label.
template <class F>
auto labelled(const std::string& label, F&& stage) -> decltype(stage()) {
    try {
        return stage();
    } catch (const Error& e) {
        throw Error(e.kind(), label + ": " + e.what());
    } catch (const std::exception& e) {
        throw Error(ErrorKind::Io, label + ": " + e.what());
    }
}

class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

double pearson(const std::vector<double>& a, const std::vector<double>& b) {
    if (a == b) return 1.0;
    const auto n = static_cast<double>(a.size());
    if (a.size() < 2) return std::nan("");
    double ma = 0.0, mb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        ma += a[i];
        mb += b[i];
    }
    ma /= n;
    mb /= n;
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nan("");
    return sab / std::sqrt(saa * sbb);
}

void write_comparison(const fs::path& dir, const RateComparison& c) {
    fs::create_directories(dir);
    CsvTable t({"storm_id", "county_id", "baseline", "alternative"});
    for (std::size_t i = 0; i < c.baseline.size(); ++i) {
        t.add_row({c.storm_ids[i], c.county_ids[i], format_double(c.baseline[i]), format_double(c.alternative[i])});
    }
    t.write(dir / "scatter.csv");
    svg::Chart chart{"County excess rates: main vs " + c.name, "main analysis", c.name,
                     {{"counties", c.baseline, c.alternative, true, false}}, true, false};
    write_text(dir / "scatter.svg", svg::render(chart));
}

nlohmann::ordered_json summary_json(const PosteriorSummary& s) {
    return {{"mean", s.mean}, {"ci_low", s.ci_low}, {"ci_high", s.ci_high}, {"level", s.level}};
}

std::vector<std::string> storm_ids_of(const std::vector<OutcomePanel>& panels) {
    std::vector<std::string> ids;
    for (const auto& p : panels) ids.push_back(p.storm_id);
    return ids;
}

/// Rows matched to effect units, or an empty vector with a warning when the
/// predictors do not cover them.
std::vector<PredictorRow> training_rows(const EffectDraws& effects, const std::vector<PredictorRow>& predictors) {
    return align_rows(effects, predictors);
}

} // namespace

AdjacencyPairs read_adjacency(const fs::path& path) {
    const CsvTable t = CsvTable::read(path);
    AdjacencyPairs out;
    for (std::size_t r = 0; r < t.rows(); ++r) {
        out.emplace_back(t.at(r, "county_a"), t.at(r, "county_b"));
    }
    return out;
}

StudyData load_study(const RunConfig& config) {
    config.validate();
    StudyData data;
    if (!config.panels_dir.empty() && config.counties.empty()) {
        data.panels = labelled("panels", [&] { return read_panel_dir(config.panels_dir); });
    } else {
        labelled("panels", [&] {
            const OutcomeRecords records = read_county_records(config.counties, config.counts);
            const auto exposures = read_exposures(config.exposures);
            PanelBuildOptions options;
            options.wind_threshold = config.wind_threshold;
            options.control_radius_miles = config.control_radius_miles;
            options.thresholds = config.thresholds;
            options.outcome = config.outcome;
            PanelBuildResult built = build_panels(records, exposures, options);
            data.panels = std::move(built.panels);
            data.exclusions = std::move(built.report);
            return 0;
        });
    }
    if (data.panels.empty()) fail(ErrorKind::InvalidInput, "panels: no storm passes the inclusion rules");
    if (!config.predictors.empty()) {
        data.predictors = labelled("predictors", [&] { return read_predictors(config.predictors); });
    }
    if (!config.adjacency.empty()) {
        data.adjacency = labelled("adjacency", [&] { return read_adjacency(config.adjacency); });
    }
    return data;
}

McConfig storm_mc_config(const RunConfig& config, const std::string& storm_id, int factors, int chain_threads) {
    McConfig mc;
    mc.structure.factors = factors;
    mc.chains = config.chains;
    mc.warmup = config.warmup;
    mc.draws = config.draws;
    mc.seed = derive_seed(config.master_seed(), storm_id);
    mc.sampler = config.sampler;
    mc.max_depth = config.max_depth;
    mc.rhat_limit = config.rhat_limit;
    mc.threads = chain_threads;
    return mc;
}

std::vector<std::string> CausalStage::warnings() const {
    std::vector<std::string> out;
    for (const auto& p : posteriors) {
        if (!p.warning.empty()) out.push_back(p.storm_id + ": " + p.warning);
    }
    return out;
}

CausalStage run_causal_stage(const RunConfig& config, const std::vector<OutcomePanel>& panels, int factors) {
    require(!panels.empty(), "causal stage: no panels");
    CausalStage stage;
    stage.factors = factors;
    const std::size_t n = panels.size();
    const int workers = worker_count(config.threads, n);
    const int chain_threads = n == 1 ? config.threads : 1;

    stage.posteriors.resize(n);
    std::vector<std::exception_ptr> errors(n);
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t s = next++; s < n; s = next++) {
            try {
                stage.posteriors[s] =
                    fit_mc(panels[s], storm_mc_config(config, panels[s].storm_id, factors, chain_threads));
            } catch (...) {
                errors[s] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    for (std::size_t s = 0; s < n; ++s) {
        if (errors[s]) {
            labelled("causal fit for storm " + panels[s].storm_id, [&]() -> int { std::rethrow_exception(errors[s]); });
        }
    }
    for (const auto& p : stage.posteriors) stage.counterfactuals.push_back(counterfactual_set(p));
    stage.effects = assemble_effects(panels, stage.counterfactuals);
    return stage;
}

OutcomePanel drop_units(const OutcomePanel& panel, const std::vector<int>& rows) {
    const std::set<int> drop(rows.begin(), rows.end());
    std::vector<int> keep;
    for (int i = 0; i < panel.units(); ++i) {
        if (!drop.contains(i)) keep.push_back(i);
    }
    OutcomePanel out;
    out.storm_id = panel.storm_id;
    out.counts.resize(static_cast<Eigen::Index>(keep.size()), panel.periods());
    out.offsets.resize(static_cast<Eigen::Index>(keep.size()), panel.periods());
    const std::set<int> treated(panel.treated_units.begin(), panel.treated_units.end());
    std::vector<int> new_treated;
    for (std::size_t r = 0; r < keep.size(); ++r) {
        const int i = keep[r];
        out.unit_ids.push_back(panel.unit_ids[static_cast<std::size_t>(i)]);
        out.counts.row(static_cast<Eigen::Index>(r)) = panel.counts.row(i);
        out.offsets.row(static_cast<Eigen::Index>(r)) = panel.offsets.row(i);
        if (treated.contains(i)) new_treated.push_back(static_cast<int>(r));
    }
    set_treatment(out, new_treated, panel.first_treated_col);
    return out;
}

std::vector<int> adjacent_controls(const OutcomePanel& panel, const AdjacencyPairs& adjacency) {
    std::set<std::string> treated_ids;
    for (int i : panel.treated_units) treated_ids.insert(panel.unit_ids[static_cast<std::size_t>(i)]);
    std::set<std::string> flagged;
    for (const auto& [a, b] : adjacency) {
        if (treated_ids.contains(a)) flagged.insert(b);
        if (treated_ids.contains(b)) flagged.insert(a);
    }
    std::vector<int> rows;
    for (int i = 0; i < panel.units(); ++i) {
        const auto& id = panel.unit_ids[static_cast<std::size_t>(i)];
        if (!treated_ids.contains(id) && flagged.contains(id)) rows.push_back(i);
    }
    return rows;
}

EffectDraws subset_effects(const EffectDraws& effects, const std::vector<std::string>& storm_ids) {
    const std::set<std::string> keep(storm_ids.begin(), storm_ids.end());
    EffectDraws out;
    for (const auto& u : effects.units) {
        if (keep.contains(u.storm_id)) out.units.push_back(u);
    }
    for (const auto& s : effects.storms) {
        if (keep.contains(s.storm_id)) out.storms.push_back(s);
    }
    study_aggregates(out);
    return out;
}

RateComparison compare_rates(const std::string& name, const EffectDraws& baseline, const EffectDraws& alternative) {
    RateComparison c;
    c.name = name;
    const auto base = point_estimates(baseline);
    const auto alt = point_estimates(alternative);
    std::map<std::pair<std::string, std::string>, double> alt_by_key;
    for (std::size_t i = 0; i < alternative.units.size(); ++i) {
        alt_by_key[{alternative.units[i].storm_id, alternative.units[i].county_id}] = alt[i];
    }
    for (std::size_t i = 0; i < baseline.units.size(); ++i) {
        const auto& u = baseline.units[i];
        const auto it = alt_by_key.find({u.storm_id, u.county_id});
        if (it == alt_by_key.end()) continue;
        c.storm_ids.push_back(u.storm_id);
        c.county_ids.push_back(u.county_id);
        c.baseline.push_back(base[i]);
        c.alternative.push_back(it->second);
    }
    c.correlation = pearson(c.baseline, c.alternative);
    return c;
}

std::string causal_config_text(const RunConfig& config, int factors) {
    RunConfig c;
    c.seed = config.seed;
    c.factors = factors;
    c.chains = config.chains;
    c.warmup = config.warmup;
    c.draws = config.draws;
    c.sampler = config.sampler;
    c.max_depth = config.max_depth;
    c.rhat_limit = config.rhat_limit;
    c.outcome = config.outcome;
    c.wind_threshold = config.wind_threshold;
    c.control_radius_miles = config.control_radius_miles;
    c.thresholds = config.thresholds;
    const std::string all = format_run_config(c);
    static const std::vector<std::string> keys = {
        "outcome", "seed", "factors", "chains", "warmup", "draws", "sampler", "max_depth", "rhat_limit",
        "wind_threshold", "control_radius_miles", "min_population", "min_events", "min_total", "min_controls"};
    std::string out;
    std::size_t pos = 0;
    while (pos < all.size()) {
        const auto end = all.find('\n', pos);
        const std::string line = all.substr(pos, end - pos);
        const std::string key = line.substr(0, line.find(' '));
        if (std::find(keys.begin(), keys.end(), key) != keys.end()) out += line + "\n";
        pos = end + 1;
    }
    return out;
}

void write_exclusions(const fs::path& path, const std::vector<Exclusion>& exclusions) {
    CsvTable t({"storm_id", "county_id", "rule"});
    for (const auto& e : exclusions) t.add_row({e.storm_id, e.county_id, e.rule});
    t.write(path);
}

namespace {

void precip_refit(const RunConfig& config, const StudyData& data, const CausalStage& base, const fs::path& dir,
              SensitivityReport& report) {
    labelled("sensitivity precipitation", [&] {
        require(!data.predictors.empty(), "predictors are required");
        const auto rows = training_rows(base.effects, data.predictors);
        std::map<std::string, bool> eligible;
        for (const auto& r : rows) {
            const bool ok = r.year <= config.precip_last_year && r.precip.has_value();
            const auto it = eligible.find(r.storm_id);
            eligible[r.storm_id] = (it == eligible.end() ? true : it->second) && ok;
        }
        for (const auto& [id, ok] : eligible) {
            if (ok) report.precip_storms.push_back(id);
        }
        require(!report.precip_storms.empty(), "no storm has precipitation data up to " +
                                                   std::to_string(config.precip_last_year));
        const EffectDraws sub = subset_effects(base.effects, report.precip_storms);
        const auto sub_rows = align_rows(sub, data.predictors);
        Variant with = config.variant;
        with.precip = true;
        Variant without = config.variant;
        without.precip = false;
        const std::uint64_t seed = derive_seed(config.master_seed(), "predictive");
        report.precip_fit = fit_predictive(sub, sub_rows, with, seed);
        report.precip_baseline_fit = fit_predictive(sub, sub_rows, without, seed);
        const fs::path pdir = dir / "precip";
        fs::create_directories(pdir / "with_precip");
        fs::create_directories(pdir / "without_precip");
        coefficient_table(*report.precip_fit, config.level).write(pdir / "with_precip" / "coefficients.csv");
        coefficient_table(*report.precip_baseline_fit, config.level)
            .write(pdir / "without_precip" / "coefficients.csv");
        write_wind_curve(pdir / "with_precip", *report.precip_fit, 17.0, 70.0, 54, config.level);
        write_wind_curve(pdir / "without_precip", *report.precip_baseline_fit, 17.0, 70.0, 54, config.level);
        CsvTable storms({"storm_id"});
        for (const auto& id : report.precip_storms) storms.add_row({id});
        storms.write(pdir / "storms.csv");
        return 0;
    });
}

} // namespace

SensitivityReport run_sensitivity(const RunConfig& config, const StudyData& data, const CausalStage* baseline,
                                  const fs::path& dir) {
    SensitivityReport report;
    int factors = config.factors;
    if (config.auto_factors) {
        std::vector<ScreeResult> screes;
        for (const auto& p : data.panels) screes.push_back(variance_explained(p, false, config.variance_target));
        factors = recommend_k(screes, config.variance_target).k;
    }
    CausalStage own;
    if (baseline == nullptr) {
        own = labelled("sensitivity baseline", [&] { return run_causal_stage(config, data.panels, factors); });
        baseline = &own;
    }
    fs::create_directories(dir);
    CsvTable summary({"comparison", "counties", "correlation"});

    for (int k : config.sensitivity_factors) {
        const std::string name = "k" + std::to_string(k);
        const CausalStage alt = labelled("sensitivity " + name, [&] { return run_causal_stage(config, data.panels, k); });
        for (const auto& w : alt.warnings()) report.warnings.push_back(name + ": " + w);
        report.comparisons.push_back(compare_rates("K = " + std::to_string(k), baseline->effects, alt.effects));
        write_comparison(dir / name, report.comparisons.back());
        summary.add_row({name, std::to_string(report.comparisons.back().baseline.size()),
                         format_double(report.comparisons.back().correlation)});
    }

    if (config.sensitivity_adjacency) {
        if (config.adjacency.empty() && data.adjacency.empty()) {
            fail(ErrorKind::InvalidInput, "sensitivity: adjacency data is required for the adjacency rerun");
        }
        std::vector<OutcomePanel> reduced;
        for (const auto& p : data.panels) {
            const auto rows = adjacent_controls(p, data.adjacency);
            OutcomePanel q = drop_units(p, rows);
            if (q.control_units() == 0) {
                report.warnings.push_back("adjacency: storm " + p.storm_id + " has no non-adjacent controls; skipped");
                continue;
            }
            if (q.control_units() < config.thresholds.min_controls) {
                report.warnings.push_back("adjacency: storm " + p.storm_id + " keeps only " +
                                          std::to_string(q.control_units()) + " controls");
            }
            reduced.push_back(std::move(q));
        }
        if (!reduced.empty()) {
            const CausalStage alt =
                labelled("sensitivity adjacency", [&] { return run_causal_stage(config, reduced, factors); });
            for (const auto& w : alt.warnings()) report.warnings.push_back("adjacency: " + w);
            report.comparisons.push_back(
                compare_rates("non-adjacent controls", baseline->effects, alt.effects));
            write_comparison(dir / "adjacency", report.comparisons.back());
            summary.add_row({"adjacency", std::to_string(report.comparisons.back().baseline.size()),
                             format_double(report.comparisons.back().correlation)});
        }
    }

    if (config.sensitivity_precip) {
        try {
            precip_refit(config, data, *baseline, dir, report);
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::DegenerateKnots && e.kind() != ErrorKind::RankDeficient) throw;
            report.warnings.push_back(std::string("precipitation refit skipped: ") + e.what());
        }
    }
    summary.write(dir / "comparisons.csv");
    return report;
}

StudyReport run_full(const RunConfig& config, const StudyData& data) {
    config.validate();
    StudyReport report;
    report.exclusions = data.exclusions;
    const fs::path out = config.out_dir;
    fs::create_directories(out);
    const std::uint64_t seed = config.master_seed();
    const std::string config_text = format_run_config(config);
    std::string hashed_text;
    {
        RunConfig c = config;
        c.out_dir = "run";
        c.threads = 0;
        hashed_text = format_run_config(c);
    }
    std::vector<std::string> warnings;

    Stopwatch total;
    {
        Stopwatch w;
        labelled("panels", [&] {
            const fs::path dir = out / "panels";
            fs::create_directories(dir);
            for (const auto& p : data.panels) {
                std::vector<Exclusion> mine;
                for (const auto& e : data.exclusions) {
                    if (e.storm_id == p.storm_id) mine.push_back(e);
                }
                write_panel(dir, p, mine);
            }
            write_exclusions(dir / "exclusions.csv", data.exclusions);
            write_manifest(dir, "run-full/panels", seed, causal_config_text(config, config.factors));
            return 0;
        });
        report.timings.push_back({"panels", w.seconds()});
    }

    int factors = config.factors;
    {
        Stopwatch w;
        labelled("factor selection", [&] {
            for (const auto& p : data.panels) {
                report.screes.push_back(variance_explained(p, false, config.variance_target));
            }
            report.recommendation = recommend_k(report.screes, config.variance_target);
            const fs::path dir = out / "factors";
            fs::create_directories(dir);
            write_scree(dir, report.screes, report.recommendation);
            write_manifest(dir, "run-full/factors", seed, causal_config_text(config, config.factors));
            return 0;
        });
        if (config.auto_factors) factors = report.recommendation.k;
        if (!report.recommendation.warning.empty()) warnings.push_back(report.recommendation.warning);
        report.timings.push_back({"factor selection", w.seconds()});
    }

    {
        Stopwatch w;
        report.causal = labelled("causal stage", [&] { return run_causal_stage(config, data.panels, factors); });
        for (const auto& warning : report.causal.warnings()) warnings.push_back(warning);
        labelled("causal exports", [&] {
            const fs::path dir = out / "causal";
            fs::create_directories(dir);
            for (std::size_t s = 0; s < data.panels.size(); ++s) {
                write_posterior(dir, data.panels[s], report.causal.posteriors[s]);
            }
            write_manifest(dir, "run-full/causal", seed, causal_config_text(config, factors));
            return 0;
        });
        report.timings.push_back({"causal", w.seconds()});
    }

    {
        Stopwatch w;
        labelled("estimands", [&] {
            const fs::path dir = out / "effects";
            fs::create_directories(dir);
            write_effects(dir, report.causal.effects, config.level);
            write_manifest(dir, "run-full/effects", seed, causal_config_text(config, factors));
            return 0;
        });
        report.timings.push_back({"estimands", w.seconds()});
    }

    if (config.predictive) {
        Stopwatch w;
        if (data.predictors.empty()) {
            warnings.push_back("predictive stage skipped: no predictors supplied");
        } else {
            // Read-only view: the predictive stage never touches the causal outputs.
            const EffectDraws& effects = report.causal.effects;
            labelled("predictive stage", [&] {
                const fs::path dir = out / "predictive";
                fs::create_directories(dir);
                const auto rows = training_rows(effects, data.predictors);
                report.fit = fit_predictive(effects, rows, config.variant, derive_seed(seed, "predictive"));
                for (const auto& m : report.fit->design.warnings) warnings.push_back("predictive: " + m);
                coefficient_table(*report.fit, config.level).write(dir / "coefficients.csv");
                write_fit_archive(dir / "fit_archive.json", *report.fit);
                write_wind_curve(dir, *report.fit, 17.0, 70.0, 54, config.level);
                if (config.cross_validation) {
                    const auto y = point_estimates(effects);
                    const bool have_state =
                        std::all_of(rows.begin(), rows.end(), [](const PredictorRow& r) { return r.state.has_value(); });
                    const std::uint64_t cv_seed = derive_seed(seed, "cv");
                    for (const auto& v : cv_variants()) {
                        if (v.state && !have_state) {
                            warnings.push_back("cv: variant " + v.name() + " skipped, state missing");
                            continue;
                        }
                        try {
                            auto r = cross_validate(y, rows, {v}, config.cv_folds, cv_seed);
                            report.cv.insert(report.cv.end(), r.begin(), r.end());
                        } catch (const Error& e) {
                            warnings.push_back("cv: variant " + v.name() + " failed: " + e.what());
                        }
                    }
                    cv_table(config.outcome.empty() ? "events" : config.outcome, report.cv)
                        .write(dir / "cv_rmse.csv");
                }
                write_manifest(dir, "run-full/predictive", seed, hashed_text);
                return 0;
            });
        }
        report.timings.push_back({"predictive", w.seconds()});
    }

    if (config.has_sensitivity()) {
        Stopwatch w;
        report.sensitivity = run_sensitivity(config, data, &report.causal, out / "sensitivity");
        for (const auto& m : report.sensitivity->warnings) warnings.push_back("sensitivity: " + m);
        write_manifest(out / "sensitivity", "run-full/sensitivity", seed, hashed_text);
        report.timings.push_back({"sensitivity", w.seconds()});
    }
    report.timings.push_back({"total", total.seconds()});

    nlohmann::ordered_json j;
    j["tool"] = "stormfx";
    j["version"] = kVersion;
    j["seed"] = std::to_string(seed);
    j["outcome"] = config.outcome.empty() ? "events" : config.outcome;
    j["factors"] = factors;
    j["factors_recommended"] = report.recommendation.k;
    j["storms"] = storm_ids_of(data.panels);
    auto storms = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < data.panels.size(); ++s) {
        const auto& p = report.causal.posteriors[s];
        int divergences = 0;
        for (const auto& c : p.chains) divergences += c.divergences;
        storms.push_back({{"storm_id", p.storm_id},
                          {"units", data.panels[s].units()},
                          {"treated", data.panels[s].treated_units.size()},
                          {"seed", std::to_string(p.config.seed)},
                          {"max_rhat", p.max_rhat},
                          {"min_ess", p.min_ess},
                          {"divergences", divergences},
                          {"converged", p.converged},
                          {"warning", p.warning}});
    }
    j["diagnostics"] = storms;
    j["tee"] = summary_json(summarize(report.causal.effects.tee, config.level));
    j["aer"] = summary_json(summarize(report.causal.effects.aer, config.level));
    auto excl = nlohmann::ordered_json::array();
    for (const auto& e : data.exclusions) {
        excl.push_back({{"storm_id", e.storm_id}, {"county_id", e.county_id}, {"rule", e.rule}});
    }
    j["exclusions"] = excl;
    if (report.fit) {
        j["predictive"] = {{"variant", report.fit->design.variant.name()},
                           {"columns", report.fit->design.columns.size()},
                           {"rows", report.fit->row_keys.size()}};
        auto cv = nlohmann::ordered_json::array();
        for (const auto& r : report.cv) cv.push_back({{"variant", r.variant}, {"rmse", r.rmse}});
        j["cv"] = cv;
    }
    if (report.sensitivity) {
        auto comps = nlohmann::ordered_json::array();
        for (const auto& c : report.sensitivity->comparisons) {
            comps.push_back({{"name", c.name}, {"counties", c.baseline.size()}, {"correlation", c.correlation}});
        }
        j["sensitivity"] = {{"comparisons", comps}, {"precip_storms", report.sensitivity->precip_storms}};
    }
    j["warnings"] = warnings;
    auto timings = nlohmann::ordered_json::object();
    for (const auto& t : report.timings) timings[t.stage] = t.seconds;
    j["timings_seconds"] = timings;
    write_text(out / "report.json", j.dump(2) + "\n");
    write_text(out / "config.txt", config_text);
    write_manifest(out, "run-full", seed, hashed_text);
    return report;
}

} // namespace stormfx
