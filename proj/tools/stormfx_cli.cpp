#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/estimands_io.hpp"
#include "stormfx/factor_select.hpp"
#include "stormfx/manifest.hpp"
#include "stormfx/panel_io.hpp"
#include "stormfx/pipeline.hpp"
#include "stormfx/posterior_io.hpp"
#include "stormfx/predictive_io.hpp"
#include "stormfx/synthetic.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <filesystem>
#include <iostream>
#include <set>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace stormfx;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::string out_dir = "out";
    int threads = 0;
};

void add_common(CLI::App* app, Common& common) {
    app->add_option("--seed", common.seed, "Master random seed")->capture_default_str();
    app->add_option("--out-dir", common.out_dir, "Output directory")->capture_default_str();
    app->add_option("--threads", common.threads, "Worker cap (0: all cores)")->check(CLI::NonNegativeNumber);
}

std::string command_line(int argc, char** argv) {
    std::string s;
    for (int i = 1; i < argc; ++i) s += (i > 1 ? " " : "") + std::string(argv[i]);
    return s;
}

void print_json(const nlohmann::ordered_json& j) { std::cout << j.dump() << "\n"; }

int report_error(const std::string& command, const std::string& kind, const std::string& message, int code) {
    nlohmann::ordered_json j;
    j["error"] = {{"kind", kind}, {"message", message}, {"command", command}};
    std::cerr << j.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Causal and predictive analysis of storm exposure effects on count panels"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    const std::string argline = command_line(argc, argv);

    // simulate
    Common sim_c;
    TruthConfig truth;
    double adjacency_miles = 8.0;
    auto* sim = app.add_subcommand("simulate", "Write a synthetic study with known effects");
    add_common(sim, sim_c);
    sim->add_option("--storms", truth.storms)->capture_default_str();
    sim->add_option("--units", truth.units)->capture_default_str();
    sim->add_option("--factors", truth.factors)->capture_default_str();
    sim->add_option("--treated", truth.treated)->capture_default_str();
    sim->add_option("--rho", truth.rho, "Treated-cell rate ratio")->capture_default_str();
    sim->add_option("--rho-wind-slope", truth.rho_wind_slope)->capture_default_str();
    sim->add_option("--eta", truth.eta)->capture_default_str();
    sim->add_option("--alpha", truth.alpha)->capture_default_str();
    sim->add_option("--adjacency-miles", adjacency_miles)->capture_default_str();

    // build-panels
    Common bp_c;
    std::string counties, counts, exposures, outcome;
    PanelBuildOptions build_opts;
    auto* bp = app.add_subcommand("build-panels", "Classify exposures, select controls and build storm panels");
    add_common(bp, bp_c);
    bp->add_option("--counties", counties)->required()->check(CLI::ExistingFile);
    bp->add_option("--counts", counts)->required()->check(CLI::ExistingFile);
    bp->add_option("--exposures", exposures)->required()->check(CLI::ExistingFile);
    bp->add_option("--outcome", build_opts.outcome);
    bp->add_option("--wind-threshold", build_opts.wind_threshold)->capture_default_str();
    bp->add_option("--radius-miles", build_opts.control_radius_miles)->capture_default_str();
    bp->add_option("--min-population", build_opts.thresholds.min_population)->capture_default_str();
    bp->add_option("--min-events", build_opts.thresholds.min_events)->capture_default_str();
    bp->add_option("--min-total", build_opts.thresholds.min_total)->capture_default_str();
    bp->add_option("--min-controls", build_opts.thresholds.min_controls)->capture_default_str();

    // select-k
    Common sk_c;
    std::string sk_panels;
    double target = 0.70;
    bool standardize = false;
    auto* sk = app.add_subcommand("select-k", "Scree analysis and recommended number of factors");
    add_common(sk, sk_c);
    sk->add_option("--panels", sk_panels)->required()->check(CLI::ExistingDirectory);
    sk->add_option("--target", target)->capture_default_str();
    sk->add_flag("--standardize", standardize);

    // fit-causal
    Common fc_c;
    std::string fc_panels, sampler_name = "nuts";
    RunConfig fc_cfg;
    std::vector<std::string> storm_filter;
    auto* fc = app.add_subcommand("fit-causal", "Sample each storm's matrix-completion posterior");
    add_common(fc, fc_c);
    fc->add_option("--panels", fc_panels)->required()->check(CLI::ExistingDirectory);
    fc->add_option("--factors", fc_cfg.factors)->capture_default_str();
    fc->add_option("--chains", fc_cfg.chains)->capture_default_str();
    fc->add_option("--warmup", fc_cfg.warmup, "Warmup iterations (negative: same as draws)")->capture_default_str();
    fc->add_option("--draws", fc_cfg.draws)->capture_default_str();
    fc->add_option("--sampler", sampler_name, "nuts or rw")->capture_default_str();
    fc->add_option("--max-depth", fc_cfg.max_depth)->capture_default_str();
    fc->add_option("--rhat-limit", fc_cfg.rhat_limit)->capture_default_str();
    fc->add_option("--storm", storm_filter, "Fit only these storms");

    // estimands
    Common es_c;
    std::string es_panels, es_posterior;
    double es_level = 0.95;
    auto* es = app.add_subcommand("estimands", "Excess events and rates from counterfactual draws");
    add_common(es, es_c);
    es->add_option("--panels", es_panels)->required()->check(CLI::ExistingDirectory);
    es->add_option("--posterior", es_posterior)->required()->check(CLI::ExistingDirectory);
    es->add_option("--level", es_level)->capture_default_str();

    // fit-predictive
    Common fp_c;
    std::string fp_effects, fp_predictors, fp_variant = "spline";
    bool fp_point = false;
    double fp_level = 0.95;
    auto* fp = app.add_subcommand("fit-predictive", "Regress excess rates on exposure and county features");
    add_common(fp, fp_c);
    fp->add_option("--effects", fp_effects, "effect_draws.csv")->required()->check(CLI::ExistingFile);
    fp->add_option("--predictors", fp_predictors)->required()->check(CLI::ExistingFile);
    fp->add_option("--variant", fp_variant)->capture_default_str();
    fp->add_flag("--point", fp_point, "Fit posterior-mean rates instead of matching draws");
    fp->add_option("--level", fp_level)->capture_default_str();

    // cv
    Common cv_c;
    std::string cv_effects, cv_predictors, cv_outcome = "events";
    std::vector<std::string> cv_variant_names;
    int folds = 5;
    auto* cv = app.add_subcommand("cv", "K-fold cross-validated RMSE per model variant");
    add_common(cv, cv_c);
    cv->add_option("--effects", cv_effects, "effect_draws.csv")->required()->check(CLI::ExistingFile);
    cv->add_option("--predictors", cv_predictors)->required()->check(CLI::ExistingFile);
    cv->add_option("--folds", folds)->capture_default_str();
    cv->add_option("--variant", cv_variant_names, "Variants (default: the six standard ones)");
    cv->add_option("--outcome", cv_outcome)->capture_default_str();

    // predict
    Common pr_c;
    std::string pr_fit, pr_scenario;
    double pr_level = 0.95;
    auto* pr = app.add_subcommand("predict", "Predict excess rates for new exposure scenarios");
    add_common(pr, pr_c);
    pr->add_option("--fit", pr_fit, "fit_archive.json")->required()->check(CLI::ExistingFile);
    pr->add_option("--scenario", pr_scenario, "Predictor rows")->required()->check(CLI::ExistingFile);
    pr->add_option("--level", pr_level)->capture_default_str();

    // sensitivity and run-full
    Common se_c, rf_c;
    std::string se_config, rf_config;
    auto* se = app.add_subcommand("sensitivity", "Causal reruns under alternative settings");
    add_common(se, se_c);
    se->add_option("--config", se_config)->required()->check(CLI::ExistingFile);
    auto* rf = app.add_subcommand("run-full", "Whole study from a config file");
    add_common(rf, rf_c);
    rf->add_option("--config", rf_config)->required()->check(CLI::ExistingFile);

    std::string command = "stormfx";
    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        for (auto* sub : app.get_subcommands()) command = sub->get_name();
        return report_error(command, to_string(ErrorKind::Usage), e.what(), 2);
    }
    command = app.get_subcommands().front()->get_name();

    // Config-driven commands: flags override the file only when given.
    auto load_config = [&](const std::string& path, const Common& c, CLI::App* sub) {
        RunConfig cfg = read_run_config(path);
        if (sub->count("--seed") > 0) cfg.seed = c.seed;
        if (sub->count("--out-dir") > 0) cfg.out_dir = c.out_dir;
        if (sub->count("--threads") > 0) cfg.threads = c.threads;
        cfg.source_text = format_run_config(cfg);
        return cfg;
    };

    try {
        if (*sim) {
            const fs::path dir = sim_c.out_dir;
            truth.seed = sim_c.seed;
            const SyntheticStudy study = simulate_study(truth);
            fs::create_directories(dir);
            write_study(study, dir);
            CsvTable adj({"county_a", "county_b"});
            for (const auto& [a, b] : proximity_adjacency(study.records.counties, adjacency_miles)) adj.add_row({a, b});
            adj.write(dir / "adjacency.csv");
            RunConfig cfg;
            cfg.counties = "counties.csv";
            cfg.counts = "counts.csv";
            cfg.exposures = "exposures.csv";
            cfg.predictors = "predictors.csv";
            cfg.adjacency = "adjacency.csv";
            cfg.out_dir = "run";
            cfg.seed = sim_c.seed;
            cfg.threads = sim_c.threads;
            write_text(dir / "run.cfg", format_run_config(cfg));
            write_manifest(dir, command, sim_c.seed, argline);
            print_json({{"storms", study.panels.size()}, {"tee", study.truth.tee}, {"aer", study.truth.aer}});
        } else if (*bp) {
            const fs::path dir = bp_c.out_dir;
            const OutcomeRecords records = read_county_records(counties, counts);
            const PanelBuildResult built = build_panels(records, read_exposures(exposures), build_opts);
            fs::create_directories(dir);
            for (const auto& p : built.panels) {
                std::vector<Exclusion> mine;
                for (const auto& e : built.report) {
                    if (e.storm_id == p.storm_id) mine.push_back(e);
                }
                write_panel(dir, p, mine);
            }
            write_exclusions(dir / "exclusions.csv", built.report);
            write_manifest(dir, command, bp_c.seed, argline);
            print_json({{"panels", built.panels.size()}, {"exclusions", built.report.size()}});
        } else if (*sk) {
            const fs::path dir = sk_c.out_dir;
            std::vector<ScreeResult> screes;
            for (const auto& p : read_panel_dir(sk_panels)) screes.push_back(variance_explained(p, standardize, target));
            require(!screes.empty(), "no panels in " + sk_panels);
            const KRecommendation rec = recommend_k(screes, target);
            fs::create_directories(dir);
            write_scree(dir, screes, rec);
            nlohmann::ordered_json j{{"k", rec.k}, {"target", target}, {"reached", rec.reached},
                                     {"warning", rec.warning}, {"mean_cumulative", rec.mean_cumulative}};
            write_text(dir / "recommendation.json", j.dump(2) + "\n");
            write_manifest(dir, command, sk_c.seed, argline);
            if (!rec.warning.empty()) std::cerr << rec.warning << "\n";
            print_json({{"k", rec.k}, {"reached", rec.reached}});
        } else if (*fc) {
            const fs::path dir = fc_c.out_dir;
            fc_cfg.seed = fc_c.seed;
            fc_cfg.threads = fc_c.threads;
            fc_cfg.sampler = parse_sampler_kind(sampler_name);
            fc_cfg.panels_dir = fc_panels;
            fc_cfg.validate();
            std::vector<OutcomePanel> panels;
            const std::set<std::string> wanted(storm_filter.begin(), storm_filter.end());
            for (auto& p : read_panel_dir(fc_panels)) {
                if (wanted.empty() || wanted.contains(p.storm_id)) panels.push_back(std::move(p));
            }
            require(!panels.empty(), "no panels to fit");
            const CausalStage stage = run_causal_stage(fc_cfg, panels, fc_cfg.factors);
            fs::create_directories(dir);
            for (std::size_t s = 0; s < panels.size(); ++s) write_posterior(dir, panels[s], stage.posteriors[s]);
            write_manifest(dir, command, fc_c.seed, causal_config_text(fc_cfg, fc_cfg.factors));
            for (const auto& w : stage.warnings()) std::cerr << "warning: " << w << "\n";
            auto storms = nlohmann::ordered_json::array();
            for (const auto& p : stage.posteriors) {
                storms.push_back({{"storm_id", p.storm_id}, {"max_rhat", p.max_rhat}, {"converged", p.converged}});
            }
            print_json({{"storms", storms}});
        } else if (*es) {
            const fs::path dir = es_c.out_dir;
            const auto panels = read_panel_dir(es_panels);
            require(!panels.empty(), "no panels in " + es_panels);
            std::vector<CounterfactualSet> sets;
            for (const auto& p : panels) sets.push_back(read_counterfactuals(es_posterior, p));
            const EffectDraws effects = assemble_effects(panels, sets);
            fs::create_directories(dir);
            write_effects(dir, effects, es_level);
            write_manifest(dir, command, es_c.seed, argline);
            const auto tee = summarize(effects.tee, es_level);
            const auto aer = summarize(effects.aer, es_level);
            print_json({{"tee", tee.mean}, {"aer", aer.mean}, {"aer_ci", {aer.ci_low, aer.ci_high}}});
        } else if (*fp) {
            const fs::path dir = fp_c.out_dir;
            const EffectDraws effects = read_effect_draws(fp_effects);
            const auto rows = align_rows(effects, read_predictors(fp_predictors));
            const Variant variant = Variant::parse(fp_variant);
            const PredictiveFit fit = fp_point ? fit_predictive_point(effects, rows, variant, fp_c.seed)
                                               : fit_predictive(effects, rows, variant, fp_c.seed);
            fs::create_directories(dir);
            coefficient_table(fit, fp_level).write(dir / "coefficients.csv");
            write_fit_archive(dir / "fit_archive.json", fit);
            write_wind_curve(dir, fit, 17.0, 70.0, 54, fp_level);
            write_manifest(dir, command, fp_c.seed, argline);
            for (const auto& w : fit.design.warnings) std::cerr << "warning: " << w << "\n";
            print_json({{"variant", variant.name()}, {"columns", fit.design.columns.size()},
                        {"draws", fit.draw_count()}});
        } else if (*cv) {
            const fs::path dir = cv_c.out_dir;
            const EffectDraws effects = read_effect_draws(cv_effects);
            const auto rows = align_rows(effects, read_predictors(cv_predictors));
            std::vector<Variant> variants;
            for (const auto& n : cv_variant_names) variants.push_back(Variant::parse(n));
            if (variants.empty()) variants = cv_variants();
            const auto results = cross_validate(point_estimates(effects), rows, variants, folds, cv_c.seed);
            fs::create_directories(dir);
            cv_table(cv_outcome, results).write(dir / "cv_rmse.csv");
            write_manifest(dir, command, cv_c.seed, argline);
            auto j = nlohmann::ordered_json::array();
            for (const auto& r : results) j.push_back({{"variant", r.variant}, {"rmse", r.rmse}});
            print_json({{"cv", j}});
        } else if (*pr) {
            const fs::path dir = pr_c.out_dir;
            const PredictiveFit fit = read_fit_archive(pr_fit);
            const auto predictions = predict_new(fit, read_predictors(pr_scenario), pr_c.seed, pr_level);
            fs::create_directories(dir);
            prediction_table(predictions).write(dir / "predictions.csv");
            write_manifest(dir, command, pr_c.seed, argline);
            print_json({{"predictions", predictions.size()}});
        } else if (*se) {
            const RunConfig cfg = load_config(se_config, se_c, se);
            const StudyData data = load_study(cfg);
            const SensitivityReport rep = run_sensitivity(cfg, data, nullptr, cfg.out_dir);
            write_manifest(cfg.out_dir, command, cfg.master_seed(), cfg.source_text);
            for (const auto& w : rep.warnings) std::cerr << "warning: " << w << "\n";
            auto j = nlohmann::ordered_json::array();
            for (const auto& c : rep.comparisons) j.push_back({{"name", c.name}, {"correlation", c.correlation}});
            print_json({{"comparisons", j}});
        } else if (*rf) {
            const RunConfig cfg = load_config(rf_config, rf_c, rf);
            const StudyData data = load_study(cfg);
            const StudyReport rep = run_full(cfg, data);
            const auto aer = summarize(rep.causal.effects.aer, cfg.level);
            print_json({{"report", (cfg.out_dir / "report.json").string()},
                        {"aer", aer.mean},
                        {"aer_ci", {aer.ci_low, aer.ci_high}}});
        }
    } catch (const Error& e) {
        return report_error(command, to_string(e.kind()), e.what(), 1);
    } catch (const std::exception& e) {
        return report_error(command, to_string(ErrorKind::Io), e.what(), 1);
    }
    return 0;
}
