#include "stormfx/posterior_io.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/panel_io.hpp"

#include "json.hpp"

#include <map>

namespace stormfx {

namespace {

nlohmann::ordered_json prior_json(const PriorConfig& p) {
    return {{"intercept_sd", p.intercept_sd},
            {"effect_sd", p.effect_sd},
            {"factor_sd", p.factor_sd},
            {"log_dispersion_sd", p.log_dispersion_sd}};
}

} // namespace

CounterfactualSet counterfactual_set(const McPosterior& posterior) {
    return {posterior.storm_id, posterior.cells, posterior.counterfactuals, posterior.chain_of_draw};
}

std::string diagnostics_json(const OutcomePanel& panel, const McPosterior& post) {
    nlohmann::ordered_json j;
    j["storm_id"] = post.storm_id;
    j["K"] = post.config.structure.factors;
    j["unit_effects"] = post.config.structure.unit_effects;
    j["time_effects"] = post.config.structure.time_effects;
    j["sampler"] = to_string(post.config.sampler);
    j["chains"] = post.config.chains;
    j["warmup"] = post.config.effective_warmup();
    j["draws_per_chain"] = post.config.draws;
    j["seed"] = std::to_string(post.config.seed);
    j["prior"] = prior_json(post.config.prior);
    j["rhat_limit"] = post.config.rhat_limit;
    j["max_rhat"] = post.max_rhat;
    j["min_ess"] = post.min_ess;
    j["converged"] = post.converged;
    j["warning"] = post.warning;
    auto cells = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < post.cells.size(); ++c) {
        cells.push_back({{"unit_id", panel.unit_ids[static_cast<std::size_t>(post.cells[c].unit)]},
                         {"t", post.cells[c].period + 1},
                         {"rhat", post.diagnostics[c].rhat},
                         {"ess", post.diagnostics[c].ess}});
    }
    j["cells"] = cells;
    auto chains = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < post.chains.size(); ++c) {
        const auto& s = post.chains[c];
        chains.push_back({{"chain", c + 1},
                          {"sampler_seed", std::to_string(s.sampler_seed)},
                          {"counterfactual_seed", std::to_string(s.counterfactual_seed)},
                          {"init_seed", std::to_string(s.init_seed)},
                          {"stepsize", s.stepsize},
                          {"divergences", s.divergences},
                          {"mean_accept", s.mean_accept},
                          {"mean_leapfrog", s.mean_leapfrog},
                          {"gradient_evals", s.gradient_evals}});
    }
    j["chain_stats"] = chains;
    return j.dump(2) + "\n";
}

void write_posterior(const std::filesystem::path& dir, const OutcomePanel& panel, const McPosterior& post) {
    const std::string stem = storm_file_stem(panel.storm_id);
    CsvTable cf({"draw", "chain", "unit_id", "t", "count"});
    CsvTable params({"draw", "chain", "alpha", "eta", "log_density"});
    for (int m = 0; m < post.draw_count(); ++m) {
        const std::string draw = std::to_string(m + 1);
        const std::string chain = std::to_string(post.chain_of_draw[static_cast<std::size_t>(m)] + 1);
        for (std::size_t c = 0; c < post.cells.size(); ++c) {
            cf.add_row({draw, chain, panel.unit_ids[static_cast<std::size_t>(post.cells[c].unit)],
                        std::to_string(post.cells[c].period + 1),
                        std::to_string(post.counterfactuals(static_cast<Eigen::Index>(c), m))});
        }
        const auto& p = post.draws[static_cast<std::size_t>(m)];
        params.add_row({draw, chain, format_double(p.alpha), format_double(p.eta),
                        format_double(post.log_density[static_cast<std::size_t>(m)])});
    }
    cf.write(dir / (stem + "_counterfactuals.csv"));
    params.write(dir / (stem + "_params.csv"));
    write_text(dir / (stem + "_diagnostics.json"), diagnostics_json(panel, post));
}

CounterfactualSet read_counterfactuals(const std::filesystem::path& dir, const OutcomePanel& panel) {
    const auto path = dir / (storm_file_stem(panel.storm_id) + "_counterfactuals.csv");
    const CsvTable t = CsvTable::read(path);
    std::map<std::string, int> unit_index;
    for (std::size_t i = 0; i < panel.unit_ids.size(); ++i) unit_index[panel.unit_ids[i]] = static_cast<int>(i);

    CounterfactualSet set;
    set.storm_id = panel.storm_id;
    for (int i = 0; i < panel.units(); ++i) {
        for (int c = 0; c < panel.periods(); ++c) {
            if (panel.treated_mask(i, c)) set.cells.push_back({i, c});
        }
    }
    std::map<std::pair<int, int>, std::size_t> cell_index;
    for (std::size_t c = 0; c < set.cells.size(); ++c) cell_index[{set.cells[c].unit, set.cells[c].period}] = c;
    const std::size_t ncell = set.cells.size();
    require(ncell > 0, "panel " + panel.storm_id + " has no treated cells");
    require(t.rows() % ncell == 0, path.string() + " does not hold whole draws for every treated cell");
    const auto draws = static_cast<Eigen::Index>(t.rows() / ncell);
    set.draws = CountMatrix::Constant(static_cast<Eigen::Index>(ncell), draws, -1);
    set.chain_of_draw.assign(static_cast<std::size_t>(draws), 0);
    for (std::size_t r = 0; r < t.rows(); ++r) {
        const long long m = t.integer(r, "draw") - 1;
        require(m >= 0 && m < draws, path.string() + ": draw index out of range on row " + std::to_string(r + 2));
        const auto unit = unit_index.find(t.at(r, "unit_id"));
        require(unit != unit_index.end(), path.string() + ": unknown unit " + t.at(r, "unit_id"));
        const auto cell = cell_index.find({unit->second, static_cast<int>(t.integer(r, "t") - 1)});
        require(cell != cell_index.end(), path.string() + ": row " + std::to_string(r + 2) + " is not a treated cell");
        const long long count = t.integer(r, "count");
        require(count >= 0, path.string() + ": negative counterfactual count");
        set.draws(static_cast<Eigen::Index>(cell->second), m) = count;
        set.chain_of_draw[static_cast<std::size_t>(m)] = static_cast<int>(t.integer(r, "chain") - 1);
    }
    require((set.draws.array() >= 0).all(), path.string() + " is missing draws for some treated cells");
    return set;
}

} // namespace stormfx
