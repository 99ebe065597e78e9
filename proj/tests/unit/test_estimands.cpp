#include "doctest.h"

#include "stormfx/error.hpp"
#include "stormfx/estimands.hpp"
#include "stormfx/estimands_io.hpp"
#include "stormfx/posterior_io.hpp"
#include "stormfx/synthetic.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

using namespace stormfx;

namespace {

/// One storm, `n` units with the first `treated` treated over the last `windows` columns.
OutcomePanel panel_with(const std::vector<std::vector<double>>& counts, int treated, int windows, double pop) {
    OutcomePanel p;
    p.storm_id = "S";
    const int n = static_cast<int>(counts.size());
    const int t = static_cast<int>(counts[0].size());
    p.counts.resize(n, t);
    p.offsets = Eigen::MatrixXd::Constant(n, t, pop);
    for (int i = 0; i < n; ++i) {
        p.unit_ids.push_back("c" + std::to_string(i));
        for (int j = 0; j < t; ++j) p.counts(i, j) = counts[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    }
    std::vector<int> w;
    for (int i = 0; i < treated; ++i) w.push_back(i);
    set_treatment(p, w, t - windows);
    return p;
}

CounterfactualSet cf_for(const OutcomePanel& p, const std::vector<std::vector<long long>>& per_cell) {
    CounterfactualSet cf;
    cf.storm_id = p.storm_id;
    for (int i : p.treated_units) {
        for (int t = p.first_treated_col; t < p.periods(); ++t) cf.cells.push_back({i, t});
    }
    const auto m = static_cast<Eigen::Index>(per_cell[0].size());
    cf.draws.resize(static_cast<Eigen::Index>(cf.cells.size()), m);
    for (std::size_t c = 0; c < cf.cells.size(); ++c) {
        for (Eigen::Index k = 0; k < m; ++k) cf.draws(static_cast<Eigen::Index>(c), k) = per_cell[c][static_cast<std::size_t>(k)];
    }
    cf.chain_of_draw.assign(static_cast<std::size_t>(m), 0);
    return cf;
}

} // namespace

TEST_CASE("iee_draws examples") {
    const auto p1 = panel_with({{1, 2, 10}, {3, 3, 3}}, 1, 1, 1e5);
    CHECK(iee_draws(p1, cf_for(p1, {{7}}))[0].iee[0] == 3);
    CHECK(iee_draws(p1, cf_for(p1, {{10}}))[0].iee[0] == 0);
    const auto p2 = panel_with({{1, 10, 4}, {3, 3, 3}}, 1, 2, 1e5);
    CHECK(iee_draws(p2, cf_for(p2, {{7}, {6}}))[0].iee[0] == 1);
}

TEST_CASE("excess_rate") {
    CHECK(excess_rate(3, 100000) == 3.0);
    CHECK(excess_rate(1, 50000) == 2.0);
    CHECK(excess_rate(0, 12345) == 0.0);
    CHECK(excess_rate(7, 40000) == doctest::Approx(2.0 * excess_rate(7, 80000)));
    CHECK_THROWS_AS(excess_rate(1, 0), Error);
}

TEST_CASE("storm and study aggregates") {
    UnitEffect a{"S", "a", 100000, {3}, {3.0}};
    UnitEffect b{"S", "b", 100000, {-1}, {-1.0}};
    const StormEffect s = storm_aggregates("S", {a, b});
    CHECK(s.events[0] == 2);
    CHECK(s.rate[0] == doctest::Approx(1.0));
    const StormEffect single = storm_aggregates("S", {a});
    CHECK(single.events[0] == 3);
    CHECK(single.rate[0] == 3.0);

    EffectDraws e;
    e.units = {UnitEffect{"S1", "x", 1e5, {2}, {2.0}}, UnitEffect{"S1", "y", 1e5, {4}, {4.0}},
               UnitEffect{"S2", "z", 1e5, {6}, {6.0}}};
    study_aggregates(e);
    CHECK(e.aer[0] == 4.0);
    CHECK(e.tee[0] == 12);

    EffectDraws one;
    one.units = {a};
    study_aggregates(one);
    CHECK(one.tee == a.iee);
    CHECK(one.aer == a.rate);

    EffectDraws zero;
    zero.units = {UnitEffect{"S", "q", 5e4, {0, 0}, {0.0, 0.0}}, UnitEffect{"S", "r", 5e4, {0, 0}, {0.0, 0.0}}};
    study_aggregates(zero);
    CHECK(zero.tee == std::vector<long long>{0, 0});
    CHECK(zero.aer == std::vector<double>{0.0, 0.0});
}

TEST_CASE("summarize") {
    const auto s = summarize(std::vector<double>{1, 2, 3});
    CHECK(s.mean == 2.0);
    const auto c = summarize(std::vector<double>(17, 0.1));
    CHECK(c.mean == 0.1);
    CHECK(c.ci_low == 0.1);
    CHECK(c.ci_high == 0.1);

    std::mt19937_64 rng(1);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> draws(10000);
    for (auto& d : draws) d = z(rng);
    const auto n = summarize(draws);
    CHECK(n.ci_low == doctest::Approx(-1.96).epsilon(0.05 / 1.96));
    CHECK(n.ci_high == doctest::Approx(1.96).epsilon(0.05 / 1.96));

    auto shuffled = draws;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    const auto n2 = summarize(shuffled);
    CHECK(n2.mean == n.mean);
    CHECK(n2.ci_low == n.ci_low);
    CHECK(n2.ci_high == n.ci_high);

    const auto q = summarize(std::vector<double>{0, 10}, 0.5);
    CHECK(q.ci_low == 2.5);
    CHECK(q.ci_high == 7.5);
    CHECK(summarize(std::vector<long long>{4, 8}).mean == 6.0);
    CHECK_THROWS_AS(summarize(std::vector<double>{}), Error);
}

TEST_CASE("effects and counterfactuals round-trip through files") {
    TruthConfig tc;
    tc.units = 20;
    tc.treated = 4;
    tc.storms = 2;
    const auto study = simulate_study(tc);
    McConfig c;
    c.structure.factors = 1;
    c.draws = 60;
    const auto dir = std::filesystem::temp_directory_path() / "stormfx_test_effects";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    std::vector<CounterfactualSet> sets;
    for (const auto& p : study.panels) {
        const McPosterior post = fit_mc(p, c);
        write_posterior(dir, p, post);
        sets.push_back(counterfactual_set(post));
        const auto back = read_counterfactuals(dir, p);
        CHECK(back.draws == sets.back().draws);
        CHECK(back.chain_of_draw == sets.back().chain_of_draw);
    }
    const EffectDraws e = assemble_effects(study.panels, sets);
    CHECK(e.units.size() == 8);
    CHECK(e.storms.size() == 2);
    CHECK(e.draw_count() == 120);
    write_effects(dir, e);
    const EffectDraws r = read_effect_draws(dir / "effect_draws.csv");
    REQUIRE(r.units.size() == e.units.size());
    for (std::size_t u = 0; u < e.units.size(); ++u) {
        CHECK(r.units[u].iee == e.units[u].iee);
        CHECK(r.units[u].rate == e.units[u].rate);
    }
    CHECK(r.tee == e.tee);
    CHECK(r.aer == e.aer);
    for (const char* f : {"county_rates.csv", "storm_effects.csv", "study_summary.json", "county_rates.svg",
                          "storm_effects.svg"}) {
        CHECK(std::filesystem::exists(dir / f));
    }
}

TEST_CASE("assemble_effects rejects misaligned draws") {
    const auto p = panel_with({{1, 2, 10}, {3, 3, 3}}, 1, 1, 1e5);
    OutcomePanel q = p;
    q.storm_id = "T";
    CounterfactualSet a = cf_for(p, {{1, 2}});
    CounterfactualSet b = cf_for(q, {{1, 2, 3}});
    CHECK_THROWS_AS(assemble_effects({p, q}, {a, b}), Error);
}
