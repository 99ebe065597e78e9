#include "doctest.h"

#include "stormfx/error.hpp"
#include "stormfx/synthetic.hpp"

#include <cmath>

using namespace stormfx;

namespace {

OutcomePanel tiny_panel(const Eigen::MatrixXd& counts) {
    OutcomePanel p;
    p.storm_id = "tiny";
    p.counts = counts;
    p.offsets = Eigen::MatrixXd::Ones(counts.rows(), counts.cols());
    for (Eigen::Index i = 0; i < counts.rows(); ++i) p.unit_ids.push_back("u" + std::to_string(i));
    set_treatment(p, {}, static_cast<int>(counts.cols()) - 1);
    return p;
}

} // namespace

TEST_CASE("simulate_study is deterministic and valid") {
    TruthConfig tc;
    tc.storms = 3;
    tc.seed = 5;
    const SyntheticStudy a = simulate_study(tc);
    const SyntheticStudy b = simulate_study(tc);
    REQUIRE(a.panels.size() == 3);
    for (std::size_t s = 0; s < 3; ++s) {
        validate_panel(a.panels[s]);
        CHECK(a.panels[s].counts == b.panels[s].counts);
        CHECK(a.panels[s].units() == 60);
        CHECK(a.panels[s].treated_units.size() == 15);
    }
    CHECK(a.truth.aer == b.truth.aer);
    CHECK(a.predictors.size() == 45);
    tc.seed = 6;
    CHECK(simulate_study(tc).panels[0].counts != a.panels[0].counts);
}

TEST_CASE("storm streams do not depend on the number of storms") {
    TruthConfig tc;
    tc.storms = 1;
    const auto one = simulate_study(tc);
    tc.storms = 4;
    const auto four = simulate_study(tc);
    CHECK(one.panels[0].counts == four.panels[0].counts);
}

TEST_CASE("null effect gives IEE centred at zero") {
    TruthConfig tc;
    tc.rho = 1.0;
    tc.storms = 20;
    const auto study = simulate_study(tc);
    double sum = 0.0, sumsq = 0.0;
    int n = 0;
    for (const auto& st : study.truth.storms) {
        for (double v : st.iee) {
            sum += v;
            sumsq += v * v;
            ++n;
        }
    }
    const double mean = sum / n;
    const double se = std::sqrt((sumsq / n - mean * mean) / n);
    CHECK(std::abs(mean) < 4.0 * se);
}

TEST_CASE("large dispersion gives Poisson variance") {
    TruthConfig tc;
    tc.eta = 1e8;
    tc.storms = 10;
    tc.alpha = -9.0;
    const auto study = simulate_study(tc);
    double ratio_sum = 0.0;
    int cells = 0;
    for (const auto& st : study.truth.storms) {
        for (Eigen::Index i = 0; i < st.mu.rows(); ++i) {
            for (Eigen::Index t = 0; t < st.mu.cols(); ++t) {
                const double r = st.y0(i, t) - st.mu(i, t);
                ratio_sum += r * r / st.mu(i, t);
                ++cells;
            }
        }
    }
    CHECK(ratio_sum / cells == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("control cell means match the true log-mean") {
    TruthConfig tc;
    tc.units = 20;
    tc.treated = 4;
    const int reps = 300;
    double zsum = 0.0, zsq = 0.0;
    for (int r = 0; r < reps; ++r) {
        tc.seed = static_cast<std::uint64_t>(1000 + r);
        const auto study = simulate_study(tc);
        const auto& st = study.truth.storms[0];
        const auto& panel = study.panels[0];
        double resid = 0.0, var = 0.0;
        for (Eigen::Index i = 0; i < st.mu.rows(); ++i) {
            for (Eigen::Index t = 0; t < st.mu.cols(); ++t) {
                if (panel.is_treated(static_cast<int>(i), static_cast<int>(t))) continue;
                CHECK(std::exp(log_mean(st.params, static_cast<int>(i), static_cast<int>(t), panel.offsets(i, t))) ==
                      doctest::Approx(st.mu(i, t)).epsilon(1e-12));
                resid += panel.counts(i, t) - st.mu(i, t);
                var += st.mu(i, t) + st.mu(i, t) * st.mu(i, t) / tc.eta;
            }
        }
        const double z = resid / std::sqrt(var);
        zsum += z;
        zsq += z * z;
    }
    const double mean = zsum / reps;
    CHECK(std::abs(mean) < 4.0 / std::sqrt(reps));
    CHECK(zsq / reps == doctest::Approx(1.0).epsilon(0.25));
}

TEST_CASE("grid posterior examples") {
    const PriorConfig prior{10.0, 0.0, 0.0, 10.0};
    SUBCASE("equal large counts") {
        const auto g = grid_posterior_k0(tiny_panel(Eigen::MatrixXd::Constant(2, 5, 400.0)), prior);
        CHECK(g.alpha_mean == doctest::Approx(std::log(400.0)).epsilon(0.002));
        CHECK(g.boundary_mass < 1e-6);
    }
    SUBCASE("single zero cell") {
        const auto g = grid_posterior_k0(tiny_panel(Eigen::MatrixXd::Zero(1, 1)), prior);
        CHECK(g.alpha_mean < 0.0);
        CHECK(g.boundary_mass < 1e-6);
    }
    SUBCASE("doubling the resolution") {
        Eigen::MatrixXd c(3, 4);
        c << 3, 9, 4, 12, 0, 7, 5, 6, 2, 8, 10, 1;
        const auto p = tiny_panel(c);
        const auto coarse = grid_posterior_k0(p, prior);
        GridOptions fine;
        fine.resolution = 481;
        const auto g2 = grid_posterior_k0(p, prior, fine);
        CHECK(std::abs(g2.mu_mean(0, 0) / coarse.mu_mean(0, 0) - 1.0) < 1e-3);
        CHECK(std::abs(g2.log_eta_mean / coarse.log_eta_mean - 1.0) < 1e-3);
    }
    SUBCASE("too large a panel") {
        CHECK_THROWS_AS(grid_posterior_k0(tiny_panel(Eigen::MatrixXd::Ones(5, 5)), prior), Error);
    }
}
