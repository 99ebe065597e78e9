#include "doctest.h"

#include "stormfx/diagnostics.hpp"
#include "stormfx/error.hpp"
#include "stormfx/fit_mc.hpp"
#include "stormfx/mc_model.hpp"
#include "stormfx/negative_binomial.hpp"
#include "stormfx/synthetic.hpp"

#include <cmath>
#include <random>

using namespace stormfx;

namespace {

OutcomePanel flat_panel(int n, int t, double mean, std::uint64_t seed, double eta = 1e6) {
    OutcomePanel p;
    p.storm_id = "P";
    p.counts.resize(n, t);
    p.offsets = Eigen::MatrixXd::Ones(n, t);
    Rng rng(seed);
    for (int i = 0; i < n; ++i) {
        p.unit_ids.push_back("u" + std::to_string(i));
        for (int j = 0; j < t; ++j) p.counts(i, j) = static_cast<double>(sample_nb(rng, mean, eta));
    }
    set_treatment(p, {0, 1}, t - 1);
    return p;
}

double poisson_logpmf(double y, double mu) { return y * std::log(mu) - mu - std::lgamma(y + 1.0); }

} // namespace

TEST_CASE("nb_logpmf closed forms and limits") {
    for (double mu : {0.3, 3.0, 40.0}) {
        for (double eta : {0.5, 4.0, 100.0}) {
            CHECK(nb_logpmf(0, mu, eta) == doctest::Approx(eta * std::log(eta / (eta + mu))).epsilon(1e-12));
        }
    }
    for (int y = 0; y < 30; ++y) CHECK(std::abs(nb_logpmf(y, 3.0, 1e11) - poisson_logpmf(y, 3.0)) < 1e-6);
    long double total = 0.0L;
    for (int y = 0; y < 5000; ++y) total += std::exp(static_cast<long double>(nb_logpmf(y, 5.0, 2.0)));
    CHECK(std::fabs(1.0L - total) < 1e-8L);
    const double direct = std::lgamma(7.0 + 2.5) - std::lgamma(2.5) - std::lgamma(8.0) + 2.5 * std::log(2.5 / 6.5) +
                          7.0 * std::log(4.0 / 6.5);
    CHECK(nb_logpmf(7, 4.0, 2.5) == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("lgamma_ratio and digamma_ratio match direct evaluation") {
    for (double eta : {0.3, 2.0, 50.0, 1e4}) {
        for (double y : {0.0, 1.0, 7.0, 120.0}) {
            CHECK(lgamma_ratio(eta, y) == doctest::Approx(std::lgamma(eta + y) - std::lgamma(eta)).epsilon(1e-10));
            double s = 0.0;
            for (int j = 0; j < static_cast<int>(y); ++j) s += 1.0 / (eta + j);
            CHECK(digamma_ratio(eta, y) == doctest::Approx(s).epsilon(1e-10));
        }
    }
    CHECK(lgamma_ratio(1e12, 3.0) == doctest::Approx(3.0 * std::log(1e12)).epsilon(1e-12));
}

TEST_CASE("sample_nb moments") {
    Rng rng(9);
    const double mu = 12.0, eta = 3.0;
    const int n = 200000;
    double s = 0.0, ss = 0.0;
    for (int k = 0; k < n; ++k) {
        const double y = static_cast<double>(sample_nb(rng, mu, eta));
        CHECK_FALSE(y < 0);
        s += y;
        ss += y * y;
    }
    const double mean = s / n, var = ss / n - mean * mean;
    CHECK(mean == doctest::Approx(mu).epsilon(0.01));
    CHECK(var == doctest::Approx(mu + mu * mu / eta).epsilon(0.03));
}

TEST_CASE("log_mean examples") {
    McParams p = McParams::zeros(3, 4, 1);
    CHECK(log_mean(p, 0, 0, 1.0) == 0.0);
    p.alpha = std::log(2.0);
    CHECK(std::exp(log_mean(p, 1, 2, 1.0)) == doctest::Approx(2.0));
    p.alpha = 0.0;
    p.U(0, 1) = 2.0;
    p.V(0, 3) = 0.5;
    CHECK(log_mean(p, 1, 3, 1.0) == doctest::Approx(1.0));
}

TEST_CASE("log_mean invariances") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> z(0.0, 1.0);
    McParams p = McParams::zeros(6, 5, 3);
    p.alpha = z(rng);
    for (int i = 0; i < 6; ++i) p.gamma(i) = z(rng);
    for (int t = 0; t < 5; ++t) p.psi(t) = z(rng);
    for (Eigen::Index k = 0; k < p.U.size(); ++k) p.U.data()[k] = z(rng);
    for (Eigen::Index k = 0; k < p.V.size(); ++k) p.V.data()[k] = z(rng);
    Eigen::MatrixXd offsets = Eigen::MatrixXd::Constant(6, 5, 1234.0);
    const Eigen::MatrixXd base = log_mean_matrix(p, offsets);

    Eigen::MatrixXd g(3, 3);
    for (Eigen::Index k = 0; k < g.size(); ++k) g.data()[k] = z(rng);
    const Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(g).householderQ();
    McParams rotated = p;
    rotated.U = q * p.U;
    rotated.V = q * p.V;
    CHECK((log_mean_matrix(rotated, offsets) - base).cwiseAbs().maxCoeff() < 1e-12);

    McParams shifted = p;
    shifted.alpha += 0.7;
    shifted.gamma.array() -= 0.7;
    CHECK((log_mean_matrix(shifted, offsets) - base).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("control_loglik masking") {
    OutcomePanel one;
    one.storm_id = "one";
    one.unit_ids = {"a"};
    one.counts = Eigen::MatrixXd::Constant(1, 1, 2.0);
    one.offsets = Eigen::MatrixXd::Ones(1, 1);
    set_treatment(one, {}, 0);
    McParams p = McParams::zeros(1, 1, 0);
    p.alpha = std::log(2.0);
    p.eta = 1.0;
    CHECK(control_loglik(one, p) == doctest::Approx(nb_logpmf(2, 2, 1)));
    set_treatment(one, {0}, 0);
    CHECK(control_loglik(one, p) == 0.0);

    OutcomePanel panel = flat_panel(5, 4, 6.0, 1);
    McParams q = McParams::zeros(5, 4, 0);
    q.alpha = std::log(6.0);
    q.eta = 3.0;
    const double before = control_loglik(panel, q);
    panel.counts(0, 3) += 1000;
    CHECK(control_loglik(panel, q) == before);
}

TEST_CASE("sum_to_zero is an isometry onto zero-sum vectors") {
    for (int n : {1, 2, 5, 9}) {
        Eigen::VectorXd free = Eigen::VectorXd::LinSpaced(n - 1, -1.0, 2.0);
        const Eigen::VectorXd z = sum_to_zero(free);
        CHECK(z.size() == n);
        CHECK(std::abs(z.sum()) < 1e-12);
        CHECK(z.norm() == doctest::Approx(free.norm()));
        CHECK((sum_to_zero_adjoint(z) - free).norm() < 1e-12);
    }
}

TEST_CASE("McDensity gradient and pack/unpack") {
    TruthConfig tc;
    tc.units = 12;
    tc.treated = 3;
    tc.seed = 21;
    const OutcomePanel panel = simulate_study(tc).panels.front();
    for (const PriorConfig& prior : {PriorConfig::flat(), PriorConfig::default_prior(), PriorConfig::weak()}) {
        const McDensity d(panel, {2, true, true}, prior);
        const Eigen::VectorXd q = initial_state(d, 5);
        Eigen::VectorXd grad;
        const double f = d.evaluate(q, grad);
        CHECK(std::isfinite(f));
        CHECK(d.evaluate(q) == doctest::Approx(f).epsilon(1e-12));
        for (int k = 0; k < d.dim(); ++k) {
            Eigen::VectorXd a = q, b = q;
            const double h = 1e-5;
            a(k) += h;
            b(k) -= h;
            const double fd = (d.evaluate(a) - d.evaluate(b)) / (2 * h);
            CHECK(grad(k) == doctest::Approx(fd).epsilon(1e-5).scale(1.0));
        }
        const Eigen::VectorXd back = d.pack(d.unpack(q));
        CHECK((back - q).norm() < 1e-10);
    }
}

TEST_CASE("McDensity ignores masked cells") {
    TruthConfig tc;
    tc.units = 12;
    tc.treated = 3;
    OutcomePanel panel = simulate_study(tc).panels.front();
    const McDensity a(panel, {1, true, true}, PriorConfig::default_prior());
    for (int i : panel.treated_units) panel.counts(i, panel.periods() - 1) *= 7;
    const McDensity b(panel, {1, true, true}, PriorConfig::default_prior());
    const Eigen::VectorXd q = initial_state(a, 8);
    Eigen::VectorXd ga, gb;
    CHECK(a.evaluate(q, ga) == b.evaluate(q, gb));
    CHECK(ga == gb);
}

TEST_CASE("split_rhat") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<std::vector<double>> iid(4, std::vector<double>(1000));
    for (auto& c : iid) {
        for (auto& x : c) x = z(rng);
    }
    CHECK(std::abs(split_rhat(iid) - 1.0) < 0.05);
    CHECK(effective_sample_size(iid) == doctest::Approx(4000).epsilon(0.15));

    std::vector<std::vector<double>> apart(2, std::vector<double>(500));
    for (std::size_t k = 0; k < 500; ++k) {
        apart[0][k] = -10.0 + z(rng);
        apart[1][k] = 10.0 + z(rng);
    }
    CHECK(split_rhat(apart) > 1.5);

    const std::vector<std::vector<double>> constant(2, std::vector<double>(100, 3.25));
    CHECK(split_rhat(constant) == 1.0);

    std::vector<std::vector<double>> ar(2, std::vector<double>(4000));
    for (auto& c : ar) {
        double x = 0.0;
        for (auto& v : c) v = x = 0.9 * x + z(rng);
    }
    // AR(1) with phi = 0.9: ESS ~ n (1 - phi) / (1 + phi)
    CHECK(effective_sample_size(ar) == doctest::Approx(8000.0 * 0.1 / 1.9).epsilon(0.3));
}

TEST_CASE("fit_mc recovers a constant rate and is deterministic") {
    OutcomePanel p = flat_panel(20, 10, std::exp(1.0), 77, 2.0);
    McConfig c;
    c.structure = {0, true, true};
    c.draws = 400;
    c.seed = 3;
    const McPosterior a = fit_mc(p, c);
    CHECK(a.draw_count() == 800);
    CHECK(a.converged);
    Eigen::MatrixXd mu = Eigen::MatrixXd::Zero(20, 10);
    for (const auto& d : a.draws) mu += log_mean_matrix(d, p.offsets).array().exp().matrix();
    mu /= a.draw_count();
    double fitted = 0.0, observed = 0.0;
    for (int i = 0; i < 20; ++i) {
        double row_fit = 0.0, row_obs = 0.0;
        for (int t = 0; t < 10; ++t) {
            if (p.is_treated(i, t)) continue;
            row_fit += mu(i, t);
            row_obs += p.counts(i, t);
        }
        CHECK(row_fit == doctest::Approx(row_obs).epsilon(0.35));
        fitted += row_fit;
        observed += row_obs;
    }
    CHECK(fitted == doctest::Approx(observed).epsilon(0.10));

    const McPosterior b = fit_mc(p, c);
    REQUIRE(b.draw_count() == a.draw_count());
    for (int m = 0; m < a.draw_count(); ++m) {
        CHECK(a.draws[static_cast<std::size_t>(m)].alpha == b.draws[static_cast<std::size_t>(m)].alpha);
        CHECK(a.draws[static_cast<std::size_t>(m)].eta == b.draws[static_cast<std::size_t>(m)].eta);
    }
    CHECK(a.counterfactuals == b.counterfactuals);

    McConfig threaded = c;
    threaded.threads = 2;
    CHECK(fit_mc(p, threaded).counterfactuals == a.counterfactuals);
}

TEST_CASE("counterfactual draws track the imputed means") {
    TruthConfig tc;
    tc.units = 25;
    tc.treated = 5;
    tc.factors = 1;
    tc.seed = 12;
    const OutcomePanel panel = simulate_study(tc).panels.front();
    McConfig c;
    c.structure.factors = 1;
    c.draws = 300;
    const McPosterior post = fit_mc(panel, c);
    REQUIRE(post.cells.size() == 5);
    for (std::size_t k = 0; k < post.cells.size(); ++k) {
        const Eigen::RowVectorXd lm = post.log_means.row(static_cast<Eigen::Index>(k));
        const double mean_mu = lm.array().exp().mean();
        double mean_y = 0.0;
        for (Eigen::Index m = 0; m < post.counterfactuals.cols(); ++m) {
            CHECK(post.counterfactuals(static_cast<Eigen::Index>(k), m) >= 0);
            mean_y += static_cast<double>(post.counterfactuals(static_cast<Eigen::Index>(k), m));
        }
        mean_y /= static_cast<double>(post.counterfactuals.cols());
        CHECK(mean_y == doctest::Approx(mean_mu).epsilon(0.08));
    }
}

TEST_CASE("K=0 fits match the grid oracle for both samplers") {
    OutcomePanel p = flat_panel(4, 3, 25.0, 41, 8.0);
    for (int i = 0; i < 4; ++i) p.offsets.row(i).setConstant(1000.0 * (i + 1));
    const PriorConfig prior{10.0, 0.0, 0.0, 10.0};
    const GridPosterior grid = grid_posterior_k0(p, prior);
    for (SamplerKind kind : {SamplerKind::Nuts, SamplerKind::RandomWalk}) {
        McConfig c;
        c.structure = {0, false, false};
        c.prior = prior;
        c.sampler = kind;
        c.chains = 4;
        c.draws = 2000;
        const McPosterior post = fit_mc(p, c);
        for (int i = 0; i < 4; ++i) {
            double mu = 0.0;
            for (const auto& d : post.draws) mu += std::exp(d.alpha) * p.offsets(i, 0);
            mu /= post.draw_count();
            CHECK(mu == doctest::Approx(grid.mu_mean(i, 0)).epsilon(0.02));
        }
    }
}

TEST_CASE("fit_mc rejects malformed panels") {
    OutcomePanel p = flat_panel(4, 3, 5.0, 2);
    p.offsets(1, 1) = 0.0;
    CHECK_THROWS_AS(fit_mc(p, McConfig{}), Error);
}
