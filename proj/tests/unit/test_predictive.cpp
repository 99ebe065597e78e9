#include "doctest.h"

#include "stormfx/design.hpp"
#include "stormfx/error.hpp"
#include "stormfx/predictive_io.hpp"
#include "stormfx/predictive_model.hpp"

#include <algorithm>
#include <filesystem>
#include <random>

using namespace stormfx;

namespace {

std::vector<PredictorRow> make_rows(std::size_t n, std::uint64_t seed, bool with_state = false) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const char* states[] = {"AL", "FL", "LA", "NC", "TX"};
    std::vector<PredictorRow> rows;
    for (std::size_t k = 0; k < n; ++k) {
        PredictorRow r;
        r.storm_id = "S" + std::to_string(k % 7);
        r.county_id = "C" + std::to_string(k);
        const double w = u(rng);
        r.vmax_sust = 17.5 + 52.0 * w * w;
        r.sust_dur = 30.0 + 900.0 * u(rng);
        r.year = 1999 + static_cast<int>(u(rng) * 17);
        r.exposure = 1.0 + 9.0 * u(rng);
        r.poverty = 0.05 + 0.3 * u(rng);
        r.white_pct = 0.3 + 0.7 * u(rng);
        r.owner_occupied = 0.4 + 0.5 * u(rng);
        r.age_pct_65_plus = 0.08 + 0.2 * u(rng);
        r.no_grad = 0.05 + 0.3 * u(rng);
        r.median_age = 30.0 + 20.0 * u(rng);
        r.population_density = 10.0 + 3000.0 * u(rng);
        r.median_house_value = 50000.0 + 350000.0 * u(rng);
        r.cc1 = u(rng) < 0.4 ? 1 : 0;
        if (with_state) r.state = states[k % 5];
        r.precip = 5.0 + 200.0 * u(rng);
        rows.push_back(r);
    }
    return rows;
}

double linear_truth(const PredictorRow& r) {
    return 5.0 + 0.8 * r.vmax_sust + 0.3 * (r.year - 2005) + 0.01 * r.sust_dur + 20.0 * r.poverty - 10.0 * r.white_pct;
}

EffectDraws effects_from(const std::vector<PredictorRow>& rows, const Eigen::MatrixXd& y) {
    EffectDraws e;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        UnitEffect u{rows[k].storm_id, rows[k].county_id, 1e5, {}, {}};
        for (Eigen::Index m = 0; m < y.cols(); ++m) {
            u.rate.push_back(y(static_cast<Eigen::Index>(k), m));
            u.iee.push_back(static_cast<long long>(std::llround(y(static_cast<Eigen::Index>(k), m))));
        }
        e.units.push_back(u);
    }
    study_aggregates(e);
    return e;
}

} // namespace

TEST_CASE("design columns") {
    const auto rows = make_rows(200, 1, true);
    const Design d = build_design(rows, Variant::parse("spline"));
    CHECK(d.X.cols() == 17);
    CHECK(d.meta.columns.front() == "intercept");
    CHECK(d.meta.columns[1] == "vmax_sust_s1");
    CHECK(d.meta.columns[4] == "year_s1");
    CHECK(build_design(rows, Variant::parse("linear")).X.cols() == 15);
    CHECK(build_design(rows, Variant::parse("spline-state")).X.cols() == 21);
    CHECK(build_design(rows, Variant::parse("spline-precip")).X.cols() == 19);
    CHECK(build_design(rows, Variant::parse("spline-stratified")).X.cols() == 34);
    for (const auto& v : cv_variants()) CHECK(Variant::parse(v.name()) == v);
    CHECK(cv_variants().size() == 6);
    CHECK_THROWS_AS(Variant::parse("cubic"), Error);
}

TEST_CASE("zero-variance predictor is dropped with a warning") {
    auto rows = make_rows(100, 2);
    for (auto& r : rows) r.median_age = 41.0;
    const Design d = build_design(rows, Variant::parse("linear"));
    CHECK(d.X.cols() == 14);
    CHECK(d.meta.dropped == std::vector<std::string>{"median_age"});
    CHECK_FALSE(d.meta.warnings.empty());
}

TEST_CASE("hurricane indicator is strict at 33 m/s") {
    auto rows = make_rows(60, 3);
    rows[0].vmax_sust = 33.0;
    rows[1].vmax_sust = 33.01;
    const Design d = build_design(rows, Variant::parse("linear-stratified"));
    const auto it = std::find(d.meta.columns.begin(), d.meta.columns.end(), "hurricane:intercept");
    REQUIRE(it != d.meta.columns.end());
    const auto col = it - d.meta.columns.begin();
    CHECK(d.X(0, col) == 0.0);
    CHECK(d.X(1, col) == 1.0);
}

TEST_CASE("unseen state levels") {
    const auto rows = make_rows(100, 4, true);
    const DesignMetadata meta = learn_design(rows, Variant::parse("linear-state"));
    auto fresh = make_rows(3, 5, true);
    fresh[0].state = "GA";
    CHECK_THROWS_AS(apply_design(fresh, meta), Error);
    const Eigen::MatrixXd x = apply_design(fresh, meta, true);
    for (const char* level : {"state_FL", "state_LA", "state_NC", "state_TX"}) {
        const auto col = std::find(meta.columns.begin(), meta.columns.end(), level) - meta.columns.begin();
        CHECK(x(0, col) * meta.scales[static_cast<std::size_t>(col)] + meta.centers[static_cast<std::size_t>(col)] ==
              doctest::Approx(0.0));
    }
}

TEST_CASE("conjugate draws") {
    std::mt19937_64 rng0(6);
    std::normal_distribution<double> z(0.0, 1.0);
    SUBCASE("intercept only") {
        const Eigen::MatrixXd X = Eigen::MatrixXd::Ones(3, 1);
        const Eigen::Vector3d y(1, 2, 3);
        const LinearSolver solver(X, {"intercept"});
        Rng rng(1);
        double sum = 0.0;
        const int n = 20000;
        for (int m = 0; m < n; ++m) sum += solver.draw(y, rng).beta(0);
        CHECK(sum / n == doctest::Approx(2.0).epsilon(0.01));
        CHECK(solver.least_squares(y)(0) == doctest::Approx(2.0));
    }
    SUBCASE("noiseless data gives the least-squares solution") {
        Eigen::MatrixXd X(40, 3);
        for (Eigen::Index k = 0; k < X.size(); ++k) X.data()[k] = z(rng0);
        const Eigen::Vector3d beta(1.5, -2.0, 0.25);
        const Eigen::VectorXd y = X * beta;
        const LinearSolver solver(X, {"a", "b", "c"});
        Rng rng(2);
        const auto d = solver.draw(y, rng);
        CHECK((d.beta - beta).norm() < 1e-10);
        CHECK(d.sigma2 < 1e-20);
    }
    SUBCASE("row permutation leaves the posterior unchanged") {
        Eigen::MatrixXd X(30, 2);
        Eigen::VectorXd y(30);
        for (int i = 0; i < 30; ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = z(rng0);
            y(i) = 2.0 + X(i, 1) + z(rng0);
        }
        Eigen::PermutationMatrix<Eigen::Dynamic> perm(30);
        perm.setIdentity();
        std::shuffle(perm.indices().data(), perm.indices().data() + 30, rng0);
        const LinearSolver a(X, {"i", "x"}), b(perm * X, {"i", "x"});
        CHECK((a.least_squares(y) - b.least_squares(perm * y)).norm() < 1e-12);
        Rng ra(3), rb(3);
        const int n = 20000;
        Eigen::Vector2d ma = Eigen::Vector2d::Zero(), mb = Eigen::Vector2d::Zero();
        Eigen::Matrix2d ca = Eigen::Matrix2d::Zero(), cb = Eigen::Matrix2d::Zero();
        for (int m = 0; m < n; ++m) {
            const auto da = a.draw(y, ra);
            const auto db = b.draw(perm * y, rb);
            CHECK(da.sigma2 == doctest::Approx(db.sigma2).epsilon(1e-10));
            ma += da.beta / n;
            mb += db.beta / n;
            ca += da.beta * da.beta.transpose() / n;
            cb += db.beta * db.beta.transpose() / n;
        }
        ca -= ma * ma.transpose();
        cb -= mb * mb.transpose();
        CHECK((ma - mb).norm() < 0.01);
        CHECK((ca - cb).norm() < 0.05 * ca.norm());
    }
    SUBCASE("rank deficiency names the columns") {
        Eigen::MatrixXd X(10, 3);
        for (int i = 0; i < 10; ++i) {
            X(i, 0) = 1.0;
            X(i, 1) = i;
            X(i, 2) = 2.0 * i + 1.0;
        }
        try {
            LinearSolver s(X, {"one", "i", "twice"});
            FAIL("expected an error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::RankDeficient);
        }
    }
}

TEST_CASE("draw m depends only on response draw m") {
    const auto rows = make_rows(80, 7);
    std::mt19937_64 rng(8);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd y(80, 5);
    for (int i = 0; i < 80; ++i) {
        for (int m = 0; m < 5; ++m) y(i, m) = linear_truth(rows[static_cast<std::size_t>(i)]) + 3.0 * z(rng);
    }
    const PredictiveFit a = fit_predictive_matrix(y, rows, Variant::parse("spline"), 11);
    Eigen::MatrixXd other = y;
    for (int m : {0, 1, 3, 4}) other.col(m).setRandom();
    const PredictiveFit b = fit_predictive_matrix(other, rows, Variant::parse("spline"), 11);
    CHECK(a.beta.row(2) == b.beta.row(2));
    CHECK(a.sigma2(2) == b.sigma2(2));
    CHECK(a.beta.row(1) != b.beta.row(1));

    const PredictiveFit single = fit_predictive_matrix(y.leftCols(1), rows, Variant::parse("spline"), 11);
    CHECK(single.draw_count() == 1);
    CHECK(single.beta.row(0) == a.beta.row(0));
}

TEST_CASE("draw-matched and plug-in fits") {
    const auto rows = make_rows(120, 9);
    std::mt19937_64 rng(10);
    std::normal_distribution<double> z(0.0, 1.0);
    Eigen::MatrixXd y(120, 200);
    for (int i = 0; i < 120; ++i) {
        const double truth = linear_truth(rows[static_cast<std::size_t>(i)]) + 2.0 * z(rng);
        for (int m = 0; m < 200; ++m) y(i, m) = truth + 6.0 * z(rng);
    }
    const EffectDraws e = effects_from(rows, y);
    const auto aligned = align_rows(e, rows);
    const PredictiveFit matched = fit_predictive(e, aligned, Variant::parse("linear"), 3);
    const PredictiveFit point = fit_predictive_point(e, aligned, Variant::parse("linear"), 3);
    CHECK(matched.draw_matched);
    CHECK_FALSE(point.draw_matched);
    CHECK(matched.draw_count() == 200);
    const auto vmax = std::find(matched.design.columns.begin(), matched.design.columns.end(), "vmax_sust") -
                      matched.design.columns.begin();
    const Eigen::VectorXd col = matched.beta.col(vmax);
    const auto s = summarize(std::vector<double>(col.begin(), col.end()));
    CHECK(s.ci_low > 0.0);
    const Eigen::VectorXd pcol = point.beta.col(vmax);
    const auto ps = summarize(std::vector<double>(pcol.begin(), pcol.end()));
    CHECK(s.ci_high - s.ci_low >= ps.ci_high - ps.ci_low);

    auto missing = rows;
    missing.pop_back();
    CHECK_THROWS_AS(align_rows(e, missing), Error);
}

TEST_CASE("zero effect: coefficient intervals cover zero") {
    int covered = 0, total = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto rows = make_rows(150, 100 + rep);
        std::mt19937_64 rng(200 + rep);
        std::normal_distribution<double> z(0.0, 1.0);
        Eigen::MatrixXd y(150, 100);
        for (Eigen::Index k = 0; k < y.size(); ++k) y.data()[k] = 0.0;
        for (int i = 0; i < 150; ++i) {
            const double e = z(rng);
            for (int m = 0; m < 100; ++m) y(i, m) = e + 0.5 * z(rng);
        }
        const PredictiveFit f = fit_predictive_matrix(y, rows, Variant::parse("linear"), 5);
        for (Eigen::Index j = 1; j < f.beta.cols(); ++j) {
            const Eigen::VectorXd c = f.beta.col(j);
            const auto s = summarize(std::vector<double>(c.begin(), c.end()));
            covered += (s.ci_low <= 0.0 && 0.0 <= s.ci_high) ? 1 : 0;
            ++total;
        }
    }
    CHECK(static_cast<double>(covered) / total >= 0.90);
}

TEST_CASE("standardization round trip") {
    const auto rows = make_rows(90, 12, true);
    Eigen::MatrixXd y(90, 3);
    for (int i = 0; i < 90; ++i) y.row(i).setConstant(linear_truth(rows[static_cast<std::size_t>(i)]) + (i % 5));
    for (const char* v : {"linear", "spline-state", "spline-stratified"}) {
        const PredictiveFit f = fit_predictive_matrix(y, rows, Variant::parse(v), 1);
        const Eigen::MatrixXd std_pred = apply_design(rows, f.design) * f.beta.transpose();
        const Eigen::MatrixXd raw_pred = raw_design(rows, f.design) * raw_coefficients(f).transpose();
        const double scale = std_pred.cwiseAbs().maxCoeff();
        CHECK((std_pred - raw_pred).cwiseAbs().maxCoeff() <= 1e-9 * scale);
    }
}

TEST_CASE("prediction") {
    const auto rows = make_rows(100, 13);
    Eigen::MatrixXd y(100, 50);
    for (int i = 0; i < 100; ++i) y.row(i).setConstant(linear_truth(rows[static_cast<std::size_t>(i)]));
    const PredictiveFit f = fit_predictive_matrix(y, rows, Variant::parse("linear"), 2);
    const auto pred = predict_new(f, {rows[7]}, 4);
    CHECK(pred[0].summary.mean == doctest::Approx(linear_truth(rows[7])).epsilon(1e-6));
    CHECK(pred[0].draws.size() == 50);
    CHECK(predict_new(f, {rows[7]}, 4)[0].draws == pred[0].draws);

    const auto dir = std::filesystem::temp_directory_path() / "stormfx_test_predictive";
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    write_fit_archive(dir / "fit.json", f);
    const PredictiveFit back = read_fit_archive(dir / "fit.json");
    CHECK(back.beta == f.beta);
    CHECK(back.sigma2 == f.sigma2);
    CHECK(back.design.columns == f.design.columns);
    CHECK(predict_new(back, {rows[7]}, 4)[0].draws == pred[0].draws);

    write_wind_curve(dir, f);
    const CsvTable curve = CsvTable::read(dir / "wind_curve.csv");
    CHECK(curve.rows() == 54);
    CHECK(curve.number(0, "vmax_sust") == 17.0);
    CHECK(curve.number(53, "vmax_sust") == 70.0);
    CHECK(curve.number(53, "mean") - curve.number(0, "mean") == doctest::Approx(0.8 * 53.0).epsilon(1e-6));
    CHECK(coefficient_table(f).rows() == f.design.columns.size() + 1);
}

TEST_CASE("cross-validation") {
    const auto rows = make_rows(400, 14, true);
    std::mt19937_64 rng(15);
    std::normal_distribution<double> z(0.0, 2.0);
    std::vector<double> y;
    for (const auto& r : rows) y.push_back(linear_truth(r) + z(rng));

    const auto folds = fold_assignment(400, 5, 3);
    std::vector<int> sizes(5, 0);
    for (int f : folds) ++sizes[static_cast<std::size_t>(f)];
    CHECK(*std::min_element(sizes.begin(), sizes.end()) == 80);
    CHECK(fold_assignment(400, 5, 3) == folds);
    CHECK(fold_assignment(400, 5, 4) != folds);

    const auto res = cross_validate(y, rows, cv_variants(), 5, 21);
    REQUIRE(res.size() == 6);
    CHECK(cv_table("resp", res).rows() == 6);
    for (const auto& r : res) {
        CHECK(r.rows == 400);
        CHECK(r.rmse == doctest::Approx(2.0).epsilon(0.2));
    }
    CHECK(cross_validate(y, rows, cv_variants(), 5, 21)[3].rmse == res[3].rmse);

    auto rows2 = rows;
    auto y2 = y;
    auto folds2 = folds;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows2.push_back(rows[k]);
        rows2.back().county_id += "-dup";
        y2.push_back(y[k]);
        folds2.push_back(folds[k]);
    }
    const auto once = cross_validate_folds(y, rows, {Variant::parse("linear")}, folds, 5);
    const auto twice = cross_validate_folds(y2, rows2, {Variant::parse("linear")}, folds2, 5);
    CHECK(twice[0].rmse == doctest::Approx(once[0].rmse).epsilon(0.02));
}
