#include "stormfx/predictive_model.hpp"

#include "stormfx/error.hpp"

#include <cmath>
#include <map>
#include <random>

namespace stormfx {

LinearSolver::LinearSolver(const Eigen::MatrixXd& X, const std::vector<std::string>& columns)
    : X_{X}, n_{X.rows()}, p_{X.cols()} {
    require(static_cast<Eigen::Index>(columns.size()) == p_, "column names do not match the design");
    require(p_ >= 1, "design has no columns");
    require(X.allFinite(), "design matrix has non-finite entries");
    qr_.setThreshold(1e-10);
    qr_.compute(X);
    if (qr_.rank() < p_) {
        std::string names;
        const auto& perm = qr_.colsPermutation().indices();
        for (Eigen::Index j = qr_.rank(); j < p_; ++j) {
            names += (names.empty() ? "" : ", ") + columns[static_cast<std::size_t>(perm(j))];
        }
        fail(ErrorKind::RankDeficient, "design is rank deficient (rank " + std::to_string(qr_.rank()) + " of " +
                                           std::to_string(p_) + "); collinear columns: " + names);
    }
    require(n_ > p_, "need more rows (" + std::to_string(n_) + ") than design columns (" + std::to_string(p_) + ")");
}

Eigen::VectorXd LinearSolver::least_squares(const Eigen::VectorXd& y) const {
    require(y.size() == n_, "response length does not match the design");
    return qr_.solve(y);
}

LinearSolver::Draw LinearSolver::draw(const Eigen::VectorXd& y, Rng& rng) const {
    const Eigen::VectorXd beta_hat = least_squares(y);
    const double rss = (y - X_ * beta_hat).squaredNorm();
    std::chi_squared_distribution<double> chi2(static_cast<double>(n_ - p_));
    std::normal_distribution<double> normal(0.0, 1.0);
    Draw d;
    d.sigma2 = rss / chi2(rng);
    Eigen::VectorXd z(p_);
    for (Eigen::Index j = 0; j < p_; ++j) z(j) = normal(rng);
    const auto R = qr_.matrixR().topLeftCorner(p_, p_).triangularView<Eigen::Upper>();
    const Eigen::VectorXd offset = R.solve(z) * std::sqrt(d.sigma2);
    d.beta = beta_hat + qr_.colsPermutation() * offset;
    return d;
}

LinearSolver::Draw fit_linear_draw(const Eigen::VectorXd& theta_star, const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& columns, Rng& rng) {
    return LinearSolver(X, columns).draw(theta_star, rng);
}

std::vector<PredictorRow> align_rows(const EffectDraws& effects, const std::vector<PredictorRow>& rows) {
    std::map<std::pair<std::string, std::string>, const PredictorRow*> index;
    for (const auto& r : rows) index[{r.storm_id, r.county_id}] = &r;
    std::vector<PredictorRow> aligned;
    for (const auto& u : effects.units) {
        const auto it = index.find({u.storm_id, u.county_id});
        if (it == index.end()) {
            fail(ErrorKind::InvalidInput, "no predictor row for treated county " + u.county_id + " of " + u.storm_id);
        }
        aligned.push_back(*it->second);
    }
    return aligned;
}

PredictiveFit fit_predictive_matrix(const Eigen::MatrixXd& y, const std::vector<PredictorRow>& rows,
                                    const Variant& variant, std::uint64_t seed) {
    require(y.rows() == static_cast<Eigen::Index>(rows.size()), "response rows do not match predictor rows");
    require(y.cols() >= 1, "need at least one draw");
    const Design design = build_design(rows, variant);
    const LinearSolver solver(design.X, design.meta.columns);
    PredictiveFit fit;
    fit.design = design.meta;
    fit.seed = seed;
    for (const auto& r : rows) fit.row_keys.push_back(r.storm_id + "/" + r.county_id);
    fit.beta.resize(y.cols(), design.X.cols());
    fit.sigma2.resize(y.cols());
    for (Eigen::Index m = 0; m < y.cols(); ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        const auto d = solver.draw(y.col(m), rng);
        fit.beta.row(m) = d.beta.transpose();
        fit.sigma2(m) = d.sigma2;
    }
    return fit;
}

PredictiveFit fit_predictive(const EffectDraws& effects, const std::vector<PredictorRow>& rows,
                             const Variant& variant, std::uint64_t seed) {
    require(!effects.units.empty(), "no effect draws");
    const auto aligned = align_rows(effects, rows);
    const std::size_t draws = effects.units.front().rate.size();
    Eigen::MatrixXd y(static_cast<Eigen::Index>(effects.units.size()), static_cast<Eigen::Index>(draws));
    for (std::size_t u = 0; u < effects.units.size(); ++u) {
        const auto& rate = effects.units[u].rate;
        if (rate.size() != draws) {
            fail(ErrorKind::InvalidInput, "storm " + effects.units[u].storm_id + " has " + std::to_string(rate.size()) +
                                              " draws, expected " + std::to_string(draws));
        }
        for (std::size_t m = 0; m < draws; ++m) y(static_cast<Eigen::Index>(u), static_cast<Eigen::Index>(m)) = rate[m];
    }
    return fit_predictive_matrix(y, aligned, variant, seed);
}

PredictiveFit fit_predictive_point(const EffectDraws& effects, const std::vector<PredictorRow>& rows,
                                   const Variant& variant, std::uint64_t seed) {
    require(!effects.units.empty(), "no effect draws");
    const auto aligned = align_rows(effects, rows);
    const auto point = point_estimates(effects);
    const auto draws = static_cast<Eigen::Index>(effects.units.front().rate.size());
    Eigen::MatrixXd y(static_cast<Eigen::Index>(point.size()), draws);
    for (std::size_t u = 0; u < point.size(); ++u) y.row(static_cast<Eigen::Index>(u)).setConstant(point[u]);
    auto fit = fit_predictive_matrix(y, aligned, variant, seed);
    fit.draw_matched = false;
    return fit;
}

Eigen::MatrixXd linear_predictor(const PredictiveFit& fit, const std::vector<PredictorRow>& rows) {
    const Eigen::MatrixXd X = apply_design(rows, fit.design);
    return X * fit.beta.transpose();  // rows x M
}

std::vector<Prediction> predict_new(const PredictiveFit& fit, const std::vector<PredictorRow>& rows,
                                    std::uint64_t seed, double level) {
    const Eigen::MatrixXd mean = linear_predictor(fit, rows);
    std::vector<Prediction> out(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out[r].storm_id = rows[r].storm_id;
        out[r].county_id = rows[r].county_id;
        out[r].draws.resize(static_cast<std::size_t>(fit.draw_count()));
    }
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int m = 0; m < fit.draw_count(); ++m) {
        Rng rng(derive_seed(seed, static_cast<std::uint64_t>(m)));
        const double sd = std::sqrt(fit.sigma2(m));
        for (std::size_t r = 0; r < rows.size(); ++r) {
            out[r].draws[static_cast<std::size_t>(m)] = mean(static_cast<Eigen::Index>(r), m) + sd * normal(rng);
        }
    }
    for (auto& p : out) p.summary = summarize(p.draws, level);
    return out;
}

Eigen::MatrixXd raw_design(const std::vector<PredictorRow>& rows, const DesignMetadata& meta) {
    Eigen::MatrixXd X = apply_design(rows, meta);
    const auto p = static_cast<Eigen::Index>(meta.base_columns.size());
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
        const auto b = static_cast<std::size_t>(j % p);
        X.col(j) = X.col(j) * meta.scales[b];
        if (j < p) {
            X.col(j).array() += meta.centers[b];
        }
    }
    if (meta.variant.stratified) {
        // Interaction columns carry the indicator, read off the first block's intercept.
        const Eigen::VectorXd h = X.col(p);  // hurricane:intercept
        for (Eigen::Index j = 0; j < p; ++j) X.col(p + j).array() += h.array() * meta.centers[static_cast<std::size_t>(j)];
    }
    return X;
}

Eigen::MatrixXd raw_coefficients(const PredictiveFit& fit) {
    const auto& meta = fit.design;
    const auto p = static_cast<Eigen::Index>(meta.base_columns.size());
    const auto blocks = meta.variant.stratified ? 2 : 1;
    require(meta.base_columns.front() == "intercept", "design has no intercept column");
    Eigen::MatrixXd raw = fit.beta;
    for (int b = 0; b < blocks; ++b) {
        const Eigen::Index off = b * p;
        for (Eigen::Index j = 1; j < p; ++j) {
            const auto s = static_cast<std::size_t>(j);
            raw.col(off + j) = fit.beta.col(off + j) / meta.scales[s];
            raw.col(off) -= fit.beta.col(off + j) * (meta.centers[s] / meta.scales[s]);
        }
    }
    return raw;
}

} // namespace stormfx
