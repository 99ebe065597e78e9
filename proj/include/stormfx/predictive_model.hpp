#pragma once

#include "stormfx/design.hpp"
#include "stormfx/estimands.hpp"

#include <Eigen/QR>
#include <cstdint>
#include <string>
#include <vector>

namespace stormfx {

/// Least-squares factorization reused across draws. Construction fails with
/// RankDeficient, naming the columns that are linear combinations of the
/// others, and with InvalidInput when there are no residual degrees of freedom.
class LinearSolver {
public:
    LinearSolver(const Eigen::MatrixXd& X, const std::vector<std::string>& columns);

    Eigen::VectorXd least_squares(const Eigen::VectorXd& y) const;

    struct Draw {
        Eigen::VectorXd beta;
        double sigma2 = 0.0;
    };
    /// One exact draw from the flat-prior posterior: sigma^2 = RSS / chi^2_{n-p},
    /// beta ~ N(beta_hat, sigma^2 (X'X)^-1).
    Draw draw(const Eigen::VectorXd& y, Rng& rng) const;

    Eigen::Index rows() const { return n_; }
    Eigen::Index columns() const { return p_; }

private:
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::MatrixXd X_;
    Eigen::Index n_;
    Eigen::Index p_;
};

LinearSolver::Draw fit_linear_draw(const Eigen::VectorXd& theta_star, const Eigen::MatrixXd& X,
                                   const std::vector<std::string>& columns, Rng& rng);

struct PredictiveFit {
    DesignMetadata design;
    std::vector<std::string> row_keys;  // storm_id/county_id of training rows
    Eigen::MatrixXd beta;               // M x p, standardized-design coefficients
    Eigen::VectorXd sigma2;             // M
    std::uint64_t seed = 0;
    bool draw_matched = true;           // false: point estimates reused for every draw

    int draw_count() const { return static_cast<int>(sigma2.size()); }
};

/// Training rows aligned to effect units; every unit needs a predictor row.
std::vector<PredictorRow> align_rows(const EffectDraws& effects, const std::vector<PredictorRow>& rows);

/// Column m of `y` is the response for draw m; draw m uses its own RNG
/// stream derived from (seed, m), so it depends on nothing but y.col(m).
PredictiveFit fit_predictive_matrix(const Eigen::MatrixXd& y, const std::vector<PredictorRow>& rows,
                                    const Variant& variant, std::uint64_t seed);

/// Draw-matched fit: beta^(m) is fit against theta*^(m).
PredictiveFit fit_predictive(const EffectDraws& effects, const std::vector<PredictorRow>& rows,
                             const Variant& variant, std::uint64_t seed);

/// Plug-in fit: posterior-mean excess rates stand in for every draw.
PredictiveFit fit_predictive_point(const EffectDraws& effects, const std::vector<PredictorRow>& rows,
                                   const Variant& variant, std::uint64_t seed);

struct Prediction {
    std::string storm_id;
    std::string county_id;
    std::vector<double> draws;
    PosteriorSummary summary;
};

/// theta*_new^(m) = x beta^(m) + N(0, sigma^2^(m)).
std::vector<Prediction> predict_new(const PredictiveFit& fit, const std::vector<PredictorRow>& rows,
                                    std::uint64_t seed, double level = 0.95);

/// Expected value x beta^(m) without the residual noise (the fitted curve).
Eigen::MatrixXd linear_predictor(const PredictiveFit& fit, const std::vector<PredictorRow>& rows);

/// Coefficients on the raw (unstandardized) design columns, M x p.
Eigen::MatrixXd raw_coefficients(const PredictiveFit& fit);

/// The design without standardization, same column order.
Eigen::MatrixXd raw_design(const std::vector<PredictorRow>& rows, const DesignMetadata& meta);

struct CvResult {
    std::string variant;
    int folds = 0;
    std::size_t rows = 0;
    double rmse = 0.0;
};

/// Seeded shuffle, then fold = shuffled position mod folds.
std::vector<int> fold_assignment(std::size_t rows, int folds, std::uint64_t seed);

/// Out-of-sample pooled RMSE per variant; designs (knots, scaling, levels)
/// are learned on each training split.
std::vector<CvResult> cross_validate(const std::vector<double>& y, const std::vector<PredictorRow>& rows,
                                     const std::vector<Variant>& variants, int folds, std::uint64_t seed);

std::vector<CvResult> cross_validate_folds(const std::vector<double>& y, const std::vector<PredictorRow>& rows,
                                           const std::vector<Variant>& variants, const std::vector<int>& fold,
                                           int folds);

} // namespace stormfx
