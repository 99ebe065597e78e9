#include "stormfx/factor_select.hpp"

#include "stormfx/csv.hpp"
#include "stormfx/error.hpp"
#include "stormfx/svg.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>

namespace stormfx {

ScreeResult variance_explained(const OutcomePanel& panel, bool standardize, double target) {
    require(panel.units() >= 2 && panel.periods() >= 2, "PCA needs N >= 2 and T >= 2");
    Eigen::MatrixXd X = panel.counts.leftCols(panel.periods() - 1);
    const Eigen::RowVectorXd means = X.colwise().mean();
    X.rowwise() -= means;
    if (standardize) {
        for (Eigen::Index c = 0; c < X.cols(); ++c) {
            const double sd = std::sqrt(X.col(c).squaredNorm() / static_cast<double>(X.rows() - 1));
            if (sd > 0) X.col(c) /= sd;
        }
    }
    ScreeResult r;
    r.storm_id = panel.storm_id;
    const auto components = std::min(X.rows(), X.cols());
    const double scale = X.cwiseAbs().maxCoeff();
    if (!(scale > 0)) {
        r.fractions.assign(static_cast<std::size_t>(components), 0.0);
        r.cumulative.assign(static_cast<std::size_t>(components), 0.0);
        r.recommended_k = 1;
        return r;
    }
    Eigen::BDCSVD<Eigen::MatrixXd> svd(X / scale);
    const Eigen::VectorXd sv2 = svd.singularValues().array().square();
    const double total = sv2.sum();
    double running = 0.0;
    for (Eigen::Index j = 0; j < components; ++j) {
        const double f = sv2(j) / total;
        running += f;
        r.fractions.push_back(f);
        r.cumulative.push_back(std::min(running, 1.0));
    }
    r.recommended_k = recommend_k({r}, target).k;
    return r;
}

KRecommendation recommend_k(const std::vector<ScreeResult>& screes, double target) {
    require(!screes.empty(), "no scree results");
    require(target >= 0.0 && target < 1.0, "target fraction must be in [0, 1)");
    std::size_t len = screes.front().cumulative.size();
    for (const auto& s : screes) len = std::min(len, s.cumulative.size());
    require(len >= 1, "scree results are empty");
    KRecommendation rec;
    rec.mean_cumulative.assign(len, 0.0);
    for (const auto& s : screes) {
        for (std::size_t j = 0; j < len; ++j) rec.mean_cumulative[j] += s.cumulative[j];
    }
    for (double& v : rec.mean_cumulative) v /= static_cast<double>(screes.size());
    for (std::size_t j = 0; j < len; ++j) {
        if (rec.mean_cumulative[j] >= target) {
            rec.k = static_cast<int>(j) + 1;
            return rec;
        }
    }
    rec.k = static_cast<int>(len);
    rec.reached = false;
    rec.warning = "no K reaches the target fraction; returning T - 1 = " + std::to_string(len);
    return rec;
}

void write_scree(const std::filesystem::path& dir, const std::vector<ScreeResult>& screes,
                 const KRecommendation& recommendation) {
    CsvTable t({"storm_id", "component", "fraction", "cumulative"});
    svg::Chart chart{"Scree plot", "component", "cumulative fraction of variance", {}, false, false};
    for (const auto& s : screes) {
        svg::Series series{s.storm_id, {}, {}, false, true};
        for (std::size_t j = 0; j < s.fractions.size(); ++j) {
            t.add_row({s.storm_id, std::to_string(j + 1), format_double(s.fractions[j]), format_double(s.cumulative[j])});
            series.x.push_back(static_cast<double>(j + 1));
            series.y.push_back(s.cumulative[j]);
        }
        chart.series.push_back(series);
    }
    svg::Series mean{"mean across storms", {}, {}, false, false};
    for (std::size_t j = 0; j < recommendation.mean_cumulative.size(); ++j) {
        mean.x.push_back(static_cast<double>(j + 1));
        mean.y.push_back(recommendation.mean_cumulative[j]);
    }
    chart.series.push_back(mean);
    t.write(dir / "scree.csv");
    write_text(dir / "scree.svg", svg::render(chart));
}

} // namespace stormfx
