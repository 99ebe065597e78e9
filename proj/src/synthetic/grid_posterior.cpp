#include "stormfx/synthetic.hpp"

#include "stormfx/error.hpp"
#include "stormfx/negative_binomial.hpp"

#include <algorithm>
#include <cmath>

namespace stormfx {

namespace {

struct GridResult {
    Eigen::MatrixXd weight;  // normalized, alpha rows x log-eta columns
    Eigen::VectorXd alpha;
    Eigen::VectorXd log_eta;
};

GridResult evaluate_grid(const OutcomePanel& panel, const PriorConfig& prior, Eigen::Vector2d a_range,
                         Eigen::Vector2d l_range, int resolution) {
    GridResult g;
    g.alpha = Eigen::VectorXd::LinSpaced(resolution, a_range(0), a_range(1));
    g.log_eta = Eigen::VectorXd::LinSpaced(resolution, l_range(0), l_range(1));
    g.weight.resize(resolution, resolution);
    for (int a = 0; a < resolution; ++a) {
        for (int l = 0; l < resolution; ++l) {
            const double eta = std::exp(g.log_eta(l));
            double lp = 0.0;
            for (int i = 0; i < panel.units(); ++i) {
                for (int t = 0; t < panel.periods(); ++t) {
                    if (panel.treated_mask(i, t)) continue;
                    lp += nb_logpmf(panel.counts(i, t), std::exp(g.alpha(a)) * panel.offsets(i, t), eta);
                }
            }
            if (prior.intercept_sd > 0) lp -= 0.5 * std::pow(g.alpha(a) / prior.intercept_sd, 2);
            if (prior.log_dispersion_sd > 0) {
                lp -= 0.5 * std::pow(g.log_eta(l) / prior.log_dispersion_sd, 2);
            } else {
                lp += g.log_eta(l);
            }
            g.weight(a, l) = lp;
        }
    }
    const double top = g.weight.maxCoeff();
    require(std::isfinite(top), "grid posterior has no finite point");
    g.weight = (g.weight.array() - top).exp().matrix();
    g.weight /= g.weight.sum();
    return g;
}

double edge_mass(const Eigen::VectorXd& marginal, bool low) {
    return low ? marginal(0) : marginal(marginal.size() - 1);
}

} // namespace

GridPosterior grid_posterior_k0(const OutcomePanel& panel, const PriorConfig& prior, const GridOptions& options) {
    validate_panel(panel);
    require(panel.units() * panel.periods() <= 20, "grid oracle is limited to panels with N*T <= 20");
    require(options.resolution >= 21, "grid resolution too small");
    double ysum = 0.0;
    double psum = 0.0;
    for (int i = 0; i < panel.units(); ++i) {
        for (int t = 0; t < panel.periods(); ++t) {
            if (panel.treated_mask(i, t)) continue;
            ysum += panel.counts(i, t);
            psum += panel.offsets(i, t);
        }
    }
    require(psum > 0, "panel has no control cells");
    const double center = std::log(std::max(ysum, 0.5) / psum);
    Eigen::Vector2d a_range(center - 6.0, center + 6.0);
    Eigen::Vector2d l_range(-8.0, 12.0);

    for (int attempt = 0; attempt <= options.max_widenings + 4; ++attempt) {
        const GridResult g = evaluate_grid(panel, prior, a_range, l_range, options.resolution);
        const Eigen::VectorXd ma = g.weight.rowwise().sum();
        const Eigen::VectorXd ml = g.weight.colwise().sum().transpose();
        const double a_mean = ma.dot(g.alpha);
        const double a_sd = std::sqrt(std::max(ma.dot(g.alpha.array().square().matrix()) - a_mean * a_mean, 0.0));
        const double boundary = edge_mass(ma, true) + edge_mass(ma, false) + edge_mass(ml, true) +
                                edge_mass(ml, false);
        bool changed = false;
        const double a_span = a_range(1) - a_range(0);
        const double l_span = l_range(1) - l_range(0);
        if (edge_mass(ma, true) > options.boundary_tol * 0.25) a_range(0) -= 0.5 * a_span, changed = true;
        if (edge_mass(ma, false) > options.boundary_tol * 0.25) a_range(1) += 0.5 * a_span, changed = true;
        if (edge_mass(ml, true) > options.boundary_tol * 0.25) l_range(0) -= 0.5 * l_span, changed = true;
        if (edge_mass(ml, false) > options.boundary_tol * 0.25) l_range(1) += 0.5 * l_span, changed = true;
        if (!changed && a_sd > 0 && a_span > 30.0 * a_sd) {
            // Too coarse in alpha: zoom to the bulk and re-check the edges.
            a_range = Eigen::Vector2d(a_mean - 12.0 * a_sd, a_mean + 12.0 * a_sd);
            changed = true;
        }
        if (changed) continue;

        GridPosterior out;
        out.alpha_mean = a_mean;
        out.log_eta_mean = ml.dot(g.log_eta);
        out.eta_mean = ml.dot(g.log_eta.array().exp().matrix());
        const double rate_mean = ma.dot(g.alpha.array().exp().matrix());
        out.mu_mean = panel.offsets * rate_mean;
        out.boundary_mass = boundary;
        out.grid_points = options.resolution * options.resolution;
        out.alpha_range = a_range;
        out.log_eta_range = l_range;
        return out;
    }
    fail(ErrorKind::NotConverged, "grid posterior mass did not settle inside the grid after widening");
}

} // namespace stormfx
