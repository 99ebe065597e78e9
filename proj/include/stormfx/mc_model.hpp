#pragma once

#include "stormfx/panel.hpp"

#include <Eigen/Dense>
#include <vector>

namespace stormfx {

/// Parameters of the count matrix-completion model
///   log E[Y_it(0)] = alpha + gamma_i + psi_t + U_i . V_t + log p_it
struct McParams {
    double alpha = 0.0;
    Eigen::VectorXd gamma;  // N
    Eigen::VectorXd psi;    // T
    Eigen::MatrixXd U;      // K x N
    Eigen::MatrixXd V;      // K x T
    double eta = 1.0;       // NB dispersion, Var = mu + mu^2 / eta

    int factors() const { return static_cast<int>(U.rows()); }

    static McParams zeros(int units, int periods, int factors);
};

double log_mean(const McParams& params, int i, int t, double offset);

/// N x T matrix of log-means for every cell.
Eigen::MatrixXd log_mean_matrix(const McParams& params, const Eigen::MatrixXd& offsets);

/// Sum of NB log pmfs over cells with D_it = 0; treated cells contribute nothing.
double control_loglik(const OutcomePanel& panel, const McParams& params);

/// Independent Gaussian priors by parameter block; a standard deviation of 0
/// means the improper flat prior (for the dispersion: flat on eta > 0).
/// default_prior() is flat except for unit-variance factors.
struct PriorConfig {
    double intercept_sd = 0.0;
    double effect_sd = 0.0;
    double factor_sd = 0.0;
    double log_dispersion_sd = 0.0;

    static PriorConfig flat() { return {}; }
    static PriorConfig weak(double sd = 10.0) { return {sd, sd, sd, sd}; }
    static PriorConfig default_prior();
};

struct McStructure {
    int factors = 4;
    bool unit_effects = true;
    bool time_effects = true;
};

/// Log posterior of the model over an unconstrained vector. Unit and time
/// effects are sum-to-zero vectors (an isometric N-1 / T-1 dimensional
/// coordinate), the dispersion enters as log eta. Masked cells are excluded
/// from every quantity, including the cached count histogram.
class McDensity {
public:
    McDensity(const OutcomePanel& panel, const McStructure& structure, const PriorConfig& prior);

    int dim() const noexcept { return dim_; }
    const McStructure& structure() const noexcept { return structure_; }

    /// Log density (up to a constant) and its gradient; -inf when the point
    /// leaves the numerically valid region.
    double evaluate(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const;
    double evaluate(const Eigen::VectorXd& q) const;

    McParams unpack(const Eigen::VectorXd& q) const;
    /// Inverse of unpack for parameters already in the sum-to-zero gauge;
    /// effects are centred first.
    Eigen::VectorXd pack(const McParams& params) const;

    /// Grand control-cell rate, log(sum y / sum p).
    double log_control_rate() const noexcept { return log_rate_; }

private:
    int n_;
    int t_;
    McStructure structure_;
    PriorConfig prior_;
    int dim_ = 0;
    int gamma_off_ = 0;
    int psi_off_ = 0;
    int u_off_ = 0;
    int v_off_ = 0;
    int eta_off_ = 0;

    Eigen::ArrayXXd y_;        // counts with masked cells zeroed
    Eigen::ArrayXXd weight_;   // 1 for control cells, 0 for masked
    Eigen::ArrayXXd log_offset_;
    double log_rate_ = 0.0;
    double sum_log_factorial_ = 0.0;

    // Tail counts n_{>j} for the lgamma(y + eta) - lgamma(eta) sum.
    Eigen::ArrayXd tail_counts_;
    Eigen::ArrayXd tail_index_;
    // Distinct (value, multiplicity) pairs, used when counts are large.
    std::vector<std::pair<double, double>> distinct_;
    bool use_tail_sum_ = true;
};

/// Sum-to-zero isometry R^{n-1} -> {z in R^n : sum z = 0} and its adjoint.
Eigen::VectorXd sum_to_zero(const Eigen::Ref<const Eigen::VectorXd>& free);
Eigen::VectorXd sum_to_zero_adjoint(const Eigen::Ref<const Eigen::VectorXd>& grad);

} // namespace stormfx
