#include "stormfx/mc_model.hpp"

#include "stormfx/error.hpp"
#include "stormfx/negative_binomial.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace stormfx {

namespace {

constexpr double kMaxLogMean = 600.0;
constexpr double kMaxLogEta = 40.0;
constexpr double kMinLogEta = -25.0;
constexpr int kTailSumLimit = 4000;

} // namespace

McParams McParams::zeros(int units, int periods, int factors) {
    McParams p;
    p.gamma = Eigen::VectorXd::Zero(units);
    p.psi = Eigen::VectorXd::Zero(periods);
    p.U = Eigen::MatrixXd::Zero(factors, units);
    p.V = Eigen::MatrixXd::Zero(factors, periods);
    return p;
}

double log_mean(const McParams& params, int i, int t, double offset) {
    require(std::isfinite(offset) && offset > 0, "population offset must be positive");
    require(i >= 0 && i < params.gamma.size() && t >= 0 && t < params.psi.size(),
            "cell index out of range");
    double lm = params.alpha + params.gamma(i) + params.psi(t) + std::log(offset);
    if (params.U.rows() > 0) lm += params.U.col(i).dot(params.V.col(t));
    return lm;
}

Eigen::MatrixXd log_mean_matrix(const McParams& params, const Eigen::MatrixXd& offsets) {
    const auto n = params.gamma.size();
    const auto t = params.psi.size();
    require(offsets.rows() == n && offsets.cols() == t, "offset matrix shape mismatch");
    require((offsets.array() > 0).all(), "population offsets must be positive");
    Eigen::MatrixXd lm = offsets.array().log().matrix();
    lm.array() += params.alpha;
    lm.colwise() += params.gamma;
    lm.rowwise() += params.psi.transpose();
    if (params.U.rows() > 0) lm.noalias() += params.U.transpose() * params.V;
    return lm;
}

double control_loglik(const OutcomePanel& panel, const McParams& params) {
    require(panel.counts.rows() == params.gamma.size() && panel.counts.cols() == params.psi.size(),
            "panel and parameter dimensions disagree");
    require(params.U.cols() == params.gamma.size() && params.V.cols() == params.psi.size() &&
                params.U.rows() == params.V.rows(),
            "factor matrix dimensions disagree");
    const Eigen::MatrixXd lm = log_mean_matrix(params, panel.offsets);
    double total = 0.0;
    for (Eigen::Index i = 0; i < lm.rows(); ++i) {
        for (Eigen::Index t = 0; t < lm.cols(); ++t) {
            if (panel.treated_mask(i, t)) continue;
            total += nb_logpmf(panel.counts(i, t), std::exp(lm(i, t)), params.eta);
        }
    }
    return total;
}

Eigen::VectorXd sum_to_zero(const Eigen::Ref<const Eigen::VectorXd>& free) {
    const auto n = free.size() + 1;
    Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
    if (n == 1) return z;
    // Householder reflection taking e_n to the normalized ones vector.
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    const double vv = 2.0 - 2.0 * rn;
    const double s = -rn * free.sum();  // v . [free; 0]
    const double c = 2.0 * s / vv;
    z.head(n - 1) = free.array() + c * rn;  // v_j = -rn for j < n
    z(n - 1) = -c * (1.0 - rn);
    return z;
}

Eigen::VectorXd sum_to_zero_adjoint(const Eigen::Ref<const Eigen::VectorXd>& grad) {
    const auto n = grad.size();
    if (n <= 1) return Eigen::VectorXd::Zero(0);
    const double rn = 1.0 / std::sqrt(static_cast<double>(n));
    const double vv = 2.0 - 2.0 * rn;
    const double vg = -rn * grad.head(n - 1).sum() + (1.0 - rn) * grad(n - 1);
    const double c = 2.0 * vg / vv;
    return (grad.head(n - 1).array() + c * rn).matrix();
}

McDensity::McDensity(const OutcomePanel& panel, const McStructure& structure,
                     const PriorConfig& prior)
    : n_{panel.units()}, t_{panel.periods()}, structure_{structure}, prior_{prior} {
    require(structure.factors >= 0, "factor count must be non-negative");
    require(structure.factors == 0 || structure.factors < std::min(n_, t_),
            "factor count must be below min(N, T)");
    validate_panel(panel);
    const int k = structure.factors;
    int off = 1;
    gamma_off_ = off;
    if (structure.unit_effects) off += n_ - 1;
    psi_off_ = off;
    if (structure.time_effects) off += t_ - 1;
    u_off_ = off;
    off += k * n_;
    v_off_ = off;
    off += k * t_;
    eta_off_ = off;
    dim_ = off + 1;

    weight_ = (panel.treated_mask.array() == 0).cast<double>();
    y_ = panel.counts.array() * weight_;
    log_offset_ = panel.offsets.array().log();
    const double controls = weight_.sum();
    require(controls > 0, "panel " + panel.storm_id + " has no control cells");
    const double ysum = y_.sum();
    const double psum = (panel.offsets.array() * weight_).sum();
    log_rate_ = std::log(std::max(ysum, 0.5) / psum);

    std::map<long long, double> freq;
    double ymax = 0;
    for (Eigen::Index i = 0; i < y_.rows(); ++i) {
        for (Eigen::Index t = 0; t < y_.cols(); ++t) {
            if (weight_(i, t) == 0) continue;
            freq[static_cast<long long>(y_(i, t))] += 1.0;
            sum_log_factorial_ += std::lgamma(y_(i, t) + 1.0);
            ymax = std::max(ymax, y_(i, t));
        }
    }
    for (const auto& [value, count] : freq) {
        if (value > 0) distinct_.emplace_back(static_cast<double>(value), count);
    }
    use_tail_sum_ = ymax <= kTailSumLimit;
    if (use_tail_sum_) {
        const auto m = static_cast<Eigen::Index>(ymax);
        tail_counts_ = Eigen::ArrayXd::Zero(m);
        tail_index_ = Eigen::ArrayXd::LinSpaced(m, 0.0, static_cast<double>(m - 1));
        for (const auto& [value, count] : distinct_) {
            tail_counts_.head(static_cast<Eigen::Index>(value)) += count;
        }
    }
}

McParams McDensity::unpack(const Eigen::VectorXd& q) const {
    require(q.size() == dim_, "parameter vector has the wrong length");
    const int k = structure_.factors;
    McParams p = McParams::zeros(n_, t_, k);
    p.alpha = q(0);
    if (structure_.unit_effects) p.gamma = sum_to_zero(q.segment(gamma_off_, n_ - 1));
    if (structure_.time_effects) p.psi = sum_to_zero(q.segment(psi_off_, t_ - 1));
    if (k > 0) {
        p.U = Eigen::Map<const Eigen::MatrixXd>(q.data() + u_off_, k, n_);
        p.V = Eigen::Map<const Eigen::MatrixXd>(q.data() + v_off_, k, t_);
    }
    p.eta = std::exp(q(eta_off_));
    return p;
}

Eigen::VectorXd McDensity::pack(const McParams& params) const {
    const int k = structure_.factors;
    require(params.gamma.size() == n_ && params.psi.size() == t_ && params.U.rows() == k &&
                params.U.cols() == n_ && params.V.rows() == k && params.V.cols() == t_,
            "parameter dimensions do not match the model");
    require(params.eta > 0, "dispersion must be positive");
    Eigen::VectorXd q(dim_);
    double alpha = params.alpha;
    if (structure_.unit_effects) {
        const double mean = params.gamma.mean();
        alpha += mean;
        q.segment(gamma_off_, n_ - 1) =
            sum_to_zero_adjoint((params.gamma.array() - mean).matrix());
    } else {
        alpha += params.gamma.mean();
    }
    if (structure_.time_effects) {
        const double mean = params.psi.mean();
        alpha += mean;
        q.segment(psi_off_, t_ - 1) = sum_to_zero_adjoint((params.psi.array() - mean).matrix());
    } else {
        alpha += params.psi.mean();
    }
    q(0) = alpha;
    if (k > 0) {
        Eigen::Map<Eigen::MatrixXd>(q.data() + u_off_, k, n_) = params.U;
        Eigen::Map<Eigen::MatrixXd>(q.data() + v_off_, k, t_) = params.V;
    }
    q(eta_off_) = std::log(params.eta);
    return q;
}

double McDensity::evaluate(const Eigen::VectorXd& q) const {
    Eigen::VectorXd scratch(dim_);
    return evaluate(q, scratch);
}

double McDensity::evaluate(const Eigen::VectorXd& q, Eigen::VectorXd& grad) const {
    constexpr double kInvalid = -std::numeric_limits<double>::infinity();
    grad.setZero(dim_);
    if (!q.allFinite()) return kInvalid;
    const int k = structure_.factors;
    const double log_eta = q(eta_off_);
    if (log_eta > kMaxLogEta || log_eta < kMinLogEta) return kInvalid;
    const double eta = std::exp(log_eta);

    Eigen::VectorXd gamma = Eigen::VectorXd::Zero(n_);
    Eigen::VectorXd psi = Eigen::VectorXd::Zero(t_);
    if (structure_.unit_effects) gamma = sum_to_zero(q.segment(gamma_off_, n_ - 1));
    if (structure_.time_effects) psi = sum_to_zero(q.segment(psi_off_, t_ - 1));
    const Eigen::Map<const Eigen::MatrixXd> U(q.data() + u_off_, k, n_);
    const Eigen::Map<const Eigen::MatrixXd> V(q.data() + v_off_, k, t_);

    thread_local Eigen::MatrixXd lm;
    thread_local Eigen::MatrixXd g;
    thread_local Eigen::ArrayXXd mu;
    thread_local Eigen::ArrayXXd a;
    thread_local Eigen::ArrayXXd inv;
    if (k > 0) {
        lm.noalias() = U.transpose() * V;
        lm.array() += log_offset_;
    } else {
        lm = log_offset_.matrix();
    }
    lm.array() += q(0);
    lm.colwise() += gamma;
    lm.rowwise() += psi.transpose();
    lm.array() *= weight_;
    if (!(lm.maxCoeff() <= kMaxLogMean)) return kInvalid;

    mu = lm.array().exp();
    inv = (mu + eta).inverse();
    if (eta < 1e6) {
        a = (mu + eta).log() - log_eta;
    } else {
        a = (mu / eta).log1p();
    }
    double lp = (weight_ * (y_ * (lm.array() - log_eta - a) - eta * a)).sum();
    double d_eta = (weight_ * ((mu - y_) * inv - a)).sum();
    g = (weight_ * (y_ - (y_ + eta) * mu * inv)).matrix();

    if (use_tail_sum_) {
        if (tail_counts_.size() > 0) {
            const Eigen::ArrayXd shifted = tail_index_ + eta;
            lp += (tail_counts_ * shifted.log()).sum();
            d_eta += (tail_counts_ / shifted).sum();
        }
    } else {
        for (const auto& [value, count] : distinct_) {
            lp += count * lgamma_ratio(eta, value);
            d_eta += count * digamma_ratio(eta, value);
        }
    }

    grad(0) = g.sum();
    if (structure_.unit_effects) {
        grad.segment(gamma_off_, n_ - 1) = sum_to_zero_adjoint(g.rowwise().sum());
    }
    if (structure_.time_effects) {
        grad.segment(psi_off_, t_ - 1) = sum_to_zero_adjoint(g.colwise().sum().transpose());
    }
    if (k > 0) {
        Eigen::Map<Eigen::MatrixXd>(grad.data() + u_off_, k, n_).noalias() = V * g.transpose();
        Eigen::Map<Eigen::MatrixXd>(grad.data() + v_off_, k, t_).noalias() = U * g;
    }
    grad(eta_off_) = eta * d_eta;

    auto gaussian = [&](int offset, int count, double sd) {
        if (sd <= 0 || count == 0) return;
        const auto seg = q.segment(offset, count);
        lp -= 0.5 * seg.squaredNorm() / (sd * sd);
        grad.segment(offset, count) -= seg / (sd * sd);
    };
    gaussian(0, 1, prior_.intercept_sd);
    if (structure_.unit_effects) gaussian(gamma_off_, n_ - 1, prior_.effect_sd);
    if (structure_.time_effects) gaussian(psi_off_, t_ - 1, prior_.effect_sd);
    gaussian(u_off_, k * n_, prior_.factor_sd);
    gaussian(v_off_, k * t_, prior_.factor_sd);
    if (prior_.log_dispersion_sd > 0) {
        gaussian(eta_off_, 1, prior_.log_dispersion_sd);
    } else {
        // Flat prior on eta > 0, expressed on log eta.
        lp += log_eta;
        grad(eta_off_) += 1.0;
    }
    if (!std::isfinite(lp) || !grad.allFinite()) {
        grad.setZero();
        return kInvalid;
    }
    return lp;
}

} // namespace stormfx

namespace stormfx {

PriorConfig PriorConfig::default_prior() {
    PriorConfig p;
    p.factor_sd = 1.0;
    return p;
}

} // namespace stormfx

