#include "stormfx/sampler.hpp"

#include "stormfx/error.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace stormfx {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxDeltaH = 1000.0;

double log_sum_exp(double a, double b) {
    if (a == -kInf) return b;
    if (b == -kInf) return a;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
}

struct PhasePoint {
    Eigen::VectorXd q;
    Eigen::VectorXd p;
    Eigen::VectorXd grad;  // of the log density
    double logp = 0.0;
};

class DualAveraging {
public:
    void set_mu(double mu) { mu_ = mu; }
    void restart() {
        counter_ = 0;
        s_bar_ = 0.0;
        x_bar_ = 0.0;
    }
    double learn(double accept, double target) {
        ++counter_;
        accept = std::min(accept, 1.0);
        const double eta = 1.0 / (counter_ + kT0);
        s_bar_ = (1.0 - eta) * s_bar_ + eta * (target - accept);
        const double x = mu_ - s_bar_ * std::sqrt(static_cast<double>(counter_)) / kGamma;
        const double x_eta = std::pow(static_cast<double>(counter_), -kKappa);
        x_bar_ = (1.0 - x_eta) * x_bar_ + x_eta * x;
        return std::exp(x);
    }
    double final_stepsize() const { return std::exp(x_bar_); }

private:
    static constexpr double kGamma = 0.05;
    static constexpr double kT0 = 10.0;
    static constexpr double kKappa = 0.75;
    double mu_ = 0.0;
    double s_bar_ = 0.0;
    double x_bar_ = 0.0;
    int counter_ = 0;
};

/// Doubling-window schedule for the diagonal metric.
class MetricWindows {
public:
    MetricWindows(int warmup, int dim) : warmup_{warmup}, mean_(Eigen::VectorXd::Zero(dim)), m2_(mean_) {
        if (warmup < 20) {
            active_ = false;
            return;
        }
        if (init_buffer_ + base_window_ + term_buffer_ > warmup) {
            init_buffer_ = static_cast<int>(0.15 * warmup);
            term_buffer_ = static_cast<int>(0.1 * warmup);
            base_window_ = warmup - (init_buffer_ + term_buffer_);
        }
        window_size_ = base_window_;
        next_window_ = init_buffer_ + window_size_ - 1;
    }

    /// Returns true when a window closed and `inv_metric` was updated.
    bool learn(Eigen::VectorXd& inv_metric, const Eigen::VectorXd& q) {
        if (!active_) {
            ++counter_;
            return false;
        }
        if (counter_ >= init_buffer_ && counter_ < warmup_ - term_buffer_ && counter_ != warmup_) {
            ++n_;
            const Eigen::VectorXd delta = q - mean_;
            mean_ += delta / n_;
            m2_ += delta.cwiseProduct(q - mean_);
        }
        if (counter_ == next_window_ && counter_ != warmup_) {
            compute_next_window();
            const double n = n_;
            const Eigen::VectorXd var = m2_ / (n - 1.0);
            inv_metric = (n / (n + 5.0)) * var.array() + 1e-3 * (5.0 / (n + 5.0));
            n_ = 0;
            mean_.setZero();
            m2_.setZero();
            ++counter_;
            return true;
        }
        ++counter_;
        return false;
    }

private:
    void compute_next_window() {
        if (next_window_ == warmup_ - term_buffer_ - 1) return;
        window_size_ *= 2;
        next_window_ = counter_ + window_size_;
        if (next_window_ != warmup_ - term_buffer_ - 1) {
            const int boundary = next_window_ + 2 * window_size_;
            if (boundary >= warmup_ - term_buffer_) next_window_ = warmup_ - term_buffer_ - 1;
        }
    }

    int warmup_;
    bool active_ = true;
    int init_buffer_ = 75;
    int term_buffer_ = 50;
    int base_window_ = 25;
    int window_size_ = 0;
    int next_window_ = 0;
    int counter_ = 0;
    int n_ = 0;
    Eigen::VectorXd mean_;
    Eigen::VectorXd m2_;
};

class Nuts {
public:
    Nuts(const LogDensityFn& density, int dim, int max_depth, Rng& rng)
        : density_{density}, max_depth_{max_depth}, rng_{rng},
          inv_metric_(Eigen::VectorXd::Ones(dim)) {}

    double stepsize = 1.0;
    bool divergent = false;
    int n_leapfrog = 0;
    double accept_stat = 0.0;
    long long gradient_evals = 0;

    Eigen::VectorXd& inv_metric() { return inv_metric_; }

    void evaluate(PhasePoint& z) {
        z.grad.resize(z.q.size());
        z.logp = density_(z.q, z.grad);
        ++gradient_evals;
        if (std::isnan(z.logp)) z.logp = -kInf;
        if (z.logp == -kInf) z.grad.setZero();
    }

    double hamiltonian(const PhasePoint& z) const {
        const double h = -z.logp + 0.5 * z.p.cwiseAbs2().dot(inv_metric_);
        return std::isnan(h) ? kInf : h;
    }

    Eigen::VectorXd p_sharp(const PhasePoint& z) const { return inv_metric_.cwiseProduct(z.p); }

    void sample_momentum(PhasePoint& z) {
        z.p.resize(z.q.size());
        for (Eigen::Index i = 0; i < z.p.size(); ++i) z.p(i) = normal_(rng_) / std::sqrt(inv_metric_(i));
    }

    void leapfrog(PhasePoint& z, double eps) {
        z.p += 0.5 * eps * z.grad;
        z.q += eps * inv_metric_.cwiseProduct(z.p);
        evaluate(z);
        z.p += 0.5 * eps * z.grad;
    }

    void init_stepsize(const PhasePoint& start) {
        PhasePoint z = start;
        sample_momentum(z);
        double h0 = hamiltonian(z);
        leapfrog(z, stepsize);
        double delta = h0 - hamiltonian(z);
        const int direction = delta > std::log(0.8) ? 1 : -1;
        while (true) {
            z = start;
            sample_momentum(z);
            h0 = hamiltonian(z);
            leapfrog(z, stepsize);
            delta = h0 - hamiltonian(z);
            if (direction == 1 && !(delta > std::log(0.8))) break;
            if (direction == -1 && !(delta < std::log(0.8))) break;
            stepsize = direction == 1 ? 2.0 * stepsize : 0.5 * stepsize;
            if (stepsize > 1e7) {
                fail(ErrorKind::Diagnostic, "step size diverged during initialization; the posterior looks improper");
            }
            if (stepsize < 1e-14) {
                fail(ErrorKind::Diagnostic, "step size collapsed to zero during initialization at log density " +
                                                std::to_string(start.logp));
            }
        }
    }

    PhasePoint transition(const PhasePoint& start) {
        PhasePoint z = start;
        sample_momentum(z);
        h0_ = hamiltonian(z);
        divergent = false;

        PhasePoint z_fwd = z;
        PhasePoint z_bck = z;
        PhasePoint z_sample = z;
        PhasePoint z_propose = z;

        Eigen::VectorXd p_fwd_fwd = z.p;
        Eigen::VectorXd p_sharp_fwd_fwd = p_sharp(z);
        Eigen::VectorXd p_fwd_bck = z.p;
        Eigen::VectorXd p_sharp_fwd_bck = p_sharp_fwd_fwd;
        Eigen::VectorXd p_bck_fwd = z.p;
        Eigen::VectorXd p_sharp_bck_fwd = p_sharp_fwd_fwd;
        Eigen::VectorXd p_bck_bck = z.p;
        Eigen::VectorXd p_sharp_bck_bck = p_sharp_fwd_fwd;
        Eigen::VectorXd rho = z.p;

        double log_sum_weight = 0.0;
        n_leapfrog = 0;
        sum_metro_prob_ = 0.0;
        const Eigen::Index dim = z.q.size();

        for (int depth = 0; depth < max_depth_; ++depth) {
            Eigen::VectorXd rho_fwd = Eigen::VectorXd::Zero(dim);
            Eigen::VectorXd rho_bck = Eigen::VectorXd::Zero(dim);
            bool valid = false;
            double log_sum_weight_subtree = -kInf;

            if (uniform_(rng_) > 0.5) {
                z = z_fwd;
                rho_bck = rho;
                p_bck_fwd = p_fwd_bck;
                p_sharp_bck_fwd = p_sharp_fwd_bck;
                valid = build_tree(depth, z, z_propose, p_sharp_fwd_bck, p_sharp_fwd_fwd, rho_fwd, p_fwd_bck,
                                   p_fwd_fwd, 1, log_sum_weight_subtree);
                z_fwd = z;
            } else {
                z = z_bck;
                rho_fwd = rho;
                p_fwd_bck = p_bck_fwd;
                p_sharp_fwd_bck = p_sharp_bck_fwd;
                valid = build_tree(depth, z, z_propose, p_sharp_bck_fwd, p_sharp_bck_bck, rho_bck, p_bck_fwd,
                                   p_bck_bck, -1, log_sum_weight_subtree);
                z_bck = z;
            }
            if (!valid) break;

            if (log_sum_weight_subtree > log_sum_weight) {
                z_sample = z_propose;
            } else if (uniform_(rng_) < std::exp(log_sum_weight_subtree - log_sum_weight)) {
                z_sample = z_propose;
            }
            log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);

            rho = rho_bck + rho_fwd;
            bool persist = criterion(p_sharp_bck_bck, p_sharp_fwd_fwd, rho);
            persist = persist && criterion(p_sharp_bck_bck, p_sharp_fwd_bck, rho_bck + p_fwd_bck);
            persist = persist && criterion(p_sharp_bck_fwd, p_sharp_fwd_fwd, rho_fwd + p_bck_fwd);
            if (!persist) break;
        }
        accept_stat = n_leapfrog > 0 ? sum_metro_prob_ / n_leapfrog : 0.0;
        return z_sample;
    }

private:
    static bool criterion(const Eigen::VectorXd& p_sharp_minus, const Eigen::VectorXd& p_sharp_plus,
                          const Eigen::VectorXd& rho) {
        return p_sharp_plus.dot(rho) > 0 && p_sharp_minus.dot(rho) > 0;
    }

    bool build_tree(int depth, PhasePoint& z, PhasePoint& z_propose, Eigen::VectorXd& p_sharp_beg,
                    Eigen::VectorXd& p_sharp_end, Eigen::VectorXd& rho, Eigen::VectorXd& p_beg,
                    Eigen::VectorXd& p_end, int sign, double& log_sum_weight) {
        if (depth == 0) {
            leapfrog(z, sign * stepsize);
            ++n_leapfrog;
            const double h = hamiltonian(z);
            if (h - h0_ > kMaxDeltaH) divergent = true;
            log_sum_weight = log_sum_exp(log_sum_weight, h0_ - h);
            sum_metro_prob_ += h0_ - h > 0 ? 1.0 : std::exp(h0_ - h);
            z_propose = z;
            p_sharp_beg = p_sharp(z);
            p_sharp_end = p_sharp_beg;
            rho += z.p;
            p_beg = z.p;
            p_end = p_beg;
            return !divergent;
        }
        const Eigen::Index dim = z.q.size();

        double log_sum_weight_init = -kInf;
        Eigen::VectorXd p_init_end(dim);
        Eigen::VectorXd p_sharp_init_end(dim);
        Eigen::VectorXd rho_init = Eigen::VectorXd::Zero(dim);
        if (!build_tree(depth - 1, z, z_propose, p_sharp_beg, p_sharp_init_end, rho_init, p_beg, p_init_end,
                        sign, log_sum_weight_init)) {
            return false;
        }

        PhasePoint z_propose_final = z;
        double log_sum_weight_final = -kInf;
        Eigen::VectorXd p_final_beg(dim);
        Eigen::VectorXd p_sharp_final_beg(dim);
        Eigen::VectorXd rho_final = Eigen::VectorXd::Zero(dim);
        if (!build_tree(depth - 1, z, z_propose_final, p_sharp_final_beg, p_sharp_end, rho_final, p_final_beg,
                        p_end, sign, log_sum_weight_final)) {
            return false;
        }

        const double log_sum_weight_subtree = log_sum_exp(log_sum_weight_init, log_sum_weight_final);
        log_sum_weight = log_sum_exp(log_sum_weight, log_sum_weight_subtree);
        if (log_sum_weight_final > log_sum_weight_subtree) {
            z_propose = z_propose_final;
        } else if (uniform_(rng_) < std::exp(log_sum_weight_final - log_sum_weight_subtree)) {
            z_propose = z_propose_final;
        }

        const Eigen::VectorXd rho_subtree = rho_init + rho_final;
        rho += rho_subtree;
        bool persist = criterion(p_sharp_beg, p_sharp_end, rho_subtree);
        persist = persist && criterion(p_sharp_beg, p_sharp_final_beg, rho_init + p_final_beg);
        persist = persist && criterion(p_sharp_init_end, p_sharp_end, rho_final + p_init_end);
        return persist;
    }

    const LogDensityFn& density_;
    int max_depth_;
    Rng& rng_;
    Eigen::VectorXd inv_metric_;
    std::normal_distribution<double> normal_{0.0, 1.0};
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    double h0_ = 0.0;
    double sum_metro_prob_ = 0.0;
};

std::string describe_state(const Eigen::VectorXd& q) {
    std::ostringstream out;
    out << "state [";
    for (Eigen::Index i = 0; i < std::min<Eigen::Index>(q.size(), 8); ++i) out << (i ? ", " : "") << q(i);
    if (q.size() > 8) out << ", ... (" << q.size() << " values)";
    out << "]";
    return out.str();
}

} // namespace

ChainResult run_nuts(const LogDensityFn& density, const Eigen::VectorXd& init, const SamplerConfig& config,
                     Rng& rng) {
    require(config.warmup >= 0 && config.draws >= 1, "need warmup >= 0 and at least one draw");
    require(config.max_depth >= 1, "max tree depth must be positive");
    const auto dim = static_cast<int>(init.size());
    Nuts nuts(density, dim, config.max_depth, rng);

    PhasePoint z;
    z.q = init;
    nuts.evaluate(z);
    if (!std::isfinite(z.logp) || !z.grad.allFinite()) {
        fail(ErrorKind::Diagnostic, "non-finite log density at the initial " + describe_state(init));
    }
    nuts.init_stepsize(z);

    DualAveraging averaging;
    averaging.set_mu(std::log(10.0 * nuts.stepsize));
    MetricWindows windows(config.warmup, dim);

    ChainResult result;
    result.draws.resize(dim, config.draws);
    result.log_density.resize(config.draws);
    double accept_sum = 0.0;
    double leapfrog_sum = 0.0;

    for (int it = 0; it < config.warmup + config.draws; ++it) {
        z = nuts.transition(z);
        if (it < config.warmup) {
            nuts.stepsize = averaging.learn(nuts.accept_stat, config.target_accept);
            if (windows.learn(nuts.inv_metric(), z.q)) {
                nuts.init_stepsize(z);
                averaging.set_mu(std::log(10.0 * nuts.stepsize));
                averaging.restart();
            }
            if (it + 1 == config.warmup) nuts.stepsize = averaging.final_stepsize();
            if (!(nuts.stepsize > 1e-14) || !std::isfinite(nuts.stepsize)) {
                fail(ErrorKind::Diagnostic, "step size collapsed during warmup at " + describe_state(z.q));
            }
            continue;
        }
        const int d = it - config.warmup;
        result.draws.col(d) = z.q;
        result.log_density(d) = z.logp;
        accept_sum += nuts.accept_stat;
        leapfrog_sum += nuts.n_leapfrog;
        if (nuts.divergent) ++result.divergences;
    }
    result.inv_metric = nuts.inv_metric();
    result.stepsize = nuts.stepsize;
    result.mean_accept = accept_sum / config.draws;
    result.mean_leapfrog = leapfrog_sum / config.draws;
    result.gradient_evals = nuts.gradient_evals;
    return result;
}

} // namespace stormfx
