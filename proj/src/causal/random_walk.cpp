#include "stormfx/sampler.hpp"

#include "stormfx/error.hpp"

#include <cmath>

namespace stormfx {

ChainResult run_random_walk(const LogDensityFn& density, const Eigen::VectorXd& init,
                            const SamplerConfig& config, Rng& rng) {
    require(config.warmup >= 0 && config.draws >= 1, "need warmup >= 0 and at least one draw");
    require(config.rw_thin >= 1, "random-walk thinning must be positive");
    constexpr double kTarget = 0.234;
    const auto dim = init.size();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    Eigen::VectorXd grad(dim);
    Eigen::VectorXd q = init;
    double logp = density(q, grad);
    long long evals = 1;
    if (!std::isfinite(logp)) {
        fail(ErrorKind::Diagnostic, "non-finite log density at the random-walk initial state");
    }

    Eigen::VectorXd sd = Eigen::VectorXd::Constant(dim, 0.1);
    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(dim);
    Eigen::VectorXd m2 = Eigen::VectorXd::Zero(dim);
    long long n = 0;

    const long long warmup_steps = static_cast<long long>(config.warmup) * config.rw_thin;
    const long long draw_steps = static_cast<long long>(config.draws) * config.rw_thin;
    ChainResult result;
    result.draws.resize(dim, config.draws);
    result.log_density.resize(config.draws);
    double accepted = 0.0;
    Eigen::VectorXd proposal(dim);

    for (long long step = 0; step < warmup_steps + draw_steps; ++step) {
        const double scale = std::exp(log_scale);
        for (Eigen::Index i = 0; i < dim; ++i) proposal(i) = q(i) + scale * sd(i) * normal(rng);
        const double logp_new = density(proposal, grad);
        ++evals;
        const double log_ratio = std::isfinite(logp_new) ? logp_new - logp : -1e300;
        const double accept = log_ratio >= 0 ? 1.0 : std::exp(log_ratio);
        if (uniform(rng) < accept) {
            q = proposal;
            logp = logp_new;
        }
        if (step < warmup_steps) {
            log_scale += (accept - kTarget) / std::pow(static_cast<double>(step + 1), 0.6);
            // Proposal shape from the second half of warmup onwards.
            if (step >= warmup_steps / 4) {
                ++n;
                const Eigen::VectorXd delta = q - mean;
                mean += delta / static_cast<double>(n);
                m2 += delta.cwiseProduct(q - mean);
                if (n >= 50 && n % 50 == 0) {
                    sd = (m2 / static_cast<double>(n - 1)).array().sqrt().max(1e-6).matrix();
                    log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
                }
            }
            continue;
        }
        accepted += accept;
        const long long s = step - warmup_steps;
        if ((s + 1) % config.rw_thin == 0) {
            const auto d = static_cast<Eigen::Index>(s / config.rw_thin);
            result.draws.col(d) = q;
            result.log_density(d) = logp;
        }
    }
    result.inv_metric = sd.cwiseAbs2();
    result.stepsize = std::exp(log_scale);
    result.mean_accept = draw_steps > 0 ? accepted / static_cast<double>(draw_steps) : 0.0;
    result.mean_leapfrog = 1.0;
    result.gradient_evals = evals;
    return result;
}

} // namespace stormfx
