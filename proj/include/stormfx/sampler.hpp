#pragma once

#include "stormfx/rng.hpp"

#include <Eigen/Dense>
#include <functional>
#include <string>

namespace stormfx {

/// Log density with gradient over an unconstrained vector. Must return -inf
/// (and may leave the gradient arbitrary) outside the valid region.
using LogDensityFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

enum class SamplerKind { Nuts, RandomWalk };

SamplerKind parse_sampler_kind(const std::string& name);
std::string to_string(SamplerKind kind);

struct SamplerConfig {
    int warmup = 1000;
    int draws = 1000;
    int max_depth = 10;
    double target_accept = 0.8;  // NUTS; the random walk targets 0.234
    int rw_thin = 10;            // random-walk steps per stored draw
};

struct ChainResult {
    Eigen::MatrixXd draws;       // dim x draws
    Eigen::VectorXd log_density; // per stored draw
    Eigen::VectorXd inv_metric;
    double stepsize = 0.0;
    int divergences = 0;
    double mean_accept = 0.0;
    double mean_leapfrog = 0.0;  // per post-warmup transition (1 for the random walk)
    long long gradient_evals = 0;
};

/// No-U-turn sampler with multinomial trajectory sampling, a diagonal metric
/// adapted over doubling windows and dual-averaging step size.
ChainResult run_nuts(const LogDensityFn& density, const Eigen::VectorXd& init,
                     const SamplerConfig& config, Rng& rng);

/// Adaptive random-walk Metropolis with a diagonal proposal scale learned
/// during warmup.
ChainResult run_random_walk(const LogDensityFn& density, const Eigen::VectorXd& init,
                            const SamplerConfig& config, Rng& rng);

ChainResult run_sampler(SamplerKind kind, const LogDensityFn& density, const Eigen::VectorXd& init,
                        const SamplerConfig& config, Rng& rng);

} // namespace stormfx
