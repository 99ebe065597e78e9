#pragma once

#include "stormfx/mc_model.hpp"
#include "stormfx/sampler.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace stormfx {

struct McConfig {
    McStructure structure;
    int chains = 2;
    int warmup = -1;  // negative: same as draws
    int draws = 1000;
    std::uint64_t seed = 1;
    PriorConfig prior = PriorConfig::default_prior();
    SamplerKind sampler = SamplerKind::Nuts;
    int max_depth = 10;
    int rw_thin = 10;
    double rhat_limit = 1.05;
    int threads = 0;  // 0: one per chain

    int effective_warmup() const { return warmup < 0 ? draws : warmup; }
};

struct MaskedCell {
    int unit = 0;    // row index into the panel
    int period = 0;  // column index
};

struct CellDiagnostics {
    double rhat = 1.0;
    double ess = 0.0;
};

struct ChainSummary {
    std::uint64_t sampler_seed = 0;
    std::uint64_t counterfactual_seed = 0;
    std::uint64_t init_seed = 0;
    double stepsize = 0.0;
    int divergences = 0;
    double mean_accept = 0.0;
    double mean_leapfrog = 0.0;
    long long gradient_evals = 0;
};

/// Posterior draws for one panel. Draw m = chain * draws + d.
struct McPosterior {
    std::string storm_id;
    McConfig config;
    std::vector<McParams> draws;
    std::vector<int> chain_of_draw;
    std::vector<double> log_density;
    std::vector<MaskedCell> cells;
    Eigen::MatrixXd log_means;                                        // cells x M
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counterfactuals;  // cells x M
    std::vector<CellDiagnostics> diagnostics;                         // per masked cell
    double max_rhat = 1.0;
    double min_ess = 0.0;
    bool converged = true;
    std::string warning;
    std::vector<ChainSummary> chains;

    int draw_count() const { return static_cast<int>(draws.size()); }
};

/// Samples the control-cell posterior and imputes Y_it(0) for every masked
/// cell. Results depend only on the panel, config and seed, never on thread
/// scheduling.
McPosterior fit_mc(const OutcomePanel& panel, const McConfig& config);

/// Start point used for chain `chain`: alpha from the control rate, small
/// Gaussian noise elsewhere, eta = 10.
Eigen::VectorXd initial_state(const McDensity& density, std::uint64_t seed);

} // namespace stormfx
