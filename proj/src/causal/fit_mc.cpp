#include "stormfx/fit_mc.hpp"

#include "stormfx/diagnostics.hpp"
#include "stormfx/error.hpp"
#include "stormfx/negative_binomial.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace stormfx {

Eigen::VectorXd initial_state(const McDensity& density, std::uint64_t seed) {
    Rng rng(seed);
    std::normal_distribution<double> noise(0.0, 0.1);
    const auto& s = density.structure();
    Eigen::VectorXd q(density.dim());
    for (Eigen::Index i = 0; i < q.size(); ++i) q(i) = noise(rng);
    McParams p = density.unpack(q);
    p.alpha = density.log_control_rate();
    p.eta = 10.0;
    if (!s.unit_effects) p.gamma.setZero();
    if (!s.time_effects) p.psi.setZero();
    return density.pack(p);
}

namespace {

struct ChainOutput {
    ChainResult result;
    Eigen::Matrix<long long, Eigen::Dynamic, Eigen::Dynamic> counterfactuals;
    Eigen::MatrixXd log_means;
    ChainSummary summary;
};

ChainOutput run_chain(const OutcomePanel& panel, const McDensity& density, const McConfig& config,
                      const std::vector<MaskedCell>& cells, int chain) {
    ChainOutput out;
    const std::string tag = "chain-" + std::to_string(chain);
    out.summary.sampler_seed = derive_seed(config.seed, tag + "/sampler");
    out.summary.counterfactual_seed = derive_seed(config.seed, tag + "/counterfactual");
    out.summary.init_seed = derive_seed(config.seed, tag + "/init");

    const LogDensityFn fn = [&density](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
        return density.evaluate(q, g);
    };
    SamplerConfig sc;
    sc.warmup = config.effective_warmup();
    sc.draws = config.draws;
    sc.max_depth = config.max_depth;
    sc.rw_thin = config.rw_thin;
    Rng rng(out.summary.sampler_seed);
    out.result = run_sampler(config.sampler, fn, initial_state(density, out.summary.init_seed), sc, rng);

    const auto ncell = static_cast<Eigen::Index>(cells.size());
    out.counterfactuals.resize(ncell, config.draws);
    out.log_means.resize(ncell, config.draws);
    Rng cf_rng(out.summary.counterfactual_seed);
    for (int d = 0; d < config.draws; ++d) {
        const McParams p = density.unpack(out.result.draws.col(d));
        for (Eigen::Index c = 0; c < ncell; ++c) {
            const auto& cell = cells[static_cast<std::size_t>(c)];
            const double lm = log_mean(p, cell.unit, cell.period, panel.offsets(cell.unit, cell.period));
            out.log_means(c, d) = lm;
            const double mu = std::exp(lm);
            if (!std::isfinite(mu)) {
                fail(ErrorKind::Diagnostic, "counterfactual mean overflow for unit " +
                                                panel.unit_ids[static_cast<std::size_t>(cell.unit)]);
            }
            out.counterfactuals(c, d) = sample_nb(cf_rng, mu, p.eta);
        }
    }
    out.summary.stepsize = out.result.stepsize;
    out.summary.divergences = out.result.divergences;
    out.summary.mean_accept = out.result.mean_accept;
    out.summary.mean_leapfrog = out.result.mean_leapfrog;
    out.summary.gradient_evals = out.result.gradient_evals;
    return out;
}

} // namespace

McPosterior fit_mc(const OutcomePanel& panel, const McConfig& config) {
    require(config.chains >= 1, "need at least one chain");
    require(config.draws >= 1, "need at least one draw per chain");
    require(config.rhat_limit > 1.0, "R-hat limit must exceed 1");
    const McDensity density(panel, config.structure, config.prior);

    McPosterior post;
    post.storm_id = panel.storm_id;
    post.config = config;
    for (int i = 0; i < panel.units(); ++i) {
        for (int t = 0; t < panel.periods(); ++t) {
            if (panel.treated_mask(i, t)) post.cells.push_back({i, t});
        }
    }

    std::vector<ChainOutput> outputs(static_cast<std::size_t>(config.chains));
    std::vector<std::exception_ptr> errors(outputs.size());
    const int workers = std::max(1, std::min(config.threads > 0 ? config.threads : config.chains, config.chains));
    std::atomic<int> next{0};
    auto worker = [&] {
        for (int c = next++; c < config.chains; c = next++) {
            try {
                outputs[static_cast<std::size_t>(c)] = run_chain(panel, density, config, post.cells, c);
            } catch (...) {
                errors[static_cast<std::size_t>(c)] = std::current_exception();
            }
        }
    };
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }

    const int total = config.chains * config.draws;
    const auto ncell = static_cast<Eigen::Index>(post.cells.size());
    post.log_means.resize(ncell, total);
    post.counterfactuals.resize(ncell, total);
    post.draws.reserve(static_cast<std::size_t>(total));
    for (int c = 0; c < config.chains; ++c) {
        const auto& out = outputs[static_cast<std::size_t>(c)];
        post.log_means.middleCols(static_cast<Eigen::Index>(c) * config.draws, config.draws) = out.log_means;
        post.counterfactuals.middleCols(static_cast<Eigen::Index>(c) * config.draws, config.draws) =
            out.counterfactuals;
        for (int d = 0; d < config.draws; ++d) {
            post.draws.push_back(density.unpack(out.result.draws.col(d)));
            post.chain_of_draw.push_back(c);
            post.log_density.push_back(out.result.log_density(d));
        }
        post.chains.push_back(out.summary);
    }

    post.max_rhat = 1.0;
    post.min_ess = static_cast<double>(total);
    if (config.chains >= 2 && config.draws >= 4) {
        for (Eigen::Index cell = 0; cell < ncell; ++cell) {
            std::vector<std::vector<double>> per_chain;
            for (int c = 0; c < config.chains; ++c) {
                const auto row = post.log_means.row(cell).segment(static_cast<Eigen::Index>(c) * config.draws,
                                                                  config.draws);
                per_chain.emplace_back(row.begin(), row.end());
            }
            CellDiagnostics diag{split_rhat(per_chain), effective_sample_size(per_chain)};
            post.max_rhat = std::max(post.max_rhat, std::isfinite(diag.rhat) ? diag.rhat : 1e300);
            post.min_ess = std::min(post.min_ess, diag.ess);
            post.diagnostics.push_back(diag);
        }
    } else {
        post.diagnostics.assign(post.cells.size(), CellDiagnostics{1.0, static_cast<double>(total)});
    }
    int divergences = 0;
    for (const auto& s : post.chains) divergences += s.divergences;
    std::ostringstream warn;
    if (post.max_rhat > config.rhat_limit) {
        post.converged = false;
        warn << "max split R-hat " << post.max_rhat << " exceeds " << config.rhat_limit;
    }
    if (divergences > 0) {
        if (!warn.str().empty()) warn << "; ";
        warn << divergences << " divergent transitions";
    }
    post.warning = warn.str();
    return post;
}

} // namespace stormfx
