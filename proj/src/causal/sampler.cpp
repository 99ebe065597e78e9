#include "stormfx/sampler.hpp"

#include "stormfx/error.hpp"

namespace stormfx {

SamplerKind parse_sampler_kind(const std::string& name) {
    if (name == "nuts") return SamplerKind::Nuts;
    if (name == "rw" || name == "random-walk") return SamplerKind::RandomWalk;
    fail(ErrorKind::InvalidInput, "unknown sampler '" + name + "' (expected nuts or random-walk)");
}

std::string to_string(SamplerKind kind) {
    return kind == SamplerKind::Nuts ? "nuts" : "random-walk";
}

ChainResult run_sampler(SamplerKind kind, const LogDensityFn& density, const Eigen::VectorXd& init,
                        const SamplerConfig& config, Rng& rng) {
    if (kind == SamplerKind::RandomWalk) return run_random_walk(density, init, config, rng);
    return run_nuts(density, init, config, rng);
}

} // namespace stormfx
