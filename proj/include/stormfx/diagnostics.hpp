#pragma once

#include <vector>

namespace stormfx {

/// Split-chain potential scale reduction. Needs >= 2 chains of >= 4 draws;
/// returns 1.0 when every draw is the same value.
double split_rhat(const std::vector<std::vector<double>>& chains);

/// Effective sample size over all chains (Geyer initial monotone sequence on
/// the combined autocorrelation).
double effective_sample_size(const std::vector<std::vector<double>>& chains);

} // namespace stormfx
