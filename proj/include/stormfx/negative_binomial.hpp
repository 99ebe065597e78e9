#pragma once

#include "stormfx/rng.hpp"

namespace stormfx {

/// log Gamma(eta + y) - log Gamma(eta) for integer y >= 0, stable for very
/// large eta.
double lgamma_ratio(double eta, double y);

/// digamma(eta + y) - digamma(eta), stable for very large eta.
double digamma_ratio(double eta, double y);

/// Negative binomial log pmf in mean/dispersion form: Var = mu + mu^2 / eta.
double nb_logpmf(double y, double mu, double eta);

/// Gamma-Poisson draw with the same parameterization.
long long sample_nb(Rng& rng, double mu, double eta);

} // namespace stormfx
