#include "stormfx/negative_binomial.hpp"

#include "stormfx/error.hpp"

#include <boost/math/special_functions/digamma.hpp>
#include <cmath>

namespace stormfx {

namespace {

constexpr double kDirectSumLimit = 64;
constexpr double kAsymptoticEta = 1e3;

bool is_count(double y) { return std::isfinite(y) && y >= 0 && y == std::floor(y); }

} // namespace

double lgamma_ratio(double eta, double y) {
    if (y == 0) return 0.0;
    if (y <= kDirectSumLimit) {
        double s = 0.0;
        for (int j = 0; j < static_cast<int>(y); ++j) s += std::log(eta + j);
        return s;
    }
    if (eta >= kAsymptoticEta) {
        // Stirling series for both terms, with the leading parts combined.
        const double x = eta;
        const double z = eta + y;
        const double lead = (x - 0.5) * std::log1p(y / x) + y * std::log(z) - y;
        auto tail = [](double v) {
            const double v2 = v * v;
            return 1.0 / (12.0 * v) - 1.0 / (360.0 * v * v2) + 1.0 / (1260.0 * v * v2 * v2);
        };
        return lead + tail(z) - tail(x);
    }
    return std::lgamma(eta + y) - std::lgamma(eta);
}

double digamma_ratio(double eta, double y) {
    if (y == 0) return 0.0;
    if (y <= kDirectSumLimit) {
        double s = 0.0;
        for (int j = 0; j < static_cast<int>(y); ++j) s += 1.0 / (eta + j);
        return s;
    }
    if (eta >= kAsymptoticEta) {
        const double x = eta;
        const double z = eta + y;
        auto tail = [](double v) {
            const double v2 = v * v;
            return -0.5 / v - 1.0 / (12.0 * v2) + 1.0 / (120.0 * v2 * v2) -
                   1.0 / (252.0 * v2 * v2 * v2);
        };
        return std::log1p(y / x) + tail(z) - tail(x);
    }
    return boost::math::digamma(eta + y) - boost::math::digamma(eta);
}

double nb_logpmf(double y, double mu, double eta) {
    require(is_count(y), "negative binomial outcome must be a non-negative integer");
    require(std::isfinite(mu) && mu > 0, "negative binomial mean must be positive and finite");
    require(std::isfinite(eta) && eta > 0, "negative binomial dispersion must be positive and finite");
    // lgamma(y+eta) - lgamma(eta) - y log(eta+mu), grouped to cancel the large
    // terms when eta is big.
    double core = 0.0;
    if (y <= kDirectSumLimit) {
        const double denom = eta + mu;
        for (int j = 0; j < static_cast<int>(y); ++j) core += std::log1p((j - mu) / denom);
    } else {
        core = lgamma_ratio(eta, y) - y * std::log(eta + mu);
    }
    return core + y * std::log(mu) - std::lgamma(y + 1.0) - eta * std::log1p(mu / eta);
}

long long sample_nb(Rng& rng, double mu, double eta) {
    require(std::isfinite(mu) && mu > 0 && std::isfinite(eta) && eta > 0,
            "negative binomial draw needs positive mean and dispersion");
    std::gamma_distribution<double> gamma(eta, mu / eta);
    const double lambda = gamma(rng);
    if (!(lambda > 0)) return 0;
    std::poisson_distribution<long long> poisson(lambda);
    return poisson(rng);
}

} // namespace stormfx
