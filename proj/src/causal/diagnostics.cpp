#include "stormfx/diagnostics.hpp"

#include "stormfx/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stormfx {

namespace {

double mean_of(const std::vector<double>& x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double variance_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

void check_chains(const std::vector<std::vector<double>>& chains) {
    require(chains.size() >= 2, "need at least two chains");
    const auto n = chains.front().size();
    require(n >= 4, "need at least four draws per chain");
    for (const auto& c : chains) require(c.size() == n, "chains must have equal length");
}

bool all_constant(const std::vector<std::vector<double>>& chains) {
    const double first = chains.front().front();
    for (const auto& c : chains) {
        for (double v : c) {
            if (v != first) return false;
        }
    }
    return true;
}

// Autocovariance at lags 0..n-1, biased normalization.
std::vector<double> autocovariance(const std::vector<double>& x) {
    const auto n = x.size();
    const double m = mean_of(x);
    std::vector<double> acov(n, 0.0);
    for (std::size_t lag = 0; lag < n; ++lag) {
        double s = 0.0;
        for (std::size_t i = 0; i + lag < n; ++i) s += (x[i] - m) * (x[i + lag] - m);
        acov[lag] = s / static_cast<double>(n);
    }
    return acov;
}

} // namespace

double split_rhat(const std::vector<std::vector<double>>& chains) {
    check_chains(chains);
    if (all_constant(chains)) return 1.0;
    std::vector<std::vector<double>> halves;
    const auto n = chains.front().size();
    const auto half = n / 2;
    for (const auto& c : chains) {
        halves.emplace_back(c.begin(), c.begin() + static_cast<std::ptrdiff_t>(half));
        halves.emplace_back(c.end() - static_cast<std::ptrdiff_t>(half), c.end());
    }
    const double m = static_cast<double>(halves.size());
    const double len = static_cast<double>(half);
    std::vector<double> means;
    double w = 0.0;
    for (const auto& h : halves) {
        means.push_back(mean_of(h));
        w += variance_of(h);
    }
    w /= m;
    const double b = len * variance_of(means);
    if (w <= 0.0) return b > 0.0 ? std::numeric_limits<double>::infinity() : 1.0;
    const double var_plus = (len - 1.0) / len * w + b / len;
    return std::sqrt(var_plus / w);
}

double effective_sample_size(const std::vector<std::vector<double>>& chains) {
    check_chains(chains);
    const auto n = chains.front().size();
    const double total = static_cast<double>(n * chains.size());
    if (all_constant(chains)) return total;

    const double m = static_cast<double>(chains.size());
    std::vector<std::vector<double>> acovs;
    std::vector<double> means;
    double w = 0.0;
    for (const auto& c : chains) {
        acovs.push_back(autocovariance(c));
        means.push_back(mean_of(c));
        w += acovs.back()[0] * static_cast<double>(n) / static_cast<double>(n - 1);
    }
    w /= m;
    const double nd = static_cast<double>(n);
    const double var_plus = (nd - 1.0) / nd * w + variance_of(means);
    if (var_plus <= 0.0) return total;

    auto rho = [&](std::size_t lag) {
        double s = 0.0;
        for (const auto& a : acovs) s += a[lag];
        return 1.0 - (w - s / m) / var_plus;
    };
    // Sum of paired autocorrelations while positive, forced monotone.
    double tau = -1.0;
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < n; k += 2) {
        double pair = rho(k) + rho(k + 1);
        if (pair <= 0.0) break;
        pair = std::min(pair, previous);
        previous = pair;
        tau += 2.0 * pair;
    }
    tau = std::max(tau, 1.0 / std::log10(total));
    return total / tau;
}

} // namespace stormfx
