#include "gearsim/rng.hpp"

#include <cmath>

#include "gearsim/error.hpp"

namespace gearsim {

std::uint64_t Rng::poisson(double mean) {
    detail::require(mean >= 0.0 && std::isfinite(mean), "Poisson mean must be finite and >= 0");
    if (mean == 0.0) {
        return 0;
    }
    if (mean < 10.0) {
        const double u = uniform();
        double mass    = std::exp(-mean);
        double cdf     = mass;
        std::uint64_t k = 0;
        // the cap only matters when the cdf saturates below u through rounding
        while (u > cdf && k < 1000) {
            ++k;
            mass *= mean / static_cast<double>(k);
            cdf += mass;
        }
        return k;
    }

    // PTRS, W. Hormann, "The transformed rejection method for generating
    // Poisson random variables", Insurance: Math. and Econ. 12 (1993).
    const double slam      = std::sqrt(mean);
    const double log_mean  = std::log(mean);
    const double b         = 0.931 + 2.53 * slam;
    const double a         = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r       = 0.9277 - 3.6224 / (b - 2.0);
    for (;;) {
        const double u  = uniform() - 0.5;
        const double v  = uniform();
        const double us = 0.5 - std::abs(u);
        const double k  = std::floor((2.0 * a / us + b) * u + mean + 0.43);
        if (us >= 0.07 && v <= v_r) {
            return static_cast<std::uint64_t>(k);
        }
        if (k < 0.0 || (us < 0.013 && v > us)) {
            continue;
        }
        if (std::log(v) + std::log(inv_alpha) - std::log(a / (us * us) + b) <=
            -mean + k * log_mean - std::lgamma(k + 1.0)) {
            return static_cast<std::uint64_t>(k);
        }
    }
}

} // namespace gearsim
