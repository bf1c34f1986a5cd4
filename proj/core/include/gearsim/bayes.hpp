#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gearsim/probe_spec.hpp"
#include "gearsim/sampler.hpp"

namespace gearsim {

/// Half-open angular interval [lo, hi) in unwrapped radians.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    [[nodiscard]] double length() const noexcept { return hi - lo; }
    [[nodiscard]] double center() const noexcept { return 0.5 * (lo + hi); }
    friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr std::size_t kDefaultGridSize = 1024;
inline constexpr std::size_t kMinGridSize     = 256;

/// Discretized a-posteriori distribution. Nodes are equally spaced and include
/// both endpoints; `weights` are trapezoid-rule probabilities summing to one.
struct PosteriorGrid {
    Interval omega;
    std::vector<double> nodes;
    std::vector<double> log_weights; ///< log likelihood + log prior, unnormalized
    std::vector<double> weights;

    [[nodiscard]] double step() const noexcept {
        return omega.length() / static_cast<double>(nodes.size() - 1);
    }
};

struct EstimationResult {
    double theta_bar = 0.0;
    double delta_theta = 0.0;
    int m_used = 1;
    double xi_used = 0.0;
    std::uint64_t photons_consumed = 0;
    Interval interval;
};

/// p(x | theta) of one single-photon outcome; Lost carries likelihood 1.
[[nodiscard]] double likelihood(Label outcome, double theta, const ProbeSpec& spec);

/// Log-domain posterior on `omega`. Single-mode datasets use their H/V counts,
/// coherent datasets their total port counts; Lost records are dropped. An
/// empty prior means the uniform 1/T prior. Throws DegeneratePosterior when
/// every node has zero likelihood.
[[nodiscard]] PosteriorGrid posterior(const Dataset& dataset, Interval omega,
                                      std::size_t grid_size = kDefaultGridSize,
                                      std::span<const double> prior = {});

/// Same, from sufficient statistics of a single-mode record.
[[nodiscard]] PosteriorGrid posterior_from_counts(const ProbeSpec& spec, std::uint64_t n_h,
                                                  std::uint64_t n_v, Interval omega,
                                                  std::size_t grid_size = kDefaultGridSize,
                                                  std::span<const double> prior = {});

/// Trapezoidal quadrature of theta P(theta | X).
[[nodiscard]] double estimate(const PosteriorGrid& grid);

/// Square root of the quadrature of (theta - theta_bar)^2 P(theta | X).
[[nodiscard]] double uncertainty(const PosteriorGrid& grid, double theta_bar);

/// Posterior, estimate and uncertainty in one call. The reported uncertainty is
/// floored at the grid quantization step / sqrt(12).
[[nodiscard]] EstimationResult estimate_angle(const Dataset& dataset, Interval omega,
                                              std::size_t grid_size = kDefaultGridSize);

/// "theta,probability" rows.
[[nodiscard]] std::string posterior_csv(const PosteriorGrid& grid);

} // namespace gearsim
