#include "gearsim/bayes.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "gearsim/angles.hpp"
#include "gearsim/csv.hpp"
#include "gearsim/error.hpp"
#include "gearsim/probe_models.hpp"

namespace gearsim {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// n * log(p) with the convention 0 * log(0) = 0
double weighted_log(double n, double p) {
    if (n == 0.0) {
        return 0.0;
    }
    return p > 0.0 ? n * std::log(p) : kNegInf;
}

PosteriorGrid build_grid(Interval omega, std::size_t grid_size, std::span<const double> prior,
                         const std::function<double(double)>& log_likelihood) {
    detail::require(grid_size >= kMinGridSize, "grid_size must be >= 256");
    detail::require(omega.length() > 0.0 && omega.length() <= kTwoPi + 1e-12,
                    "interval length must lie in (0, 2 pi]");
    detail::require(prior.empty() || prior.size() == grid_size,
                    "prior must have one weight per grid node");

    PosteriorGrid grid;
    grid.omega = omega;
    grid.nodes.resize(grid_size);
    grid.log_weights.resize(grid_size);
    grid.weights.resize(grid_size);

    const double h = omega.length() / static_cast<double>(grid_size - 1);
    double peak    = kNegInf;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double theta = omega.lo + h * static_cast<double>(i);
        double lw          = log_likelihood(theta);
        if (!prior.empty()) {
            detail::require(prior[i] >= 0.0, "prior weights must be non-negative");
            lw += prior[i] > 0.0 ? std::log(prior[i]) : kNegInf;
        }
        grid.nodes[i]       = theta;
        grid.log_weights[i] = lw;
        peak                = std::max(peak, lw);
    }
    if (!(peak > kNegInf)) {
        detail::fail(ErrorCode::DegeneratePosterior,
                     "every grid node has zero likelihood; data contradict the model on this "
                     "interval");
    }

    // log-sum-exp with trapezoid end weights
    double total = 0.0;
    for (std::size_t i = 0; i < grid_size; ++i) {
        const double end_weight = (i == 0 || i + 1 == grid_size) ? 0.5 : 1.0;
        grid.weights[i]         = end_weight * std::exp(grid.log_weights[i] - peak);
        total += grid.weights[i];
    }
    for (auto& w : grid.weights) {
        w /= total;
    }
    return grid;
}

} // namespace

double likelihood(Label outcome, double theta, const ProbeSpec& spec) {
    if (outcome == Label::Lost) {
        return 1.0;
    }
    return arrival_probability(spec, outcome, theta);
}

PosteriorGrid posterior_from_counts(const ProbeSpec& spec, std::uint64_t n_h, std::uint64_t n_v,
                                    Interval omega, std::size_t grid_size,
                                    std::span<const double> prior) {
    const auto nh = static_cast<double>(n_h);
    const auto nv = static_cast<double>(n_v);
    return build_grid(omega, grid_size, prior, [&](double theta) {
        const double p_h = arrival_probability(spec, Label::H, theta);
        return weighted_log(nh, p_h) + weighted_log(nv, 1.0 - p_h);
    });
}

PosteriorGrid posterior(const Dataset& dataset, Interval omega, std::size_t grid_size,
                        std::span<const double> prior) {
    const ProbeSpec& spec = dataset.spec;
    if (is_single_mode(spec.strategy)) {
        return posterior_from_counts(spec, dataset.counts[Label::H], dataset.counts[Label::V],
                                     omega, grid_size, prior);
    }
    if (spec.strategy == Strategy::CoherentGear) {
        const auto pulses = static_cast<double>(dataset.counts[Label::Counts]);
        const auto nh     = static_cast<double>(dataset.counts.total_n_h);
        const auto nv     = static_cast<double>(dataset.counts.total_n_v);
        return build_grid(omega, grid_size, prior, [&](double theta) {
            const ChannelMeans means = coherent_channel_means(spec, theta);
            return weighted_log(nh, means.h) - pulses * means.h + weighted_log(nv, means.v) -
                   pulses * means.v;
        });
    }
    detail::fail(ErrorCode::InvalidArgument,
                 "posterior supports single-mode and coherent datasets only");
}

double estimate(const PosteriorGrid& grid) {
    double mean = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        mean += grid.weights[i] * grid.nodes[i];
    }
    return mean;
}

double uncertainty(const PosteriorGrid& grid, double theta_bar) {
    double var = 0.0;
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        const double d = grid.nodes[i] - theta_bar;
        var += grid.weights[i] * d * d;
    }
    return std::sqrt(var);
}

EstimationResult estimate_angle(const Dataset& dataset, Interval omega, std::size_t grid_size) {
    const PosteriorGrid grid = posterior(dataset, omega, grid_size);
    EstimationResult result;
    result.theta_bar   = std::clamp(estimate(grid), omega.lo, std::nextafter(omega.hi, omega.lo));
    result.delta_theta = std::max(uncertainty(grid, result.theta_bar), grid.step() / std::sqrt(12.0));
    if (is_single_mode(dataset.spec.strategy) ||
        dataset.spec.strategy == Strategy::CoherentGear) {
        result.m_used = fringe_multiplier(dataset.spec);
    }
    result.xi_used          = dataset.spec.xi;
    result.photons_consumed = dataset.records.size() - dataset.counts[Label::Lost];
    result.interval         = omega;
    return result;
}

std::string posterior_csv(const PosteriorGrid& grid) {
    std::string out = csv_preamble("posterior");
    out += "theta,probability\n";
    for (std::size_t i = 0; i < grid.nodes.size(); ++i) {
        out += fmt::format("{:.17g},{:.17g}\n", grid.nodes[i], grid.weights[i]);
    }
    return out;
}

} // namespace gearsim
