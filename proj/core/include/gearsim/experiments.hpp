#pragma once

#include <cstddef>
#include <functional>
#include <string>

#include "gearsim/config.hpp"

namespace gearsim {

/// Runs fn(i) for i in [0, n) on up to `threads` workers. Each index must
/// write only its own output slot; results never depend on scheduling.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

// Each command returns the CSV text it would write. Sweep point i and Monte
// Carlo run i draw from derive_seed(config.seed, i), so output is independent
// of the thread count.

/// Per angle: records, H/V counts, p_hat(H) and its binomial standard error;
/// followed by a fit section.
[[nodiscard]] std::string cmd_fringe(const ExperimentConfig& config, unsigned threads = 1);

/// Estimate summary, optional running-estimate section over `checkpoints`,
/// then the posterior grid.
[[nodiscard]] std::string cmd_estimate(const ExperimentConfig& config, unsigned threads = 1);

/// One protocol row per run; a single run appends its step report as
/// comment lines.
[[nodiscard]] std::string cmd_adaptive(const ExperimentConfig& config, unsigned threads = 1);

/// Bound rows across `m_values` plus the enhancement curve. The
/// enhancement-curve kind emits only the latter.
[[nodiscard]] std::string cmd_bounds(const ExperimentConfig& config);

/// Coincidence fractions over the (theta_A, theta_B) grid, or along
/// theta_A = theta_B when sweep_b is absent (then followed by an HH fit).
[[nodiscard]] std::string cmd_entangled(const ExperimentConfig& config, unsigned threads = 1);

/// Per angle: pulses, port totals and the normalized intensity
/// n_H / (n_H + n_V); followed by one fit section per port.
[[nodiscard]] std::string cmd_coherent(const ExperimentConfig& config, unsigned threads = 1);

/// Dispatches on config.kind.
[[nodiscard]] std::string run_experiment(const ExperimentConfig& config, unsigned threads = 1);

} // namespace gearsim
