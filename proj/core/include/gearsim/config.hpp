#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "gearsim/fisher.hpp"
#include "gearsim/probe_spec.hpp"

namespace gearsim {

enum class ExperimentKind { Fringe, Estimate, Adaptive, Bounds, Entangled, EnhancementCurve, Coherent };

[[nodiscard]] std::string_view to_string(ExperimentKind kind) noexcept;
[[nodiscard]] ExperimentKind parse_experiment_kind(std::string_view name);

/// Evenly spaced angles from start to stop inclusive.
struct Sweep {
    double start = 0.0;
    double stop = 0.0;
    std::uint64_t points = 0;

    [[nodiscard]] std::vector<double> angles() const;
    friend bool operator==(const Sweep&, const Sweep&) = default;
};

/// One experiment, fully determined together with its seed.
struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Fringe;
    ProbeSpec probe;
    std::uint64_t seed = 0;
    std::string output;

    std::optional<Sweep> sweep;      ///< theta (theta_A for pairs)
    std::optional<Sweep> sweep_b;    ///< theta_B; absent means co-rotation
    std::optional<double> true_theta;
    std::uint64_t shots = 1000;      ///< records per point: nu, M or pulses
    std::uint64_t runs = 1;
    std::uint64_t grid_size = 1024;
    std::optional<std::array<double, 2>> interval;
    std::vector<std::uint64_t> checkpoints;

    std::array<std::uint64_t, 3> budgets{100, 1000, 10000};
    std::vector<int> available_m{1, 2, 5, 7, 9, 11, 21, 51, 101};

    std::vector<int> m_values{1, 2, 5, 7, 9, 11, 21, 51, 101};
    HeuristicVisibilityModel heuristic{1.0, 1.0, 0.026, 0.62};

    std::vector<int> fit_candidates;
    std::optional<int> fit_m;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Parses the JSON text of one experiment. Syntax and validation failures
/// throw Error(Config) whose message starts with "line N:".
[[nodiscard]] ExperimentConfig parse_config(std::string_view text);
[[nodiscard]] ExperimentConfig load_config(const std::string& path);

/// Pretty-printed JSON with every field; parse_config inverts it exactly.
[[nodiscard]] std::string serialize_config(const ExperimentConfig& config);

} // namespace gearsim
