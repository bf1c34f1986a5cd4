#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "gearsim/probe_spec.hpp"

namespace gearsim {

/// Quantum Fisher information of one gear photon: 4 m^2.
[[nodiscard]] double qfi_single_photon(int m);

/// eta * 4 m^2.
[[nodiscard]] double qfi_with_losses(int m, double eta);

/// sin^2(2m theta + 2 xi) / (1 - V^2 cos^2(2m theta + 2 xi)), in [0, 1].
/// Throws DegenerateCase when the denominator vanishes (V = 1 on a fringe extremum).
[[nodiscard]] double c_function(int m, double visibility, double theta, double xi);

/// Classical Fisher information of the H/V measurement per arriving probe of a
/// single-mode strategy. Returns (2k)^2 for unit visibility, including on the
/// fringe extrema where the defining sum has a removable singularity, and
/// 4 k^2 V^2 C(theta) otherwise, with k the fringe multiplier.
[[nodiscard]] double cfi_polarization(const ProbeSpec& spec, double theta);

/// Exact Fisher information of one coherent pulse measured by photon counting
/// in both ports (closed form of the double sum).
[[nodiscard]] double cfi_coherent(const ProbeSpec& spec, double theta);

struct BoundReport {
    Strategy strategy = Strategy::GearSinglePhoton;
    int m = 1; ///< fringe multiplier of the law (m, N, mN or m_A +- m_B)
    double n_per_probe = 1.0;
    std::uint64_t nu = 1;
    double visibility = 1.0;
    double eta = 1.0;
    std::optional<double> theta_eval; ///< empty: angle-independent / optimal angle
    double qfi_per_photon = 0.0;
    double cfi_per_photon = 0.0;
    double crb = 0.0;
};

/// Cramer-Rao bound for `nu` repetitions of the probe in `spec`. Without an
/// angle the bound at the optimal (C = 1) angle is reported.
[[nodiscard]] BoundReport crb(const ProbeSpec& spec, std::uint64_t nu,
                              std::optional<double> theta = std::nullopt);

/// "strategy,m,N,nu,V,eta,theta,qfi,cfi,crb"
[[nodiscard]] std::string bound_csv_header();
[[nodiscard]] std::string bound_csv_row(const BoundReport& report);

/// V sqrt(eta) -> v0 sqrt(eta0) [1 - gamma m^delta], clipped at zero.
struct HeuristicVisibilityModel {
    double v0 = 1.0;
    double eta0 = 1.0;
    double gamma = 0.0;
    double delta = 0.0;

    friend bool operator==(const HeuristicVisibilityModel&,
                           const HeuristicVisibilityModel&) = default;
};

/// Fitted values reported for the q-plate family (gamma = 0.026, delta = 0.62).
[[nodiscard]] HeuristicVisibilityModel fitted_device_model();

[[nodiscard]] double heuristic_effective_factor(const HeuristicVisibilityModel& model, int m);

/// Delta theta^0 / Delta theta^m under the heuristic model: m (1 - gamma m^delta).
[[nodiscard]] double enhancement_ratio(int m, const HeuristicVisibilityModel& model);

struct CoherentFisherResult {
    double value = 0.0;
    double tail_mass = 0.0; ///< probability outside the truncated box
    bool truncation_warning = false;
};

/// Truncated double sum over (n_H, n_V) <= truncation of (dp/dtheta)^2 / p for the
/// ideal coherent gear law, with analytic derivatives.
[[nodiscard]] CoherentFisherResult coherent_cfi_numeric(int m, double mean_photons, double theta,
                                                        std::int64_t truncation);

} // namespace gearsim
