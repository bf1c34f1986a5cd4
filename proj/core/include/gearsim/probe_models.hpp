#pragma once

#include <cstdint>
#include <span>

#include "gearsim/probe_spec.hpp"

namespace gearsim {

/// m = 2q + hwp_sign. Rejects hwp signs other than +-1 and results below 1.
[[nodiscard]] int gear_ratio(Charge q, int hwp_sign);

/// Gear ratio of the (single) arm of `spec`.
[[nodiscard]] inline int gear_ratio(const ProbeSpec& spec) {
    return gear_ratio(spec.q, spec.hwp_sign);
}

/// Integer k such that the single-mode fringe law of `spec` is cos^2(k*theta + xi):
/// 1 for polarization, m for gears, N for NOON, m*N for gear-NOON, m for coherent gears.
[[nodiscard]] int fringe_multiplier(const ProbeSpec& spec);

[[nodiscard]] bool is_single_mode(Strategy s) noexcept;

/// Outcome labels a record of this strategy can carry.
[[nodiscard]] std::span<const Label> outcome_space(Strategy s) noexcept;

/// p(label | theta) given that the probe arrived: label is H or V.
[[nodiscard]] double arrival_probability(const ProbeSpec& spec, Label label, double theta);

/// p(label | theta) over {H, V, Lost}: arrival probabilities scaled by eta, Lost = 1 - eta.
[[nodiscard]] double detection_probability(const ProbeSpec& spec, Label label, double theta);

/// Mean photon numbers (lambda_H, lambda_V) of the two output ports for one pulse.
struct ChannelMeans {
    double h = 0.0;
    double v = 0.0;
};

[[nodiscard]] ChannelMeans coherent_channel_means(const ProbeSpec& spec, double theta);

/// Product-Poisson law of one coherent pulse, evaluated in the log domain.
[[nodiscard]] double coherent_log_probability(const ProbeSpec& spec, double theta,
                                              std::int64_t n_h, std::int64_t n_v);
[[nodiscard]] double coherent_count_probability(const ProbeSpec& spec, double theta,
                                                std::int64_t n_h, std::int64_t n_v);

/// Coincidence probability for HH/HV/VH/VV given both photons arrive.
[[nodiscard]] double entangled_joint_probability(const ProbeSpec& spec, double theta_a,
                                                 double theta_b, Label pair_label);

/// Probability of LossA (only A lost), LossB, LossBoth, or of the pair surviving
/// (any coincidence label) under independent per-arm transmissivity.
[[nodiscard]] double pair_survival_probability(const ProbeSpec& spec, Label label);

struct ImperfectionModel {
    double eps_1 = 1.0;
    double eps_2 = 1.0;
    double eta = 1.0;
};

/// Weight of the pure term once the (1-eps1)(1-eps2) term is dropped and the
/// remaining mixture renormalized.
[[nodiscard]] double visibility_from_efficiencies(const ImperfectionModel& model);

} // namespace gearsim
