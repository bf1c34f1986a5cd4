#include "gearsim/probe_models.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "gearsim/error.hpp"

namespace gearsim {
namespace {

constexpr std::array<Label, 3> kSingleSpace{Label::H, Label::V, Label::Lost};
constexpr std::array<Label, 1> kCoherentSpace{Label::Counts};
constexpr std::array<Label, 7> kPairSpace{Label::HH,    Label::HV,    Label::VH,      Label::VV,
                                          Label::LossA, Label::LossB, Label::LossBoth};

void check_visibility(double v) {
    detail::require(v >= 0.0 && v <= 1.0, "visibility must lie in [0, 1]");
}

void check_transmissivity(double eta) {
    detail::require(eta > 0.0 && eta <= 1.0, "transmissivity must lie in (0, 1]");
}

double cos2(double x) {
    const double c = std::cos(x);
    return c * c;
}

double sin2(double x) {
    const double s = std::sin(x);
    return s * s;
}

double poisson_log_mass(double mean, std::int64_t n) {
    if (mean <= 0.0) {
        return n == 0 ? 0.0 : -std::numeric_limits<double>::infinity();
    }
    const auto nd = static_cast<double>(n);
    return nd * std::log(mean) - mean - std::lgamma(nd + 1.0);
}

} // namespace

int gear_ratio(Charge q, int hwp_sign) {
    detail::require(hwp_sign == 1 || hwp_sign == -1, "hwp_sign must be +1 or -1");
    const int m = q.twice() + hwp_sign;
    if (m < 1) {
        detail::fail(ErrorCode::InvalidArgument,
                     "gear ratio 2q + hwp_sign must be >= 1 (q = " + std::to_string(q.value()) +
                         ", sign = " + std::to_string(hwp_sign) + ")");
    }
    return m;
}

bool is_single_mode(Strategy s) noexcept {
    return s != Strategy::CoherentGear && s != Strategy::EntangledPair;
}

std::span<const Label> outcome_space(Strategy s) noexcept {
    switch (s) {
    case Strategy::CoherentGear: return kCoherentSpace;
    case Strategy::EntangledPair: return kPairSpace;
    default: return kSingleSpace;
    }
}

int fringe_multiplier(const ProbeSpec& spec) {
    switch (spec.strategy) {
    case Strategy::ClassicalPolarization: return 1;
    case Strategy::GearSinglePhoton:
    case Strategy::CoherentGear: return gear_ratio(spec);
    case Strategy::NoonPolarization:
        detail::require(spec.n_photons >= 1, "n_photons must be >= 1");
        return spec.n_photons;
    case Strategy::GearNoon:
        detail::require(spec.n_photons >= 1, "n_photons must be >= 1");
        return gear_ratio(spec) * spec.n_photons;
    case Strategy::EntangledPair: break;
    }
    detail::fail(ErrorCode::InvalidArgument, "entangled pairs have no single-mode fringe law");
}

double arrival_probability(const ProbeSpec& spec, Label label, double theta) {
    if (!is_single_mode(spec.strategy)) {
        detail::fail(ErrorCode::InvalidArgument,
                     "arrival_probability needs a single-mode strategy, got " +
                         std::string(to_string(spec.strategy)));
    }
    if (label != Label::H && label != Label::V) {
        detail::fail(ErrorCode::OutcomeOutsideSpace,
                     "label " + std::string(to_string(label)) + " is not an arrival outcome");
    }
    const double phase = fringe_multiplier(spec) * theta + spec.xi;
    double p_h         = cos2(phase);
    if (spec.strategy == Strategy::GearSinglePhoton) {
        check_visibility(spec.visibility);
        p_h = spec.visibility * p_h + 0.5 * (1.0 - spec.visibility);
    }
    return label == Label::H ? p_h : 1.0 - p_h;
}

double detection_probability(const ProbeSpec& spec, Label label, double theta) {
    if (!is_single_mode(spec.strategy)) {
        detail::fail(ErrorCode::InvalidArgument,
                     "detection_probability needs a single-mode strategy, got " +
                         std::string(to_string(spec.strategy)));
    }
    check_transmissivity(spec.transmissivity);
    if (label == Label::Lost) {
        return 1.0 - spec.transmissivity;
    }
    return spec.transmissivity * arrival_probability(spec, label, theta);
}

ChannelMeans coherent_channel_means(const ProbeSpec& spec, double theta) {
    detail::require(spec.strategy == Strategy::CoherentGear,
                    "coherent law needs strategy CoherentGear");
    detail::require(spec.mean_photons >= 0.0, "mean_photons must be >= 0");
    check_transmissivity(spec.transmissivity);
    const double v_h = spec.visibility;
    const double v_v = spec.visibility_v.value_or(spec.visibility);
    check_visibility(v_h);
    check_visibility(v_v);

    const double phase = gear_ratio(spec) * theta + spec.xi;
    const double scale = spec.transmissivity * spec.mean_photons;
    return {scale * (v_h * cos2(phase) + 0.5 * (1.0 - v_h)),
            scale * (v_v * sin2(phase) + 0.5 * (1.0 - v_v))};
}

double coherent_log_probability(const ProbeSpec& spec, double theta, std::int64_t n_h,
                                std::int64_t n_v) {
    detail::require(n_h >= 0 && n_v >= 0, "photon counts must be non-negative");
    const ChannelMeans means = coherent_channel_means(spec, theta);
    return poisson_log_mass(means.h, n_h) + poisson_log_mass(means.v, n_v);
}

double coherent_count_probability(const ProbeSpec& spec, double theta, std::int64_t n_h,
                                  std::int64_t n_v) {
    return std::exp(coherent_log_probability(spec, theta, n_h, n_v));
}

double entangled_joint_probability(const ProbeSpec& spec, double theta_a, double theta_b,
                                   Label pair_label) {
    detail::require(spec.strategy == Strategy::EntangledPair,
                    "entangled_joint_probability needs strategy EntangledPair");
    check_visibility(spec.visibility);
    const int m_a = gear_ratio(spec.q_a, spec.hwp_sign_a);
    const int m_b = gear_ratio(spec.q_b, spec.hwp_sign_b);

    const double arg = spec.bell_state == BellState::PsiMinus ? m_a * theta_a - m_b * theta_b
                                                              : m_a * theta_a + m_b * theta_b;
    double ideal = 0.0;
    switch (pair_label) {
    case Label::HH:
    case Label::VV: ideal = 0.5 * sin2(arg); break;
    case Label::HV:
    case Label::VH: ideal = 0.5 * cos2(arg); break;
    default:
        detail::fail(ErrorCode::OutcomeOutsideSpace,
                     "label " + std::string(to_string(pair_label)) + " is not a coincidence");
    }
    return spec.visibility * ideal + 0.25 * (1.0 - spec.visibility);
}

double pair_survival_probability(const ProbeSpec& spec, Label label) {
    detail::require(spec.strategy == Strategy::EntangledPair,
                    "pair_survival_probability needs strategy EntangledPair");
    check_transmissivity(spec.transmissivity);
    const double eta = spec.transmissivity;
    switch (label) {
    case Label::LossA:
    case Label::LossB: return eta * (1.0 - eta);
    case Label::LossBoth: return (1.0 - eta) * (1.0 - eta);
    case Label::HH:
    case Label::HV:
    case Label::VH:
    case Label::VV: return eta * eta;
    default: break;
    }
    detail::fail(ErrorCode::OutcomeOutsideSpace,
                 "label " + std::string(to_string(label)) + " is not a pair outcome");
}

double visibility_from_efficiencies(const ImperfectionModel& model) {
    detail::require(model.eps_1 > 0.0 && model.eps_1 <= 1.0 && model.eps_2 > 0.0 &&
                        model.eps_2 <= 1.0,
                    "conversion efficiencies must lie in (0, 1]");
    const double pure  = model.eps_1 * model.eps_2;
    const double mixed = model.eps_1 * (1.0 - model.eps_2) + (1.0 - model.eps_1) * model.eps_2;
    return pure / (pure + mixed);
}

} // namespace gearsim
