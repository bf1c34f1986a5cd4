#include "gearsim/probe_spec.hpp"

#include <array>
#include <cmath>
#include <string>
#include <utility>

#include "gearsim/error.hpp"

namespace gearsim {
namespace {

constexpr std::array<std::pair<Strategy, std::string_view>, 6> kStrategyNames{{
    {Strategy::ClassicalPolarization, "ClassicalPolarization"},
    {Strategy::GearSinglePhoton, "GearSinglePhoton"},
    {Strategy::NoonPolarization, "NoonPolarization"},
    {Strategy::GearNoon, "GearNoon"},
    {Strategy::CoherentGear, "CoherentGear"},
    {Strategy::EntangledPair, "EntangledPair"},
}};

constexpr std::array<std::pair<Label, std::string_view>, 11> kLabelNames{{
    {Label::H, "H"},
    {Label::V, "V"},
    {Label::Lost, "Lost"},
    {Label::HH, "HH"},
    {Label::HV, "HV"},
    {Label::VH, "VH"},
    {Label::VV, "VV"},
    {Label::LossA, "LossA"},
    {Label::LossB, "LossB"},
    {Label::LossBoth, "LossBoth"},
    {Label::Counts, "Counts"},
}};

} // namespace

std::string_view to_string(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::InvalidArgument: return "invalid_argument";
    case ErrorCode::OutcomeOutsideSpace: return "outcome_outside_space";
    case ErrorCode::DegenerateCase: return "degenerate_case";
    case ErrorCode::DegeneratePosterior: return "degenerate_posterior";
    case ErrorCode::ResolutionConstraint: return "resolution_constraint";
    case ErrorCode::FitNonConvergence: return "fit_non_convergence";
    case ErrorCode::Config: return "config";
    case ErrorCode::Io: return "io";
    }
    return "unknown";
}

std::string_view to_string(Strategy s) noexcept {
    for (const auto& [value, name] : kStrategyNames) {
        if (value == s) {
            return name;
        }
    }
    return "unknown";
}

std::string_view to_string(BellState b) noexcept {
    return b == BellState::PsiMinus ? "PsiMinus" : "PhiMinus";
}

Strategy parse_strategy(std::string_view name) {
    for (const auto& [value, n] : kStrategyNames) {
        if (n == name) {
            return value;
        }
    }
    detail::fail(ErrorCode::InvalidArgument, "unknown strategy '" + std::string(name) + "'");
}

BellState parse_bell_state(std::string_view name) {
    if (name == "PsiMinus") {
        return BellState::PsiMinus;
    }
    if (name == "PhiMinus") {
        return BellState::PhiMinus;
    }
    detail::fail(ErrorCode::InvalidArgument, "unknown Bell state '" + std::string(name) + "'");
}

std::string_view to_string(Label label) noexcept {
    for (const auto& [value, name] : kLabelNames) {
        if (value == label) {
            return name;
        }
    }
    return "unknown";
}

Label parse_label(std::string_view name) {
    for (const auto& [value, n] : kLabelNames) {
        if (n == name) {
            return value;
        }
    }
    detail::fail(ErrorCode::InvalidArgument, "unknown outcome label '" + std::string(name) + "'");
}

Charge Charge::from_value(double q) {
    const double twice = 2.0 * q;
    const double rounded = std::round(twice);
    detail::require(std::isfinite(q) && q >= 0.0 && std::abs(twice - rounded) < 1e-9,
                    "topological charge must be a non-negative integer or half-integer");
    return Charge(static_cast<int>(rounded));
}

ProbeSpec gear_probe(int m, double xi, double visibility, double transmissivity) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    ProbeSpec spec;
    spec.strategy       = Strategy::GearSinglePhoton;
    spec.q              = Charge(m - 1);
    spec.hwp_sign       = +1;
    spec.xi             = xi;
    spec.visibility     = visibility;
    spec.transmissivity = transmissivity;
    return spec;
}

} // namespace gearsim
