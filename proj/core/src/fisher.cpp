#include "gearsim/fisher.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include <fmt/format.h>

#include "gearsim/angles.hpp"
#include "gearsim/error.hpp"
#include "gearsim/probe_models.hpp"

namespace gearsim {
namespace {

// Per-probe information of one strategy, reduced to a two-outcome fringe
// cos^2(k theta + xi) with visibility V, plus the bookkeeping needed to
// convert to per-photon figures.
struct FringeLaw {
    int k = 1;
    double visibility = 1.0;
    double xi = 0.0;
    double photons_per_probe = 1.0;
    double survival = 1.0; ///< probability a probe is detected
    double probes_per_rep = 1.0;
};

FringeLaw fringe_law(const ProbeSpec& spec) {
    FringeLaw law;
    law.xi = spec.xi;
    detail::require(spec.transmissivity > 0.0 && spec.transmissivity <= 1.0,
                    "transmissivity must lie in (0, 1]");
    switch (spec.strategy) {
    case Strategy::ClassicalPolarization:
    case Strategy::GearSinglePhoton:
        detail::require(spec.n_photons >= 1, "n_photons must be >= 1");
        law.k              = fringe_multiplier(spec);
        law.visibility     = spec.strategy == Strategy::GearSinglePhoton ? spec.visibility : 1.0;
        law.survival       = spec.transmissivity;
        law.probes_per_rep = spec.n_photons;
        break;
    case Strategy::NoonPolarization:
    case Strategy::GearNoon:
        law.k                 = fringe_multiplier(spec);
        law.photons_per_probe = spec.n_photons;
        law.survival          = spec.transmissivity;
        break;
    case Strategy::EntangledPair: {
        const int m_a = gear_ratio(spec.q_a, spec.hwp_sign_a);
        const int m_b = gear_ratio(spec.q_b, spec.hwp_sign_b);
        law.k = spec.bell_state == BellState::PhiMinus ? m_a + m_b : std::abs(m_a - m_b);
        if (law.k == 0) {
            detail::fail(ErrorCode::DegenerateCase,
                         "co-rotating psi- pair with m_A = m_B carries no angle information");
        }
        law.visibility        = spec.visibility;
        law.xi                = 0.0;
        law.photons_per_probe = 2.0;
        law.survival          = spec.transmissivity * spec.transmissivity;
        break;
    }
    case Strategy::CoherentGear:
        detail::fail(ErrorCode::InvalidArgument, "coherent pulses have no two-outcome fringe law");
    }
    detail::require(law.visibility >= 0.0 && law.visibility <= 1.0,
                    "visibility must lie in [0, 1]");
    return law;
}

double two_outcome_cfi(int k, double visibility, double theta, double xi) {
    const double ideal = 4.0 * k * k;
    if (visibility >= 1.0) {
        return ideal;
    }
    return ideal * visibility * visibility * c_function(k, visibility, theta, xi);
}

} // namespace

double qfi_single_photon(int m) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    return 4.0 * m * m;
}

double qfi_with_losses(int m, double eta) {
    detail::require(eta > 0.0 && eta <= 1.0, "transmissivity must lie in (0, 1]");
    return eta * qfi_single_photon(m);
}

double c_function(int m, double visibility, double theta, double xi) {
    detail::require(visibility >= 0.0 && visibility <= 1.0, "visibility must lie in [0, 1]");
    const double arg   = 2.0 * m * theta + 2.0 * xi;
    const double c     = std::cos(arg);
    const double s     = std::sin(arg);
    const double denom = 1.0 - visibility * visibility * c * c;
    if (denom <= 0.0) {
        detail::fail(ErrorCode::DegenerateCase,
                     "C(theta) is 0/0 for unit visibility on a fringe extremum");
    }
    return std::clamp(s * s / denom, 0.0, 1.0);
}

double cfi_polarization(const ProbeSpec& spec, double theta) {
    detail::require(is_single_mode(spec.strategy),
                    "cfi_polarization needs a single-mode strategy");
    const FringeLaw law = fringe_law(spec);
    return two_outcome_cfi(law.k, law.visibility, theta, law.xi);
}

double cfi_coherent(const ProbeSpec& spec, double theta) {
    const ChannelMeans means = coherent_channel_means(spec, theta);
    const int m              = gear_ratio(spec);
    const double v_h         = spec.visibility;
    const double v_v         = spec.visibility_v.value_or(spec.visibility);
    const double scale       = spec.transmissivity * spec.mean_photons;
    if (scale == 0.0) {
        return 0.0;
    }
    // d lambda_H / d theta = -scale V_H m sin(2u), d lambda_V / d theta = +scale V_V m sin(2u)
    const double s2 = std::sin(2.0 * (m * theta + spec.xi));
    double total    = 0.0;
    for (const auto& [mean, vis] : {std::pair{means.h, v_h}, std::pair{means.v, v_v}}) {
        const double slope = scale * vis * m * s2;
        if (mean > 0.0) {
            total += slope * slope / mean;
        } else {
            // removable: a dark port only occurs for unit visibility, where the
            // limit of slope^2 / mean is 4 scale m^2
            total += 4.0 * scale * m * m;
        }
    }
    return total;
}

BoundReport crb(const ProbeSpec& spec, std::uint64_t nu, std::optional<double> theta) {
    detail::require(nu >= 1, "nu must be >= 1");
    BoundReport report;
    report.strategy   = spec.strategy;
    report.nu         = nu;
    report.eta        = spec.transmissivity;
    report.theta_eval = theta;

    double probes         = 0.0;
    double info_per_probe = 0.0;
    double qfi_per_probe  = 0.0;

    if (spec.strategy == Strategy::CoherentGear) {
        const int m              = gear_ratio(spec);
        report.m                 = m;
        report.n_per_probe       = spec.mean_photons;
        report.visibility        = spec.visibility;
        probes                   = static_cast<double>(nu);
        const double best_theta  = (0.25 * kPi - spec.xi) / m;
        info_per_probe           = cfi_coherent(spec, theta.value_or(best_theta));
        qfi_per_probe            = 4.0 * m * m * spec.transmissivity * spec.mean_photons;
    } else {
        const FringeLaw law  = fringe_law(spec);
        report.m             = law.k;
        report.n_per_probe   = law.photons_per_probe * law.probes_per_rep;
        report.visibility    = law.visibility;
        probes               = static_cast<double>(nu) * law.probes_per_rep;
        const double optimum = 4.0 * law.k * law.k * law.visibility * law.visibility;
        info_per_probe       = law.survival * (theta ? two_outcome_cfi(law.k, law.visibility,
                                                                       *theta, law.xi)
                                                     : optimum);
        qfi_per_probe        = law.survival * 4.0 * law.k * law.k;
    }

    const double photons  = static_cast<double>(nu) * report.n_per_probe;
    report.qfi_per_photon = probes * qfi_per_probe / photons;
    report.cfi_per_photon = probes * info_per_probe / photons;
    report.crb            = 1.0 / std::sqrt(probes * info_per_probe);
    return report;
}

std::string bound_csv_header() { return "strategy,m,N,nu,V,eta,theta,qfi,cfi,crb"; }

std::string bound_csv_row(const BoundReport& r) {
    const std::string theta = r.theta_eval ? fmt::format("{:.17g}", *r.theta_eval) : "optimal";
    return fmt::format("{},{},{:.17g},{},{:.17g},{:.17g},{},{:.17g},{:.17g},{:.17g}",
                       to_string(r.strategy), r.m, r.n_per_probe, r.nu, r.visibility, r.eta,
                       theta, r.qfi_per_photon, r.cfi_per_photon, r.crb);
}

HeuristicVisibilityModel fitted_device_model() {
    return HeuristicVisibilityModel{1.0, 1.0, 0.026, 0.62};
}

double heuristic_effective_factor(const HeuristicVisibilityModel& model, int m) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    const double degradation = 1.0 - model.gamma * std::pow(static_cast<double>(m), model.delta);
    return model.v0 * std::sqrt(model.eta0) * std::max(0.0, degradation);
}

double enhancement_ratio(int m, const HeuristicVisibilityModel& model) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    const double degradation = 1.0 - model.gamma * std::pow(static_cast<double>(m), model.delta);
    return m * std::max(0.0, degradation);
}

CoherentFisherResult coherent_cfi_numeric(int m, double mean_photons, double theta,
                                          std::int64_t truncation) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    detail::require(mean_photons >= 0.0, "mean photon number must be >= 0");
    detail::require(static_cast<double>(truncation) >= 10.0 * mean_photons && truncation >= 0,
                    "truncation must be at least 10 * mean_photons");

    const double c        = std::cos(m * theta);
    const double s        = std::sin(m * theta);
    const double lambda_h = c * c * mean_photons;
    const double lambda_v = s * s * mean_photons;
    const double slope_h  = -2.0 * mean_photons * m * c * s;
    const double slope_v  = -slope_h;

    CoherentFisherResult result;
    if (mean_photons == 0.0) {
        result.tail_mass = 0.0;
        return result;
    }
    if (lambda_h == 0.0 || lambda_v == 0.0) {
        // a dark port makes every summand with n > 0 vanish; report the limit
        result.value = 4.0 * m * m * mean_photons;
        const double bright = std::max(lambda_h, lambda_v);
        double mass         = 0.0;
        for (std::int64_t n = 0; n <= truncation; ++n) {
            const auto nd = static_cast<double>(n);
            mass += std::exp(nd * std::log(bright) - bright - std::lgamma(nd + 1.0));
        }
        result.tail_mass          = std::max(0.0, 1.0 - mass);
        result.truncation_warning = result.tail_mass > 1e-10;
        return result;
    }

    const double log_h = std::log(lambda_h);
    const double log_v = std::log(lambda_v);
    double mass        = 0.0;
    double info        = 0.0;
    for (std::int64_t n_h = 0; n_h <= truncation; ++n_h) {
        const auto nh        = static_cast<double>(n_h);
        const double log_p_h = nh * log_h - lambda_h - std::lgamma(nh + 1.0);
        const double score_h = slope_h * (nh / lambda_h - 1.0);
        for (std::int64_t n_v = 0; n_v <= truncation; ++n_v) {
            const auto nv      = static_cast<double>(n_v);
            const double p     = std::exp(log_p_h + nv * log_v - lambda_v - std::lgamma(nv + 1.0));
            const double score = score_h + slope_v * (nv / lambda_v - 1.0);
            mass += p;
            info += p * score * score;
        }
    }
    result.value              = info;
    result.tail_mass          = std::max(0.0, 1.0 - mass);
    result.truncation_warning = result.tail_mass > 1e-10;
    return result;
}

} // namespace gearsim
