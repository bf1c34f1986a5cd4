#include "gearsim/adaptive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <fmt/format.h>

#include "gearsim/angles.hpp"
#include "gearsim/csv.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/rng.hpp"

namespace gearsim {
namespace {

constexpr double kDuplicateTolerance = 1e-9;

void push_unique(std::vector<double>& out, double angle) {
    const double wrapped = wrap_two_pi(angle);
    for (const double existing : out) {
        if (circular_distance(existing, wrapped) < kDuplicateTolerance) {
            return;
        }
    }
    out.push_back(wrapped);
}

std::string join_angles(const std::vector<double>& angles, char sep) {
    std::string out;
    for (std::size_t i = 0; i < angles.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += fmt::format("{:.17g}", angles[i]);
    }
    return out;
}

} // namespace

std::vector<int> default_device_set() { return {1, 2, 5, 7, 9, 11, 21, 51, 101}; }

double step_period(int m) {
    detail::require(m >= 1, "gear ratio must be >= 1");
    return kPi / (2.0 * m);
}

int ideal_next_charge(int m_prev, std::uint64_t budget_prev) {
    detail::require(m_prev >= 1 && budget_prev >= 1, "charge and budget must be >= 1");
    return static_cast<int>(
        std::floor(m_prev * kPi * std::sqrt(static_cast<double>(budget_prev))));
}

std::array<int, 3> plan_charges(std::uint64_t budget_1, std::uint64_t budget_2,
                                std::span<const int> available_m) {
    detail::require(std::find(available_m.begin(), available_m.end(), 1) != available_m.end(),
                    "available charges must contain m = 1");
    std::array<int, 3> charges{1, 0, 0};
    const std::array<std::uint64_t, 2> budgets{budget_1, budget_2};
    for (std::size_t j = 1; j < 3; ++j) {
        const int prev  = charges[j - 1];
        const int ideal = ideal_next_charge(prev, budgets[j - 1]);
        int best        = 0;
        for (const int m : available_m) {
            if (m > prev && m <= ideal) {
                best = std::max(best, m);
            }
        }
        if (best == 0) {
            detail::fail(ErrorCode::InvalidArgument,
                         fmt::format("no available charge in ({}, {}] for step {}", prev, ideal,
                                     j + 1));
        }
        charges[j] = best;
    }
    return charges;
}

double adapt_phase(int m, double theta_prev) { return wrap(0.25 * kPi - m * theta_prev, kPi); }

std::vector<double> candidates_step1(double theta_bar_1) {
    std::vector<double> out;
    push_unique(out, theta_bar_1);
    push_unique(out, kPi - theta_bar_1);
    push_unique(out, kPi + theta_bar_1);
    push_unique(out, kTwoPi - theta_bar_1);
    return out;
}

bool symmetry_triggered(double theta_prev, double period, double tolerance_fraction) {
    return std::abs(offset_from_lattice(theta_prev, 0.5 * period)) < tolerance_fraction * period;
}

double symmetry_fallback(double xi_planned, double theta_prev, double period,
                         double tolerance_fraction) {
    if (!symmetry_triggered(theta_prev, period, tolerance_fraction)) {
        return xi_planned;
    }
    const double m = kPi / (2.0 * period);
    return wrap(xi_planned + 0.25 * m * period, kPi);
}

Interval bijective_interval(int m, double xi, double theta_ref) {
    const double half_turn = 0.5 * kPi;
    const double phase     = m * theta_ref + xi;
    const double start     = std::floor(phase / half_turn) * half_turn;
    const double lo        = (start - xi) / m;
    return {lo, lo + step_period(m)};
}

double nearest_alias(double theta, int m, double xi, double reference) {
    const double phase = m * theta + xi;
    double best        = theta;
    double best_dist   = std::numeric_limits<double>::infinity();
    for (const double sign : {1.0, -1.0}) {
        const double k         = std::round((m * reference + xi - sign * phase) / kPi);
        const double candidate = (sign * phase + k * kPi - xi) / m;
        const double dist      = std::abs(candidate - reference);
        if (dist < best_dist) {
            best_dist = dist;
            best      = candidate;
        }
    }
    return best;
}

ResolutionCheck check_resolution_constraint(double period, double delta_prev) {
    if (period >= delta_prev) {
        return {};
    }
    return {false, fmt::format("bijectivity interval {:.6g} rad is shorter than the previous "
                               "uncertainty {:.6g} rad; increase the previous step's photon "
                               "budget or use a smaller charge",
                               period, delta_prev)};
}

double candidate_log_likelihood(double theta, std::span<const Dataset> steps) {
    double total = 0.0;
    for (const Dataset& step : steps) {
        const double p_h = arrival_probability(step.spec, Label::H, theta);
        const auto n_h   = static_cast<double>(step.counts[Label::H]);
        const auto n_v   = static_cast<double>(step.counts[Label::V]);
        if (n_h > 0.0) {
            total += n_h * std::log(p_h);
        }
        if (n_v > 0.0) {
            total += n_v * std::log(1.0 - p_h);
        }
    }
    return total;
}

std::vector<double> prune_candidates(std::span<const double> candidates,
                                     std::span<const Dataset> steps, double window) {
    detail::require(!candidates.empty(), "candidate set must not be empty");
    std::vector<std::pair<double, double>> scored; // (log-likelihood, angle)
    double best = -std::numeric_limits<double>::infinity();
    for (const double c : candidates) {
        const double ll = candidate_log_likelihood(c, steps);
        scored.emplace_back(ll, c);
        best = std::max(best, ll);
    }
    std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        return a.second < b.second;
    });
    std::vector<double> survivors;
    for (const auto& [ll, c] : scored) {
        // all candidates impossible: keep them all rather than guess
        if (!std::isfinite(best) || ll >= best - window) {
            survivors.push_back(c);
        }
    }
    return survivors;
}

std::vector<double> prune_candidates(std::span<const double> candidates, const Dataset& step,
                                     double window) {
    return prune_candidates(candidates, std::span<const Dataset>(&step, 1), window);
}

ProtocolResult run_protocol(double true_theta, const ProtocolConfig& config, std::uint64_t seed) {
    for (const auto budget : config.budgets) {
        detail::require(budget >= 1, "every step needs a photon budget >= 1");
    }
    ProtocolResult result;
    const auto [b1, b2, b3] = config.budgets;
    const double root2      = std::sqrt(static_cast<double>(b2));
    const double root4      = std::sqrt(std::sqrt(static_cast<double>(b3)));
    if (static_cast<double>(b1) > root2 || root2 > root4) {
        result.warnings.push_back(fmt::format(
            "budgets ({}, {}, {}) do not follow M1 <~ M2^(1/2) <~ M3^(1/4)", b1, b2, b3));
    }

    const std::array<int, 3> charges = plan_charges(b1, b2, config.available_m);
    std::vector<Dataset> datasets;
    datasets.reserve(3);

    // step 1: detuned plate, xi = 0, Omega_1 = [0, pi/2)
    StepOutcome first;
    first.plan = StepPlan{1, 1, b1, 0.0, Interval{0.0, step_period(1)}, false};
    datasets.push_back(sample_single_photons(
        gear_probe(1, 0.0, config.visibility, config.eta), true_theta, b1, derive_seed(seed, 1)));
    first.estimate   = estimate_angle(datasets.back(), first.plan.omega, config.grid_size);
    first.lost       = datasets.back().counts[Label::Lost];
    first.candidates = candidates_step1(first.estimate.theta_bar);
    result.steps.push_back(first);

    double working    = first.estimate.theta_bar;
    double delta_prev = first.estimate.delta_theta;
    std::vector<double> candidates = first.candidates;

    for (int j = 2; j <= 3; ++j) {
        const int m         = charges[static_cast<std::size_t>(j - 1)];
        const double period = step_period(m);
        const ResolutionCheck check = check_resolution_constraint(period, delta_prev);
        if (!check.pass) {
            throw ResolutionConstraintError(j, period, delta_prev,
                                            fmt::format("step {}: {}", j, check.diagnostic));
        }

        StepOutcome step;
        step.plan.step_index = j;
        step.plan.m          = m;
        step.plan.budget     = config.budgets[static_cast<std::size_t>(j - 1)];
        const double planned = adapt_phase(m, working);
        step.plan.symmetry_fallback =
            symmetry_triggered(working, period, config.symmetry_tolerance);
        if (step.plan.symmetry_fallback) {
            step.plan.xi    = symmetry_fallback(planned, working, period, config.symmetry_tolerance);
            step.plan.omega = bijective_interval(m, step.plan.xi, working);
        } else {
            step.plan.xi    = planned;
            step.plan.omega = Interval{working - 0.5 * period, working + 0.5 * period};
        }

        datasets.push_back(
            sample_single_photons(gear_probe(m, step.plan.xi, config.visibility, config.eta),
                                  true_theta, step.plan.budget,
                                  derive_seed(seed, static_cast<std::uint64_t>(j))));
        step.estimate = estimate_angle(datasets.back(), step.plan.omega, config.grid_size);
        step.lost     = datasets.back().counts[Label::Lost];

        // carry every surviving candidate to its nearest alias of the new estimate
        std::vector<double> refined;
        for (const double c : candidates) {
            const double near = nearest_alias(step.estimate.theta_bar, m, step.plan.xi,
                                              working + offset_from_lattice(c - working, kTwoPi));
            push_unique(refined, near);
        }
        candidates      = prune_candidates(refined, datasets, config.window);
        step.candidates = candidates;
        result.steps.push_back(step);

        working    = candidates.front();
        delta_prev = step.estimate.delta_theta;
    }

    result.final_candidates = candidates;
    result.theta_hat        = wrap_two_pi(candidates.front());
    result.delta_theta      = result.steps.back().estimate.delta_theta;
    result.ambiguous        = candidates.size() > 1;
    for (const auto& step : result.steps) {
        result.photons_consumed += step.plan.budget - step.lost;
    }
    if (result.ambiguous) {
        result.warnings.push_back(fmt::format("{} candidates remain after step 3",
                                              candidates.size()));
    }
    return result;
}

std::string protocol_report(const ProtocolResult& r) {
    std::string out = "# gearsim adaptive report v1\n";
    for (const auto& s : r.steps) {
        out += fmt::format(
            "step {}: m={} budget={} xi={:.17g} omega=[{:.17g},{:.17g}) fallback={} "
            "theta_bar={:.17g} delta_theta={:.17g} lost={} candidates={{{}}}\n",
            s.plan.step_index, s.plan.m, s.plan.budget, s.plan.xi, s.plan.omega.lo,
            s.plan.omega.hi, s.plan.symmetry_fallback ? "yes" : "no", s.estimate.theta_bar,
            s.estimate.delta_theta, s.lost, join_angles(s.candidates, ' '));
    }
    out += fmt::format("theta_hat: {:.17g}\n", r.theta_hat);
    out += fmt::format("delta_theta: {:.17g}\n", r.delta_theta);
    out += fmt::format("ambiguous: {}\n", r.ambiguous ? "yes" : "no");
    out += fmt::format("photons_consumed: {}\n", r.photons_consumed);
    for (const auto& w : r.warnings) {
        out += "warning: " + w + "\n";
    }
    return out;
}

std::string protocol_csv_header() {
    return csv_preamble("adaptive") +
           "seed,true_theta,m1,m2,m3,theta_hat,delta_theta,n_candidates,ambiguous,photons,"
           "circular_error\n";
}

std::string protocol_csv_row(const ProtocolResult& r, std::uint64_t seed, double true_theta) {
    return fmt::format("{},{:.17g},{},{},{},{:.17g},{:.17g},{},{},{},{:.17g}\n", seed, true_theta,
                       r.steps[0].plan.m, r.steps[1].plan.m, r.steps[2].plan.m, r.theta_hat,
                       r.delta_theta, r.final_candidates.size(), r.ambiguous ? 1 : 0,
                       r.photons_consumed, circular_distance(r.theta_hat, true_theta));
}

} // namespace gearsim
