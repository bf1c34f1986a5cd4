#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gearsim/bayes.hpp"
#include "gearsim/error.hpp"
#include "gearsim/sampler.hpp"

namespace gearsim {

/// Charges of the paper's q-plate family plus the detuned plate (m = 1).
[[nodiscard]] std::vector<int> default_device_set();

/// Length of a bijectivity interval of cos^2(m theta + xi): pi / (2m).
[[nodiscard]] double step_period(int m);

struct StepPlan {
    int step_index = 1;
    int m = 1;
    std::uint64_t budget = 0;
    double xi = 0.0;
    Interval omega;
    bool symmetry_fallback = false;

    [[nodiscard]] double period() const { return step_period(m); }
};

/// floor(m_prev * pi * sqrt(M_prev)): the largest charge step j can use.
[[nodiscard]] int ideal_next_charge(int m_prev, std::uint64_t budget_prev);

/// (m_1, m_2, m_3) with m_1 = 1 and each later charge the largest member of
/// `available_m` not above the ideal value. Throws when no member lies in
/// (m_prev, ideal].
[[nodiscard]] std::array<int, 3> plan_charges(std::uint64_t budget_1, std::uint64_t budget_2,
                                              std::span<const int> available_m);

/// pi/4 - m theta_prev reduced into [0, pi): puts theta_prev on a point of
/// maximal slope of the step's fringe.
[[nodiscard]] double adapt_phase(int m, double theta_prev);

/// The four angles in [0, 2 pi) sharing the step-1 likelihood with theta_bar_1,
/// de-duplicated (theta_bar_1 = 0 yields {0, pi}).
[[nodiscard]] std::vector<double> candidates_step1(double theta_bar_1);

/// True when theta_prev sits within `tolerance_fraction * period` of a multiple
/// of period/2, where the adapted phase leaves the reflection symmetry intact.
[[nodiscard]] bool symmetry_triggered(double theta_prev, double period,
                                      double tolerance_fraction = 1.0 / 20.0);

/// xi_planned shifted by m * period / 4 (mod pi) when symmetry_triggered,
/// otherwise xi_planned unchanged.
[[nodiscard]] double symmetry_fallback(double xi_planned, double theta_prev, double period,
                                       double tolerance_fraction = 1.0 / 20.0);

/// Half-period interval on which cos^2(m theta + xi) is monotone and which
/// contains theta_ref.
[[nodiscard]] Interval bijective_interval(int m, double xi, double theta_ref);

/// Alias of `theta` under cos^2(m theta + xi) (translations by pi/m and
/// reflections through the fringe extrema) closest to `reference`.
[[nodiscard]] double nearest_alias(double theta, int m, double xi, double reference);

struct ResolutionCheck {
    bool pass = true;
    std::string diagnostic;
};

/// Passes iff period >= delta_prev.
[[nodiscard]] ResolutionCheck check_resolution_constraint(double period, double delta_prev);

class ResolutionConstraintError : public Error {
  public:
    ResolutionConstraintError(int step, double period, double delta_prev, const std::string& what)
        : Error(ErrorCode::ResolutionConstraint, what), step_(step), period_(period),
          delta_prev_(delta_prev) {}

    [[nodiscard]] int step() const noexcept { return step_; }
    [[nodiscard]] double period() const noexcept { return period_; }
    [[nodiscard]] double delta_prev() const noexcept { return delta_prev_; }

  private:
    int step_;
    double period_;
    double delta_prev_;
};

/// Log-likelihood of `steps` evaluated at each candidate; candidates within
/// `window` nats of the best survive, ordered best first (ties by angle).
[[nodiscard]] std::vector<double> prune_candidates(std::span<const double> candidates,
                                                   std::span<const Dataset> steps,
                                                   double window = 10.0);
[[nodiscard]] std::vector<double> prune_candidates(std::span<const double> candidates,
                                                   const Dataset& step, double window = 10.0);

[[nodiscard]] double candidate_log_likelihood(double theta, std::span<const Dataset> steps);

struct ProtocolConfig {
    std::array<std::uint64_t, 3> budgets{100, 1000, 10000};
    std::vector<int> available_m = default_device_set();
    double visibility = 1.0;
    double eta = 1.0;
    std::size_t grid_size = kDefaultGridSize;
    double window = 10.0;
    double symmetry_tolerance = 1.0 / 20.0;
};

struct StepOutcome {
    StepPlan plan;
    EstimationResult estimate;
    std::vector<double> candidates; ///< surviving candidates after this step
    std::uint64_t lost = 0;
};

struct ProtocolResult {
    std::vector<StepOutcome> steps;
    double theta_hat = 0.0; ///< in [0, 2 pi)
    double delta_theta = 0.0;
    std::vector<double> final_candidates;
    bool ambiguous = false;
    std::uint64_t photons_consumed = 0;
    std::vector<std::string> warnings;
};

/// Three-step concatenated adaptive estimation of a rotation anywhere in
/// [0, 2 pi). Throws ResolutionConstraintError when a planned step is finer
/// than the previous step's uncertainty.
[[nodiscard]] ProtocolResult run_protocol(double true_theta, const ProtocolConfig& config,
                                          std::uint64_t seed);

[[nodiscard]] std::string protocol_report(const ProtocolResult& result);
[[nodiscard]] std::string protocol_csv_header();
[[nodiscard]] std::string protocol_csv_row(const ProtocolResult& result, std::uint64_t seed,
                                           double true_theta);

} // namespace gearsim
