#pragma once

#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gearsim/error.hpp"
#include "gearsim/sampler.hpp"

namespace gearsim {

/// One channel of a fringe: a value and its standard error at each set angle.
/// With `poisson` set the fit replaces `sigma` by the square root of the
/// fitted model and iterates, which converges to the Poisson maximum
/// likelihood; `sigma` then only seeds the first pass.
struct FringeScan {
    std::vector<double> angles;
    std::vector<double> values;
    std::vector<double> sigma;
    bool poisson = false;
};

/// Poisson counts, seeded with errors sqrt(max(count, 1)).
[[nodiscard]] FringeScan scan_from_counts(std::vector<double> angles, std::vector<double> counts);

/// One point per dataset at its generating angle. `channel` selects the H or V
/// arrival count, the H/V port total for coherent pulses, or a coincidence
/// label for pairs.
[[nodiscard]] FringeScan scan_from_datasets(std::span<const Dataset> datasets, Label channel);

struct FringeFitResult {
    int m = 1;
    bool m_fixed = false;
    double amplitude = 0.0;
    double visibility = 0.0;
    double phase = 0.0;    ///< xi in [0, pi)
    double baseline = 0.0; ///< held fixed during the fit
    double chi_squared = 0.0;
    int dof = 0;
    double amplitude_stderr = 0.0;
    double visibility_stderr = 0.0;
    double phase_stderr = 0.0;
    int iterations = 0;
    bool visibility_clipped = false;
    std::vector<std::string> warnings;

    [[nodiscard]] double chi_squared_per_dof() const {
        return dof > 0 ? chi_squared / dof : 0.0;
    }
};

/// Thrown when the damped least squares does not converge; carries the best
/// parameters reached.
class FitError : public Error {
  public:
    FitError(FringeFitResult best, const std::string& what)
        : Error(ErrorCode::FitNonConvergence, what), best_(std::move(best)) {}

    [[nodiscard]] const FringeFitResult& best_so_far() const noexcept { return best_; }

  private:
    FringeFitResult best_;
};

inline constexpr int kMaxFitIterations = 200;

/// Weighted least squares of A [1 + V cos(2 m theta + 2 xi)] / 2 + baseline.
/// Without `m_fixed` the frequency comes from frequency_scan over
/// `m_candidates` first.
[[nodiscard]] FringeFitResult fit_fringe(const FringeScan& scan, std::optional<int> m_fixed,
                                         std::span<const int> m_candidates = {},
                                         double baseline = 0.0);

struct FrequencyScanResult {
    int m = 0;
    std::vector<std::pair<int, double>> chi_squared; ///< per candidate, ascending m
    std::optional<std::string> warning;
};

/// Candidate with the smallest chi-squared, ties to the smaller m. Warns when
/// the two best differ by less than 1.
[[nodiscard]] FrequencyScanResult frequency_scan(const FringeScan& scan,
                                                 std::span<const int> m_candidates,
                                                 double baseline = 0.0);

/// "parameter,value,stderr" rows.
[[nodiscard]] std::string fit_csv(const FringeFitResult& fit);

} // namespace gearsim
