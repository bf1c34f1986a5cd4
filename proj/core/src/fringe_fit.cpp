#include "gearsim/fringe_fit.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>
#include <fmt/format.h>

#include "gearsim/angles.hpp"
#include "gearsim/csv.hpp"
#include "gearsim/probe_models.hpp"

namespace gearsim {
namespace {

using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

constexpr int kParams = 3;

// internal parameters: (A, a, b) with a = V cos 2xi, b = V sin 2xi
struct Model {
    const FringeScan& scan;
    int m;
    double baseline;

    [[nodiscard]] double value(const Vec3& p, std::size_t i) const {
        const double arg = 2.0 * m * scan.angles[i];
        return 0.5 * p[0] * (1.0 + p[1] * std::cos(arg) - p[2] * std::sin(arg)) + baseline;
    }

    [[nodiscard]] Vec3 gradient(const Vec3& p, std::size_t i) const {
        const double arg = 2.0 * m * scan.angles[i];
        const double c   = std::cos(arg);
        const double s   = std::sin(arg);
        return {0.5 * (1.0 + p[1] * c - p[2] * s), 0.5 * p[0] * c, -0.5 * p[0] * s};
    }

    [[nodiscard]] double chi_squared(const Vec3& p) const {
        double chi = 0.0;
        for (std::size_t i = 0; i < scan.angles.size(); ++i) {
            const double r = (scan.values[i] - value(p, i)) / scan.sigma[i];
            chi += r * r;
        }
        return chi;
    }

    // normal equations J^T W J and J^T W r
    void normal(const Vec3& p, Mat3& jtj, Vec3& jtr) const {
        jtj.setZero();
        jtr.setZero();
        for (std::size_t i = 0; i < scan.angles.size(); ++i) {
            const double w = 1.0 / (scan.sigma[i] * scan.sigma[i]);
            const Vec3 g   = gradient(p, i);
            jtj += w * g * g.transpose();
            jtr += w * (scan.values[i] - value(p, i)) * g;
        }
    }
};

void validate(const FringeScan& scan) {
    const std::size_t n = scan.angles.size();
    detail::require(scan.values.size() == n && scan.sigma.size() == n,
                    "fringe scan columns must have equal length");
    detail::require(n >= 4 * kParams,
                    fmt::format("fringe fit needs at least {} points, got {}", 4 * kParams, n));
    for (std::size_t i = 0; i < n; ++i) {
        detail::require(std::isfinite(scan.angles[i]) && std::isfinite(scan.values[i]),
                        "fringe scan values must be finite");
        detail::require(scan.sigma[i] > 0.0, "fringe scan errors must be positive");
    }
}

// weighted linear least squares on (1, cos, sin): exact optimum for fixed m
Vec3 linear_start(const FringeScan& scan, int m, double baseline) {
    Mat3 ata = Mat3::Zero();
    Vec3 aty = Vec3::Zero();
    for (std::size_t i = 0; i < scan.angles.size(); ++i) {
        const double w   = 1.0 / (scan.sigma[i] * scan.sigma[i]);
        const double arg = 2.0 * m * scan.angles[i];
        const Vec3 row{1.0, std::cos(arg), std::sin(arg)};
        ata += w * row * row.transpose();
        aty += w * (scan.values[i] - baseline) * row;
    }
    const Vec3 c = ata.ldlt().solve(aty);
    const double amp = 2.0 * c[0];
    if (!std::isfinite(amp) || std::abs(amp) < std::numeric_limits<double>::min()) {
        return {std::isfinite(amp) ? amp : 0.0, 0.0, 0.0};
    }
    return {amp, 2.0 * c[1] / amp, -2.0 * c[2] / amp};
}

FringeFitResult to_result(const Model& model, const Vec3& p, int iterations, bool m_fixed) {
    FringeFitResult r;
    r.m           = model.m;
    r.m_fixed     = m_fixed;
    r.baseline    = model.baseline;
    r.iterations  = iterations;
    r.chi_squared = model.chi_squared(p);
    r.dof         = static_cast<int>(model.scan.angles.size()) - kParams;
    r.amplitude   = p[0];

    const double a = p[1];
    const double b = p[2];
    const double v = std::hypot(a, b);
    r.visibility   = v;
    r.phase        = wrap(0.5 * std::atan2(b, a), kPi);

    Mat3 jtj;
    Vec3 jtr;
    model.normal(p, jtj, jtr);
    Eigen::FullPivLU<Mat3> lu(jtj);
    if (lu.isInvertible()) {
        const Mat3 cov     = lu.inverse();
        r.amplitude_stderr = std::sqrt(std::max(cov(0, 0), 0.0));
        if (v > 0.0) {
            const double var_v  = (a * a * cov(1, 1) + 2.0 * a * b * cov(1, 2) + b * b * cov(2, 2)) /
                                 (v * v);
            const double var_xi = 0.25 *
                                  (b * b * cov(1, 1) - 2.0 * a * b * cov(1, 2) + a * a * cov(2, 2)) /
                                  (v * v * v * v);
            r.visibility_stderr = std::sqrt(std::max(var_v, 0.0));
            r.phase_stderr      = std::sqrt(std::max(var_xi, 0.0));
        } else {
            // gradient of |(a, b)| is undefined at the origin
            r.visibility_stderr = std::sqrt(std::max(0.5 * (cov(1, 1) + cov(2, 2)), 0.0));
            r.phase_stderr      = 0.5 * kPi;
        }
    } else {
        r.amplitude_stderr  = std::numeric_limits<double>::infinity();
        r.visibility_stderr = std::numeric_limits<double>::infinity();
        r.phase_stderr      = std::numeric_limits<double>::infinity();
        r.warnings.push_back("curvature matrix is singular; errors are undefined");
    }

    if (r.visibility > 1.0) {
        r.visibility         = 1.0;
        r.visibility_clipped = true;
        r.warnings.push_back("fitted visibility above 1 clipped to 1");
    }
    return r;
}

FringeFitResult fit_weighted(const FringeScan& scan, int m, double baseline, bool m_fixed) {
    detail::require(m >= 1, "fit frequency must be >= 1");
    const Model model{scan, m, baseline};
    Vec3 p        = linear_start(scan, m, baseline);
    double chi    = model.chi_squared(p);
    double lambda = 1e-3;

    for (int it = 1; it <= kMaxFitIterations; ++it) {
        Mat3 jtj;
        Vec3 jtr;
        model.normal(p, jtj, jtr);
        if (jtr.norm() <= 1e-12 * (1.0 + std::abs(chi))) {
            return to_result(model, p, it - 1, m_fixed);
        }
        Mat3 damped = jtj;
        damped.diagonal() *= 1.0 + lambda;
        const Vec3 step  = damped.ldlt().solve(jtr);
        const Vec3 trial = p + step;
        const double chi_trial = model.chi_squared(trial);
        if (std::isfinite(chi_trial) && chi_trial <= chi) {
            const double drop = chi - chi_trial;
            p                 = trial;
            chi               = chi_trial;
            lambda            = std::max(lambda / 10.0, 1e-12);
            if (drop <= 1e-12 * (1.0 + chi) || step.norm() <= 1e-14 * (1.0 + p.norm())) {
                return to_result(model, p, it, m_fixed);
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e16) {
                // no descent direction left: stationary to working precision
                return to_result(model, p, it, m_fixed);
            }
        }
    }
    throw FitError(to_result(model, p, kMaxFitIterations, m_fixed),
                   fmt::format("fringe fit at m={} did not converge in {} iterations", m,
                               kMaxFitIterations));
}

constexpr int kMaxReweights       = 50;
constexpr double kVarianceFloor  = 1e-3;

FringeFitResult fit_fixed(const FringeScan& scan, int m, double baseline, bool m_fixed) {
    if (!scan.poisson) {
        return fit_weighted(scan, m, baseline, m_fixed);
    }
    FringeScan work       = scan;
    FringeFitResult r     = fit_weighted(work, m, baseline, m_fixed);
    for (int pass = 0; pass < kMaxReweights; ++pass) {
        const double a = r.visibility * std::cos(2.0 * r.phase);
        const double b = r.visibility * std::sin(2.0 * r.phase);
        for (std::size_t i = 0; i < work.angles.size(); ++i) {
            const double arg = 2.0 * m * work.angles[i];
            const double mu  = 0.5 * r.amplitude * (1.0 + a * std::cos(arg) - b * std::sin(arg)) +
                              baseline;
            work.sigma[i] = std::sqrt(std::max(mu, kVarianceFloor));
        }
        const FringeFitResult next = fit_weighted(work, m, baseline, m_fixed);
        const bool settled = std::abs(next.amplitude - r.amplitude) <= 1e-10 * std::abs(r.amplitude) &&
                             std::abs(next.visibility - r.visibility) <= 1e-10 &&
                             std::abs(next.phase - r.phase) <= 1e-10;
        r = next;
        if (settled) {
            return r;
        }
    }
    r.warnings.push_back("Poisson reweighting did not settle; errors use the last weights");
    return r;
}

} // namespace

FringeScan scan_from_counts(std::vector<double> angles, std::vector<double> counts) {
    FringeScan scan;
    scan.sigma.reserve(counts.size());
    for (const double c : counts) {
        scan.sigma.push_back(std::sqrt(std::max(c, 1.0)));
    }
    scan.angles  = std::move(angles);
    scan.values  = std::move(counts);
    scan.poisson = true;
    return scan;
}

FringeScan scan_from_datasets(std::span<const Dataset> datasets, Label channel) {
    std::vector<double> angles;
    std::vector<double> counts;
    for (const Dataset& d : datasets) {
        angles.push_back(d.true_theta);
        if (d.spec.strategy == Strategy::CoherentGear) {
            detail::require(channel == Label::H || channel == Label::V,
                            "coherent scans use channel H or V");
            counts.push_back(static_cast<double>(channel == Label::H ? d.counts.total_n_h
                                                                     : d.counts.total_n_v));
        } else {
            counts.push_back(static_cast<double>(d.counts[channel]));
        }
    }
    return scan_from_counts(std::move(angles), std::move(counts));
}

FrequencyScanResult frequency_scan(const FringeScan& scan, std::span<const int> m_candidates,
                                   double baseline) {
    detail::require(!m_candidates.empty(), "frequency scan needs at least one candidate");
    validate(scan);
    std::vector<int> sorted(m_candidates.begin(), m_candidates.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    FrequencyScanResult out;
    for (const int m : sorted) {
        double chi = 0.0;
        try {
            chi = fit_fixed(scan, m, baseline, true).chi_squared;
        } catch (const FitError& e) {
            chi = e.best_so_far().chi_squared;
        }
        out.chi_squared.emplace_back(m, chi);
    }

    // relative tolerance so that rounding noise between equal fits breaks toward smaller m
    auto better = [](double a, double b) { return a < b - 1e-9 * (1.0 + std::abs(b)); };
    std::size_t best = 0;
    for (std::size_t i = 1; i < out.chi_squared.size(); ++i) {
        if (better(out.chi_squared[i].second, out.chi_squared[best].second)) {
            best = i;
        }
    }
    out.m = out.chi_squared[best].first;

    double runner_up = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < out.chi_squared.size(); ++i) {
        if (i != best) {
            runner_up = std::min(runner_up, out.chi_squared[i].second);
        }
    }
    if (runner_up - out.chi_squared[best].second < 1.0) {
        out.warning = fmt::format("ambiguous frequency: best chi-squared {:.6g} at m={} is within 1 "
                                  "of the runner-up {:.6g}",
                                  out.chi_squared[best].second, out.m, runner_up);
    }
    return out;
}

FringeFitResult fit_fringe(const FringeScan& scan, std::optional<int> m_fixed,
                           std::span<const int> m_candidates, double baseline) {
    validate(scan);
    std::optional<std::string> scan_warning;
    int m = 0;
    if (m_fixed) {
        m = *m_fixed;
    } else {
        detail::require(!m_candidates.empty(), "fit without a fixed m needs candidate frequencies");
        const FrequencyScanResult fs = frequency_scan(scan, m_candidates, baseline);
        m            = fs.m;
        scan_warning = fs.warning;
    }
    FringeFitResult r = fit_fixed(scan, m, baseline, m_fixed.has_value());
    if (scan_warning) {
        r.warnings.insert(r.warnings.begin(), *scan_warning);
    }

    const auto [lo, hi] = std::minmax_element(scan.angles.begin(), scan.angles.end());
    const double span   = *hi - *lo;
    const double half_period = kPi / (2.0 * m);
    if (span > 0.0) {
        const double per_half =
            static_cast<double>(scan.angles.size() - 1) * half_period / span;
        if (per_half < 8.0) {
            r.warnings.push_back(fmt::format(
                "{:.3g} points per fringe half-period at m={}; at least 8 are needed", per_half, m));
        }
    }
    return r;
}

std::string fit_csv(const FringeFitResult& fit) {
    std::string out = csv_preamble("fit");
    out += "parameter,value,stderr\n";
    out += fmt::format("m,{},0\n", fit.m);
    out += fmt::format("amplitude,{:.17g},{:.17g}\n", fit.amplitude, fit.amplitude_stderr);
    out += fmt::format("visibility,{:.17g},{:.17g}\n", fit.visibility, fit.visibility_stderr);
    out += fmt::format("phase,{:.17g},{:.17g}\n", fit.phase, fit.phase_stderr);
    out += fmt::format("baseline,{:.17g},0\n", fit.baseline);
    out += fmt::format("chi_squared,{:.17g},0\n", fit.chi_squared);
    out += fmt::format("dof,{},0\n", fit.dof);
    return out;
}

} // namespace gearsim
