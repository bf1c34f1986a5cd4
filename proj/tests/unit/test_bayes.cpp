#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "gearsim/angles.hpp"
#include "gearsim/bayes.hpp"
#include "gearsim/error.hpp"
#include "gearsim/fisher.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/sampler.hpp"
#include "oracles.hpp"

using namespace gearsim;

namespace {

// Composite Simpson rule with n (even) panels.
double simpson(const std::function<double(double)>& f, double a, double b, int n = 20000) {
    const double h = (b - a) / n;
    double s       = f(a) + f(b);
    for (int i = 1; i < n; ++i) {
        s += (i % 2 == 1 ? 4.0 : 2.0) * f(a + i * h);
    }
    return s * h / 3.0;
}

struct Reference {
    double mean;
    double sd;
};

// Posterior moments of n_h H and n_v V outcomes under the oracle Malus law.
Reference reference_moments(int m, double v, double xi, int n_h, int n_v, double lo, double hi) {
    auto like = [&](double t) {
        const double p = oracle::malus(m, v, t, xi);
        return std::pow(p, n_h) * std::pow(1.0 - p, n_v);
    };
    const double z    = simpson(like, lo, hi);
    const double mean = simpson([&](double t) { return t * like(t); }, lo, hi) / z;
    const double var =
        simpson([&](double t) { return (t - mean) * (t - mean) * like(t); }, lo, hi) / z;
    return {mean, std::sqrt(var)};
}

// Half period on which cos^2(m theta + xi) is monotone.
Interval bijective_like(int m, double xi) {
    return {-xi / m, (0.5 * kPi - xi) / m};
}

} // namespace

TEST(Posterior, UniformWithoutData) {
    const PosteriorGrid g = posterior_from_counts(gear_probe(1), 0, 0, {0.0, kPi / 2.0});
    EXPECT_NEAR(estimate(g), kPi / 4.0, 1e-12);
    EXPECT_NEAR(uncertainty(g, estimate(g)), (kPi / 2.0) / std::sqrt(12.0), 1e-6);
}

TEST(Posterior, SinglePhotonClosedForm) {
    // one H photon at m = 1: posterior proportional to cos^2 on [0, pi/2]
    const PosteriorGrid g = posterior_from_counts(gear_probe(1), 1, 0, {0.0, kPi / 2.0}, 4096);
    const double mean     = estimate(g);
    EXPECT_NEAR(mean, kPi / 4.0 - 1.0 / kPi, 1e-6);
    EXPECT_NEAR(mean, 0.4671, 5e-5);
    const double var = kPi * kPi / 12.0 - 0.5 - mean * mean;
    EXPECT_NEAR(uncertainty(g, mean), std::sqrt(var), 1e-6);
    EXPECT_NEAR(uncertainty(g, mean), 0.322948, 1e-6);
}

TEST(Posterior, MatchesQuadratureOracle) {
    struct Case {
        int m;
        double v, xi;
        int n_h, n_v;
    };
    for (const Case& c : {Case{7, 0.9, 0.0, 30, 12}, Case{21, 0.8, 0.4, 5, 9},
                          Case{3, 1.0, 1.1, 200, 150}}) {
        const Interval omega = bijective_like(c.m, c.xi);
        const PosteriorGrid g =
            posterior_from_counts(gear_probe(c.m, c.xi, c.v), c.n_h, c.n_v, omega, 8192);
        const Reference r = reference_moments(c.m, c.v, c.xi, c.n_h, c.n_v, omega.lo, omega.hi);
        EXPECT_NEAR(estimate(g), r.mean, 1e-6 * omega.length()) << c.m;
        EXPECT_NEAR(uncertainty(g, estimate(g)), r.sd, 1e-6 * omega.length()) << c.m;
    }
}

TEST(Posterior, WeightsNormalized) {
    const Dataset d       = sample_single_photons(gear_probe(21, 0.2, 0.9, 0.7), 0.01, 3000, 5);
    const PosteriorGrid g = posterior(d, {0.0, kPi / 42.0});
    double total          = 0.0;
    for (const double w : g.weights) {
        EXPECT_GE(w, 0.0);
        total += w;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_EQ(g.nodes.front(), 0.0);
    EXPECT_NEAR(g.nodes.back(), kPi / 42.0, 1e-15);
}

TEST(Posterior, GridRefinementConverges) {
    const Dataset d      = sample_single_photons(gear_probe(7, 0.0, 0.95), kPi / 28.0, 1000, 8);
    const Interval omega = {0.0, kPi / 14.0};
    const double coarse  = estimate(posterior(d, omega, 4096));
    const double fine    = estimate(posterior(d, omega, 8192));
    EXPECT_LT(std::abs(coarse - fine), 1e-6);
}

TEST(Posterior, DegenerateAndInvalidInputs) {
    const std::vector<double> zero_prior(kMinGridSize, 0.0);
    try {
        (void)posterior_from_counts(gear_probe(3), 4, 4, {0.0, 0.5}, kMinGridSize, zero_prior);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::DegeneratePosterior);
    }
    EXPECT_THROW((void)posterior_from_counts(gear_probe(3), 1, 1, {0.0, 0.5}, 100), Error);
    EXPECT_THROW((void)posterior_from_counts(gear_probe(3), 1, 1, {0.5, 0.5}), Error);
    EXPECT_THROW((void)posterior_from_counts(gear_probe(3), 1, 1, {0.0, 7.0}), Error);
    const std::vector<double> short_prior(10, 1.0);
    EXPECT_THROW((void)posterior_from_counts(gear_probe(3), 1, 1, {0.0, 0.5}, 1024, short_prior),
                 Error);
}

TEST(Posterior, PriorIsMultiplied) {
    std::vector<double> prior(1024);
    for (std::size_t i = 0; i < prior.size(); ++i) {
        const double t = 0.5 * kPi * static_cast<double>(i) / 1023.0;
        prior[i]       = std::cos(t) * std::cos(t);
    }
    const PosteriorGrid with_prior = posterior_from_counts(gear_probe(1), 0, 0, {0.0, kPi / 2.0},
                                                           1024, prior);
    const PosteriorGrid from_data  = posterior_from_counts(gear_probe(1), 1, 0, {0.0, kPi / 2.0});
    EXPECT_NEAR(estimate(with_prior), estimate(from_data), 1e-12);
}

TEST(EstimateAngle, ReportsResources) {
    const Dataset d = sample_single_photons(gear_probe(7, 0.0, 1.0, 0.6), kPi / 28.0, 2000, 9);
    const EstimationResult r = estimate_angle(d, {0.0, kPi / 14.0});
    EXPECT_EQ(r.m_used, 7);
    EXPECT_EQ(r.photons_consumed, d.counts[Label::H] + d.counts[Label::V]);
    EXPECT_LT(std::abs(r.theta_bar - kPi / 28.0), 5.0 * r.delta_theta);
    EXPECT_GE(r.theta_bar, 0.0);
    EXPECT_LT(r.theta_bar, kPi / 14.0);
}

TEST(EstimateAngle, UncertaintyScalesAsInverseRootN) {
    const ProbeSpec s    = gear_probe(7);
    const double theta   = kPi / 28.0;
    const Interval omega = {0.0, kPi / 14.0};
    std::vector<double> log_n;
    std::vector<double> log_delta;
    for (const std::uint64_t n : {100U, 300U, 1000U, 3000U, 10000U}) {
        double sum = 0.0;
        for (std::uint64_t seed = 0; seed < 20; ++seed) {
            sum += estimate_angle(sample_single_photons(s, theta, n, seed), omega).delta_theta;
        }
        log_n.push_back(std::log(static_cast<double>(n)));
        log_delta.push_back(std::log(sum / 20.0));
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        mx += log_n[i];
        my += log_delta[i];
    }
    mx /= log_n.size();
    my /= log_n.size();
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < log_n.size(); ++i) {
        sxy += (log_n[i] - mx) * (log_delta[i] - my);
        sxx += (log_n[i] - mx) * (log_n[i] - mx);
    }
    EXPECT_NEAR(sxy / sxx, -0.5, 0.05);
}

TEST(EstimateAngle, WithinTwiceTheBound) {
    const ProbeSpec s = gear_probe(7);
    const auto r = estimate_angle(sample_single_photons(s, kPi / 28.0, 10000, 3), {0.0, kPi / 14.0});
    const double bound = crb(s, 10000).crb;
    EXPECT_GT(r.delta_theta, 0.5 * bound);
    EXPECT_LT(r.delta_theta, 2.0 * bound);
}

TEST(EstimateAngle, CoherentData) {
    ProbeSpec s    = gear_probe(21, 0.0, 0.95);
    s.strategy     = Strategy::CoherentGear;
    s.mean_photons = 20.0;
    const double theta = kPi / 84.0;
    const auto r = estimate_angle(sample_coherent(s, theta, 500, 12), {0.0, kPi / 42.0});
    EXPECT_EQ(r.m_used, 21);
    EXPECT_LT(std::abs(r.theta_bar - theta), 5.0 * r.delta_theta);
}

TEST(PosteriorCsv, Header) {
    const std::string csv = posterior_csv(posterior_from_counts(gear_probe(1), 0, 0, {0.0, 1.0}, 256));
    EXPECT_EQ(csv.rfind("# gearsim", 0), 0U);
    EXPECT_NE(csv.find("theta,probability\n"), std::string::npos);
}
