#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <random>
#include <sstream>

#include "gearsim/angles.hpp"
#include "gearsim/error.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/rng.hpp"
#include "gearsim/sampler.hpp"
#include "oracles.hpp"

using namespace gearsim;

namespace {

constexpr double kAlpha = 1e-3;

ProbeSpec coherent(int m, double mean, double eta = 1.0, double xi = 0.0) {
    ProbeSpec s    = gear_probe(m, xi, 1.0, eta);
    s.strategy     = Strategy::CoherentGear;
    s.mean_photons = mean;
    return s;
}

ProbeSpec pair(BellState bell, int m_a, int m_b, double v = 1.0, double eta = 1.0) {
    ProbeSpec s;
    s.strategy       = Strategy::EntangledPair;
    s.bell_state     = bell;
    s.q_a            = Charge::from_value(0.5 * (m_a - 1));
    s.q_b            = Charge::from_value(0.5 * (m_b - 1));
    s.visibility     = v;
    s.transmissivity = eta;
    return s;
}

double within_sigmas(double observed, double expected, double sd) {
    return std::abs(observed - expected) / sd;
}

} // namespace

TEST(Rng, ReferenceStream) {
    // std::mt19937_64 output is fixed by the standard: the 10000th draw from the
    // default seed is 9981545732273789042.
    std::mt19937_64 reference;
    reference.discard(9999);
    EXPECT_EQ(reference(), 9981545732273789042ULL);
    EXPECT_EQ(splitmix64(0), 0xe220a8397b1dcdafULL);
    EXPECT_NE(derive_seed(1, 0), derive_seed(1, 1));
    EXPECT_NE(derive_seed(1, 0), derive_seed(2, 0));
}

TEST(Rng, UniformRange) {
    Rng rng(3);
    for (int i = 0; i < 100000; ++i) {
        const double u = rng.uniform();
        ASSERT_GE(u, 0.0);
        ASSERT_LT(u, 1.0);
    }
}

TEST(Rng, PoissonMomentsBothRegimes) {
    for (const double mean : {0.3, 4.0, 9.99, 10.0, 37.5, 2000.0}) {
        Rng rng(11);
        const int n = 200000;
        double sum  = 0.0;
        double sq   = 0.0;
        for (int i = 0; i < n; ++i) {
            const auto k = static_cast<double>(rng.poisson(mean));
            sum += k;
            sq += k * k;
        }
        const double m   = sum / n;
        const double var = sq / n - m * m;
        EXPECT_LT(within_sigmas(m, mean, std::sqrt(mean / n)), 4.0) << mean;
        EXPECT_NEAR(var / mean, 1.0, 0.03) << mean;
    }
}

TEST(Rng, PoissonGoodnessOfFit) {
    for (const double mean : {2.5, 25.0}) {
        Rng rng(29);
        const int n = 100000;
        std::vector<double> observed(100, 0.0);
        std::vector<double> probabilities(100, 0.0);
        for (int i = 0; i < n; ++i) {
            const auto k = rng.poisson(mean);
            observed[std::min<std::uint64_t>(k, 99)] += 1.0;
        }
        for (int k = 0; k < 100; ++k) {
            probabilities[k] = oracle::poisson_mass(k, mean);
        }
        EXPECT_GT(oracle::chi_squared_p_value(observed, probabilities, n), kAlpha) << mean;
    }
}

TEST(SinglePhotons, Examples) {
    const Dataset all_h = sample_single_photons(gear_probe(7), 0.0, 500, 1);
    EXPECT_EQ(all_h.counts[Label::H], 500U);

    const Dataset lossy = sample_single_photons(gear_probe(7, 0.0, 1.0, 0.5), 0.3, 10000, 2);
    const auto surviving = lossy.counts[Label::H] + lossy.counts[Label::V];
    EXPECT_LT(within_sigmas(static_cast<double>(surviving), 5000.0, 50.0), 4.0);

    const Dataset mid = sample_single_photons(gear_probe(7), kPi / 28.0, 10000, 3);
    EXPECT_LT(within_sigmas(static_cast<double>(mid.counts[Label::H]), 5000.0, 50.0), 4.0);
    EXPECT_THROW((void)sample_single_photons(gear_probe(7), 0.0, 0, 1), Error);
}

TEST(SinglePhotons, Deterministic) {
    const ProbeSpec s = gear_probe(21, 0.3, 0.9, 0.8);
    EXPECT_EQ(sample_single_photons(s, 0.7, 5000, 42), sample_single_photons(s, 0.7, 5000, 42));
    EXPECT_NE(sample_single_photons(s, 0.7, 5000, 42).records,
              sample_single_photons(s, 0.7, 5000, 43).records);
}

TEST(SinglePhotons, GoodnessOfFitOnRandomTuples) {
    std::mt19937_64 gen(77);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const ProbeSpec s = gear_probe(1 + static_cast<int>(gen() % 101), kPi * unit(gen),
                                       unit(gen), 0.1 + 0.9 * unit(gen));
        const double theta = 2.0 * kPi * unit(gen);
        const Dataset d    = sample_single_photons(s, theta, 100000, gen());
        const std::vector<double> observed{static_cast<double>(d.counts[Label::H]),
                                           static_cast<double>(d.counts[Label::V]),
                                           static_cast<double>(d.counts[Label::Lost])};
        const double eta = s.transmissivity;
        const double p_h = oracle::malus(gear_ratio(s), s.visibility, theta, s.xi);
        const std::vector<double> probabilities{eta * p_h, eta * (1.0 - p_h), 1.0 - eta};
        EXPECT_GT(oracle::chi_squared_p_value(observed, probabilities, 100000.0), kAlpha) << t;
        EXPECT_EQ(d.counts.total_records(), d.records.size());
    }
}

TEST(Coherent, Examples) {
    const Dataset bright = sample_coherent(coherent(5, 10.0, 0.9), 0.0, 1000, 4);
    EXPECT_EQ(bright.counts.total_n_v, 0U);
    EXPECT_LT(within_sigmas(bright.counts.total_n_h / 1000.0, 9.0, std::sqrt(9.0 / 1000.0)), 4.0);

    const Dataset dark = sample_coherent(coherent(5, 0.0), 0.4, 100, 4);
    EXPECT_EQ(dark.counts.total_n_h + dark.counts.total_n_v, 0U);

    const Dataset mixed = sample_coherent(coherent(21, 6.0, 0.7), 0.123, 5000, 5);
    const double total  = static_cast<double>(mixed.counts.total_n_h + mixed.counts.total_n_v);
    const double mean   = 0.7 * 6.0 * 5000;
    EXPECT_LT(within_sigmas(total, mean, std::sqrt(mean)), 4.0);
    EXPECT_THROW((void)sample_coherent(coherent(5, 1.0), 0.0, 0, 1), Error);
}

TEST(Coherent, GoodnessOfFitOnRandomTuples) {
    std::mt19937_64 gen(78);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const ProbeSpec s  = coherent(1 + static_cast<int>(gen() % 101), 0.5 + 30.0 * unit(gen),
                                      0.2 + 0.8 * unit(gen), kPi * unit(gen));
        const double theta = 2.0 * kPi * unit(gen);
        const Dataset d    = sample_coherent(s, theta, 100000, gen());
        const double p_h   = oracle::malus(gear_ratio(s), 1.0, theta, s.xi);
        const double scale = s.transmissivity * s.mean_photons;
        for (const bool h : {true, false}) {
            const double mean = scale * (h ? p_h : 1.0 - p_h);
            std::vector<double> observed(200, 0.0);
            std::vector<double> probabilities(200, 0.0);
            for (const auto& r : d.records) {
                observed[std::min<std::uint64_t>(h ? r.n_h : r.n_v, 199)] += 1.0;
            }
            for (int k = 0; k < 200; ++k) {
                probabilities[k] = oracle::poisson_mass(k, mean);
            }
            EXPECT_GT(oracle::chi_squared_p_value(observed, probabilities, 100000.0), kAlpha)
                << t << (h ? " H" : " V");
        }
    }
}

TEST(Entangled, Examples) {
    const Dataset singlet = sample_entangled(pair(BellState::PsiMinus, 9, 9), 0.4, 0.4, 2000, 6);
    EXPECT_EQ(singlet.counts[Label::HH] + singlet.counts[Label::VV], 0U);

    // Sigma = pi/2 with m_A = 7, m_B = 11, co-rotating: theta = pi/36
    const Dataset phi = sample_entangled(pair(BellState::PhiMinus, 7, 11), kPi / 36.0,
                                         kPi / 36.0, 2000, 7);
    EXPECT_EQ(phi.counts[Label::HV] + phi.counts[Label::VH], 0U);

    const ProbeSpec s   = pair(BellState::PhiMinus, 7, 11, 0.826);
    const double theta  = 0.05;
    const Dataset noisy = sample_entangled(s, theta, theta, 10000, 8);
    const double p_hh   = oracle::bell_coincidence(oracle::Bell::PhiMinus, 7 * theta, 11 * theta,
                                                   true, true, 0.826);
    EXPECT_LT(within_sigmas(noisy.counts[Label::HH] / 1e4, p_hh, std::sqrt(p_hh * (1 - p_hh) / 1e4)),
              4.0);
    EXPECT_THROW((void)sample_entangled(gear_probe(3), 0.1, 0.1, 10, 1), Error);
    EXPECT_THROW((void)sample_entangled(s, 0.1, 0.1, 0, 1), Error);
}

TEST(Entangled, GoodnessOfFitAndLossAccounting) {
    std::mt19937_64 gen(79);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int t = 0; t < 20; ++t) {
        const auto bell  = t % 2 == 0 ? BellState::PsiMinus : BellState::PhiMinus;
        const int ma     = 1 + static_cast<int>(gen() % 21);
        const int mb     = 1 + static_cast<int>(gen() % 21);
        const double v   = unit(gen);
        const double eta = 0.3 + 0.7 * unit(gen);
        const double ta  = 2.0 * kPi * unit(gen);
        const double tb  = 2.0 * kPi * unit(gen);
        const Dataset d  = sample_entangled(pair(bell, ma, mb, v, eta), ta, tb, 100000, gen());
        const auto ob    = bell == BellState::PsiMinus ? oracle::Bell::PsiMinus
                                                       : oracle::Bell::PhiMinus;
        const double both = eta * eta;
        std::vector<double> observed;
        std::vector<double> probabilities;
        for (const auto& [label, a, b] : {std::tuple{Label::HH, true, true},
                                          std::tuple{Label::HV, true, false},
                                          std::tuple{Label::VH, false, true},
                                          std::tuple{Label::VV, false, false}}) {
            observed.push_back(static_cast<double>(d.counts[label]));
            probabilities.push_back(both * oracle::bell_coincidence(ob, ma * ta, mb * tb, a, b, v));
        }
        observed.push_back(static_cast<double>(d.counts[Label::LossA]));
        probabilities.push_back((1 - eta) * eta);
        observed.push_back(static_cast<double>(d.counts[Label::LossB]));
        probabilities.push_back(eta * (1 - eta));
        observed.push_back(static_cast<double>(d.counts[Label::LossBoth]));
        probabilities.push_back((1 - eta) * (1 - eta));
        EXPECT_GT(oracle::chi_squared_p_value(observed, probabilities, 100000.0), kAlpha) << t;

        const double lost = static_cast<double>(d.counts[Label::LossA] + d.counts[Label::LossB] +
                                                d.counts[Label::LossBoth]) /
                            1e5;
        const double p_lost = 1.0 - both;
        EXPECT_LT(within_sigmas(lost, p_lost, std::sqrt(p_lost * (1 - p_lost) / 1e5)), 4.0);
    }
}

TEST(DatasetIo, RoundTrip) {
    const Dataset a = sample_single_photons(gear_probe(21, 0.3, 0.9, 0.8), 0.7, 300, 42);
    std::stringstream sa(dataset_to_string(a));
    EXPECT_EQ(read_dataset(sa), a);

    ProbeSpec cs    = gear_probe(5, 0.1, 0.95);
    cs.strategy     = Strategy::CoherentGear;
    cs.mean_photons = 12.5;
    cs.visibility_v = 0.91;
    const Dataset b = sample_coherent(cs, 1.1, 50, 9);
    std::stringstream sb(dataset_to_string(b));
    EXPECT_EQ(read_dataset(sb), b);

    const Dataset c = sample_entangled(pair(BellState::PhiMinus, 7, 11, 0.8, 0.9), 0.2, 0.3, 80, 1);
    std::stringstream sc(dataset_to_string(c));
    EXPECT_EQ(read_dataset(sc), c);
}

TEST(DatasetIo, RejectsMalformedInput) {
    const Dataset a        = sample_single_photons(gear_probe(3), 0.7, 5, 42);
    const std::string good = dataset_to_string(a);
    for (const std::string& bad :
         {std::string("not a dataset\n"), good.substr(0, good.size() / 2),
          [&] {
              std::string s = good;
              s.replace(s.rfind(",H"), 2, ",Q");
              return s;
          }()}) {
        std::stringstream in(bad);
        try {
            (void)read_dataset(in);
            ADD_FAILURE() << bad;
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::Io);
        }
    }
}
