#include "gearsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "gearsim/adaptive.hpp"
#include "gearsim/bayes.hpp"
#include "gearsim/csv.hpp"
#include "gearsim/fisher.hpp"
#include "gearsim/fringe_fit.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/rng.hpp"
#include "gearsim/sampler.hpp"

namespace gearsim {
namespace {

std::string fit_section(const FringeScan& scan, const ExperimentConfig& config, int default_m,
                        std::string_view channel) {
    std::string out = fmt::format("# channel: {}\n", channel);
    if (scan.angles.size() < 12) {
        return out + fmt::format("# fit skipped: {} points, at least 12 needed\n",
                                 scan.angles.size());
    }
    FringeFitResult fit;
    if (config.fit_m) {
        fit = fit_fringe(scan, *config.fit_m);
    } else if (!config.fit_candidates.empty()) {
        fit = fit_fringe(scan, std::nullopt, config.fit_candidates);
    } else {
        fit = fit_fringe(scan, default_m);
    }
    out += fit_csv(fit);
    for (const auto& w : fit.warnings) {
        out += "# warning: " + w + "\n";
    }
    return out;
}

Interval default_interval(const ExperimentConfig& config) {
    if (config.interval) {
        return {(*config.interval)[0], (*config.interval)[1]};
    }
    return bijective_interval(fringe_multiplier(config.probe), config.probe.xi, 0.0);
}

Dataset sample_estimation_run(const ExperimentConfig& config, std::uint64_t seed) {
    if (config.probe.strategy == Strategy::CoherentGear) {
        return sample_coherent(config.probe, *config.true_theta, config.shots, seed);
    }
    return sample_single_photons(config.probe, *config.true_theta, config.shots, seed);
}

Dataset prefix(const Dataset& full, std::uint64_t n) {
    Dataset d = full;
    d.records.resize(n);
    d.counts = summarize(d.records);
    return d;
}

} // namespace

void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(threads, 1U), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(error_mutex);
                    if (!first_error) {
                        first_error = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (first_error) {
        std::rethrow_exception(first_error);
    }
}

std::string cmd_fringe(const ExperimentConfig& config, unsigned threads) {
    const std::vector<double> angles = config.sweep->angles();
    std::vector<Dataset> data(angles.size());
    parallel_for(angles.size(), threads, [&](std::size_t i) {
        data[i] = sample_single_photons(config.probe, angles[i], config.shots,
                                        derive_seed(config.seed, i));
    });

    std::string out = csv_preamble("fringe");
    out += "theta,records,n_h,n_v,p_hat,stderr\n";
    for (const Dataset& d : data) {
        const auto nh  = d.counts[Label::H];
        const auto nv  = d.counts[Label::V];
        const auto n   = static_cast<double>(nh + nv);
        const double p = n > 0.0 ? static_cast<double>(nh) / n : 0.0;
        const double se = n > 0.0 ? std::sqrt(p * (1.0 - p) / n) : 0.0;
        out += fmt::format("{:.17g},{},{},{},{:.17g},{:.17g}\n", d.true_theta, d.records.size(), nh,
                           nv, p, se);
    }
    out += fit_section(scan_from_datasets(data, Label::H), config,
                       fringe_multiplier(config.probe), "H");
    return out;
}

std::string cmd_estimate(const ExperimentConfig& config, unsigned threads) {
    const Interval omega = default_interval(config);
    const auto grid      = static_cast<std::size_t>(config.grid_size);
    std::vector<Dataset> data(config.runs);
    std::vector<EstimationResult> results(config.runs);
    parallel_for(config.runs, threads, [&](std::size_t i) {
        data[i]    = sample_estimation_run(config, derive_seed(config.seed, i));
        results[i] = estimate_angle(data[i], omega, grid);
    });

    std::string out = csv_preamble("estimate");
    out += "run,true_theta,theta_bar,delta_theta,m,xi,photons,omega_lo,omega_hi\n";
    for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        out += fmt::format("{},{:.17g},{:.17g},{:.17g},{},{:.17g},{},{:.17g},{:.17g}\n", i,
                           *config.true_theta, r.theta_bar, r.delta_theta, r.m_used, r.xi_used,
                           r.photons_consumed, r.interval.lo, r.interval.hi);
    }

    if (!config.checkpoints.empty()) {
        out += csv_preamble("running");
        out += "nu,theta_bar,delta_theta,abs_error,crb,ratio\n";
        for (const auto nu : config.checkpoints) {
            const EstimationResult r = estimate_angle(prefix(data.front(), nu), omega, grid);
            const double bound       = crb(config.probe, nu, *config.true_theta).crb;
            out += fmt::format("{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", nu, r.theta_bar,
                               r.delta_theta, std::abs(r.theta_bar - *config.true_theta), bound,
                               r.delta_theta / bound);
        }
    }
    out += posterior_csv(posterior(data.front(), omega, grid));
    return out;
}

std::string cmd_adaptive(const ExperimentConfig& config, unsigned threads) {
    ProtocolConfig pc;
    pc.budgets     = config.budgets;
    pc.available_m = config.available_m;
    pc.visibility  = config.probe.visibility;
    pc.eta         = config.probe.transmissivity;
    pc.grid_size   = static_cast<std::size_t>(config.grid_size);

    std::vector<ProtocolResult> results(config.runs);
    parallel_for(config.runs, threads, [&](std::size_t i) {
        results[i] = run_protocol(*config.true_theta, pc, derive_seed(config.seed, i));
    });

    std::string out = protocol_csv_header();
    for (std::size_t i = 0; i < results.size(); ++i) {
        out += protocol_csv_row(results[i], derive_seed(config.seed, i), *config.true_theta);
    }
    if (results.size() == 1) {
        const std::string report = protocol_report(results.front());
        std::size_t start        = 0;
        while (start < report.size()) {
            const std::size_t end = report.find('\n', start);
            const std::string line = report.substr(start, end - start);
            out += line.starts_with('#') ? line + "\n" : "# " + line + "\n";
            start = end == std::string::npos ? report.size() : end + 1;
        }
    }
    return out;
}

std::string cmd_bounds(const ExperimentConfig& config) {
    std::string out;
    if (config.kind != ExperimentKind::EnhancementCurve) {
        out += csv_preamble("bounds");
        out += bound_csv_header() + "\n";
        if (config.probe.strategy == Strategy::EntangledPair ||
            config.probe.strategy == Strategy::ClassicalPolarization) {
            out += bound_csv_row(crb(config.probe, config.shots, config.true_theta)) + "\n";
        } else {
            for (const int m : config.m_values) {
                ProbeSpec spec = config.probe;
                spec.q         = Charge::from_value(0.5 * (m - 1));
                spec.hwp_sign  = +1;
                out += bound_csv_row(crb(spec, config.shots, config.true_theta)) + "\n";
            }
        }
    }
    HeuristicVisibilityModel ideal = config.heuristic;
    ideal.gamma                    = 0.0;
    out += csv_preamble("enhancement");
    out += "m,ideal,heuristic\n";
    for (const int m : config.m_values) {
        out += fmt::format("{},{:.17g},{:.17g}\n", m, enhancement_ratio(m, ideal),
                           enhancement_ratio(m, config.heuristic));
    }
    return out;
}

std::string cmd_entangled(const ExperimentConfig& config, unsigned threads) {
    const std::vector<double> theta_a = config.sweep->angles();
    const bool co_rotation            = !config.sweep_b.has_value();
    const std::vector<double> theta_b = co_rotation ? theta_a : config.sweep_b->angles();
    const std::size_t nb              = co_rotation ? 1 : theta_b.size();
    const std::size_t n               = theta_a.size() * nb;

    std::vector<Dataset> data(n);
    parallel_for(n, threads, [&](std::size_t i) {
        const double a = theta_a[i / nb];
        const double b = co_rotation ? a : theta_b[i % nb];
        data[i] = sample_entangled(config.probe, a, b, config.shots, derive_seed(config.seed, i));
    });

    std::string out = csv_preamble("entangled");
    out += "theta_a,theta_b,pairs,coincidences,hh,hv,vh,vv,f_hh,f_hv,f_vh,f_vv\n";
    for (const Dataset& d : data) {
        const auto hh = d.counts[Label::HH];
        const auto hv = d.counts[Label::HV];
        const auto vh = d.counts[Label::VH];
        const auto vv = d.counts[Label::VV];
        const auto c  = hh + hv + vh + vv;
        auto frac     = [c](std::uint64_t k) {
            return c > 0 ? static_cast<double>(k) / static_cast<double>(c) : 0.0;
        };
        out += fmt::format("{:.17g},{:.17g},{},{},{},{},{},{},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                           d.true_theta, d.true_theta_b, d.records.size(), c, hh, hv, vh, vv,
                           frac(hh), frac(hv), frac(vh), frac(vv));
    }
    if (co_rotation) {
        const int ma = gear_ratio(config.probe.q_a, config.probe.hwp_sign_a);
        const int mb = gear_ratio(config.probe.q_b, config.probe.hwp_sign_b);
        const int k  = config.probe.bell_state == BellState::PhiMinus ? ma + mb : std::abs(ma - mb);
        out += fit_section(scan_from_datasets(data, Label::HH), config, std::max(k, 1), "HH");
    }
    return out;
}

std::string cmd_coherent(const ExperimentConfig& config, unsigned threads) {
    const std::vector<double> angles = config.sweep->angles();
    std::vector<Dataset> data(angles.size());
    parallel_for(angles.size(), threads, [&](std::size_t i) {
        data[i] = sample_coherent(config.probe, angles[i], config.shots, derive_seed(config.seed, i));
    });

    std::string out = csv_preamble("coherent");
    out += "theta,pulses,n_h,n_v,intensity\n";
    for (const Dataset& d : data) {
        const auto nh    = d.counts.total_n_h;
        const auto nv    = d.counts.total_n_v;
        const double tot = static_cast<double>(nh + nv);
        out += fmt::format("{:.17g},{},{},{},{:.17g}\n", d.true_theta, d.records.size(), nh, nv,
                           tot > 0.0 ? static_cast<double>(nh) / tot : 0.0);
    }
    const int m = fringe_multiplier(config.probe);
    out += fit_section(scan_from_datasets(data, Label::H), config, m, "H");
    out += fit_section(scan_from_datasets(data, Label::V), config, m, "V");
    return out;
}

std::string run_experiment(const ExperimentConfig& config, unsigned threads) {
    switch (config.kind) {
    case ExperimentKind::Fringe:
        return cmd_fringe(config, threads);
    case ExperimentKind::Estimate:
        return cmd_estimate(config, threads);
    case ExperimentKind::Adaptive:
        return cmd_adaptive(config, threads);
    case ExperimentKind::Bounds:
    case ExperimentKind::EnhancementCurve:
        return cmd_bounds(config);
    case ExperimentKind::Entangled:
        return cmd_entangled(config, threads);
    case ExperimentKind::Coherent:
        return cmd_coherent(config, threads);
    }
    detail::fail(ErrorCode::InvalidArgument, "unknown experiment kind");
}

} // namespace gearsim
