#include "gearsim/sampler.hpp"

#include <array>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gearsim/error.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/rng.hpp"
#include "gearsim/serialization.hpp"

namespace gearsim {
namespace {

constexpr std::string_view kFormatTag = "# gearsim-dataset v1";

Dataset make_dataset(const ProbeSpec& spec, double theta_a, double theta_b, std::uint64_t seed,
                     std::uint64_t size) {
    Dataset d;
    d.spec         = spec;
    d.true_theta   = theta_a;
    d.true_theta_b = theta_b;
    d.seed         = seed;
    d.records.reserve(size);
    return d;
}

[[noreturn]] void malformed(const std::string& what) {
    detail::fail(ErrorCode::Io, "malformed dataset: " + what);
}

std::string header_value(std::istream& in, std::string_view key) {
    std::string line;
    if (!std::getline(in, line)) {
        malformed("missing header line '" + std::string(key) + "'");
    }
    const std::string prefix = "# " + std::string(key) + ": ";
    if (line.rfind(prefix, 0) != 0) {
        malformed("expected '" + prefix + "', got '" + line + "'");
    }
    return line.substr(prefix.size());
}

std::uint64_t parse_u64(const std::string& text) {
    try {
        std::size_t used = 0;
        const auto v     = std::stoull(text, &used);
        if (used != text.size()) {
            malformed("bad integer '" + text + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        malformed("bad integer '" + text + "'");
    }
}

double parse_double(const std::string& text) {
    try {
        std::size_t used = 0;
        const double v   = std::stod(text, &used);
        if (used != text.size()) {
            malformed("bad number '" + text + "'");
        }
        return v;
    } catch (const std::logic_error&) {
        malformed("bad number '" + text + "'");
    }
}

} // namespace

std::uint64_t CountsSummary::total_records() const {
    std::uint64_t total = 0;
    for (const auto n : per_label) {
        total += n;
    }
    return total;
}

CountsSummary summarize(const std::vector<Record>& records) {
    CountsSummary summary;
    for (const auto& r : records) {
        ++summary.per_label[static_cast<std::size_t>(r.label)];
        summary.total_n_h += r.n_h;
        summary.total_n_v += r.n_v;
    }
    return summary;
}

Dataset sample_single_photons(const ProbeSpec& spec, double true_theta, std::uint64_t count,
                              std::uint64_t seed) {
    detail::require(count >= 1, "sample size must be >= 1");
    detail::require(is_single_mode(spec.strategy),
                    "sample_single_photons needs a single-mode strategy");
    const double eta = spec.transmissivity;
    const double p_h = arrival_probability(spec, Label::H, true_theta);
    detail::require(eta > 0.0 && eta <= 1.0, "transmissivity must lie in (0, 1]");

    Dataset d = make_dataset(spec, true_theta, 0.0, seed, count);
    Rng rng(seed);
    for (std::uint64_t i = 0; i < count; ++i) {
        const double u_loss    = rng.uniform();
        const double u_outcome = rng.uniform();
        Record r;
        if (u_loss >= eta) {
            r.label = Label::Lost;
        } else {
            r.label = u_outcome < p_h ? Label::H : Label::V;
        }
        d.records.push_back(r);
    }
    d.counts = summarize(d.records);
    return d;
}

Dataset sample_coherent(const ProbeSpec& spec, double true_theta, std::uint64_t pulses,
                        std::uint64_t seed) {
    detail::require(pulses >= 1, "pulse count must be >= 1");
    const ChannelMeans means = coherent_channel_means(spec, true_theta);

    Dataset d = make_dataset(spec, true_theta, 0.0, seed, pulses);
    Rng rng(seed);
    for (std::uint64_t i = 0; i < pulses; ++i) {
        Record r;
        r.label = Label::Counts;
        r.n_h   = rng.poisson(means.h);
        r.n_v   = rng.poisson(means.v);
        d.records.push_back(r);
    }
    d.counts = summarize(d.records);
    return d;
}

Dataset sample_entangled(const ProbeSpec& spec, double theta_a, double theta_b,
                         std::uint64_t pairs, std::uint64_t seed) {
    detail::require(pairs >= 1, "pair count must be >= 1");
    detail::require(spec.strategy == Strategy::EntangledPair,
                    "sample_entangled needs strategy EntangledPair");
    const double eta = spec.transmissivity;
    detail::require(eta > 0.0 && eta <= 1.0, "transmissivity must lie in (0, 1]");

    constexpr std::array<Label, 4> kCoincidences{Label::HH, Label::HV, Label::VH, Label::VV};
    std::array<double, 4> cumulative{};
    double running = 0.0;
    for (std::size_t i = 0; i < kCoincidences.size(); ++i) {
        running += entangled_joint_probability(spec, theta_a, theta_b, kCoincidences[i]);
        cumulative[i] = running;
    }

    Dataset d = make_dataset(spec, theta_a, theta_b, seed, pairs);
    Rng rng(seed);
    for (std::uint64_t i = 0; i < pairs; ++i) {
        const bool lost_a = rng.uniform() >= eta;
        const bool lost_b = rng.uniform() >= eta;
        const double u    = rng.uniform() * running;
        Record r;
        if (lost_a && lost_b) {
            r.label = Label::LossBoth;
        } else if (lost_a) {
            r.label = Label::LossA;
        } else if (lost_b) {
            r.label = Label::LossB;
        } else {
            std::size_t k = 0;
            while (k + 1 < cumulative.size() && u >= cumulative[k]) {
                ++k;
            }
            r.label = kCoincidences[k];
        }
        d.records.push_back(r);
    }
    d.counts = summarize(d.records);
    return d;
}

void write_dataset(std::ostream& out, const Dataset& d) {
    const nlohmann::json spec = d.spec;
    out << kFormatTag << '\n';
    out << "# spec: " << spec.dump() << '\n';
    out << fmt::format("# true_theta: {:.17g}\n", d.true_theta);
    out << fmt::format("# true_theta_b: {:.17g}\n", d.true_theta_b);
    out << "# seed: " << d.seed << '\n';
    out << "# records: " << d.records.size() << '\n';
    const bool coherent = d.spec.strategy == Strategy::CoherentGear;
    out << (coherent ? "index,n_h,n_v\n" : "index,label\n");
    std::size_t index = 0;
    for (const auto& r : d.records) {
        if (coherent) {
            out << index << ',' << r.n_h << ',' << r.n_v << '\n';
        } else {
            out << index << ',' << to_string(r.label) << '\n';
        }
        ++index;
    }
}

std::string dataset_to_string(const Dataset& dataset) {
    std::ostringstream out;
    write_dataset(out, dataset);
    return out.str();
}

Dataset read_dataset(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kFormatTag) {
        malformed("missing format tag");
    }
    Dataset d;
    try {
        d.spec = nlohmann::json::parse(header_value(in, "spec")).get<ProbeSpec>();
    } catch (const nlohmann::json::exception& e) {
        malformed(std::string("spec: ") + e.what());
    }
    d.true_theta   = parse_double(header_value(in, "true_theta"));
    d.true_theta_b = parse_double(header_value(in, "true_theta_b"));
    d.seed         = parse_u64(header_value(in, "seed"));
    const auto n   = parse_u64(header_value(in, "records"));

    const bool coherent = d.spec.strategy == Strategy::CoherentGear;
    if (!std::getline(in, line) || line != (coherent ? "index,n_h,n_v" : "index,label")) {
        malformed("bad column header");
    }
    d.records.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        if (!std::getline(in, line)) {
            malformed("expected " + std::to_string(n) + " records, got " + std::to_string(i));
        }
        std::istringstream fields(line);
        std::string index, a, b;
        std::getline(fields, index, ',');
        std::getline(fields, a, ',');
        if (parse_u64(index) != i) {
            malformed("record index out of order at line '" + line + "'");
        }
        Record r;
        if (coherent) {
            std::getline(fields, b, ',');
            r.label = Label::Counts;
            r.n_h   = parse_u64(a);
            r.n_v   = parse_u64(b);
        } else {
            try {
                r.label = parse_label(a);
            } catch (const Error&) {
                malformed("unknown label '" + a + "'");
            }
        }
        d.records.push_back(r);
    }
    d.counts = summarize(d.records);
    return d;
}

} // namespace gearsim
