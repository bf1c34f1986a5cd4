#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "gearsim/probe_spec.hpp"

namespace gearsim {

/// One detection record. Single photons and pairs use `label` only; coherent
/// pulses carry Label::Counts and the photon numbers of both ports.
struct Record {
    Label label = Label::H;
    std::uint64_t n_h = 0;
    std::uint64_t n_v = 0;

    friend bool operator==(const Record&, const Record&) = default;
};

struct CountsSummary {
    std::array<std::uint64_t, 11> per_label{};
    std::uint64_t total_n_h = 0; ///< coherent pulses only
    std::uint64_t total_n_v = 0;

    [[nodiscard]] std::uint64_t operator[](Label label) const {
        return per_label[static_cast<std::size_t>(label)];
    }
    [[nodiscard]] std::uint64_t total_records() const;

    friend bool operator==(const CountsSummary&, const CountsSummary&) = default;
};

/// A seeded synthetic measurement record. `true_theta` is the generating angle
/// (arm A for pairs); estimators must not read it.
struct Dataset {
    ProbeSpec spec;
    double true_theta = 0.0;
    double true_theta_b = 0.0;
    std::uint64_t seed = 0;
    std::vector<Record> records;
    CountsSummary counts;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

[[nodiscard]] CountsSummary summarize(const std::vector<Record>& records);

/// Each record: Lost with probability 1 - eta, otherwise H or V from the
/// strategy's arrival law. Two uniforms are consumed per record.
[[nodiscard]] Dataset sample_single_photons(const ProbeSpec& spec, double true_theta,
                                            std::uint64_t count, std::uint64_t seed);

/// Per pulse: n_H ~ Poisson(lambda_H), n_V ~ Poisson(lambda_V), independent.
[[nodiscard]] Dataset sample_coherent(const ProbeSpec& spec, double true_theta,
                                      std::uint64_t pulses, std::uint64_t seed);

/// Per pair: each arm survives with probability eta; surviving pairs draw one
/// of HH/HV/VH/VV from the joint law, lost ones are recorded as LossA/LossB/LossBoth.
[[nodiscard]] Dataset sample_entangled(const ProbeSpec& spec, double theta_a, double theta_b,
                                       std::uint64_t pairs, std::uint64_t seed);

/// Columnar text form: a '#' header block (format tag, spec JSON, angles,
/// seed, record count) then "index,label" or "index,n_h,n_v" lines.
void write_dataset(std::ostream& out, const Dataset& dataset);
[[nodiscard]] std::string dataset_to_string(const Dataset& dataset);
/// Throws Error(Io) on malformed input.
[[nodiscard]] Dataset read_dataset(std::istream& in);

} // namespace gearsim
