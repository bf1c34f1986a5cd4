// gearsim: seeded simulation experiments for photonic-gear angle metrology.
//
//   gearsim <fringe|estimate|adaptive|bounds|entangled|coherent>
//           --config PATH [--seed U64] [--out PATH] [--threads N]
//
// GEARSIM_SEED overrides the config seed and GEARSIM_OUT_DIR the output
// directory; explicit flags win over both. Failures print one JSON line
// {"error": <code>, "message": <text>} on stderr and exit nonzero.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gearsim/config.hpp"
#include "gearsim/error.hpp"
#include "gearsim/experiments.hpp"

namespace {

constexpr int kExitError = 1;
constexpr int kExitUsage = 2;

void print_error(std::string_view code, std::string_view message) {
    const nlohmann::json line{{"error", code}, {"message", message}};
    std::cerr << line.dump() << '\n';
}

std::optional<std::string> env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr || *v == '\0') {
        return std::nullopt;
    }
    return std::string(v);
}

std::uint64_t parse_seed(const std::string& text, const char* source) {
    try {
        std::size_t used = 0;
        const auto v     = std::stoull(text, &used, 10);
        if (used == text.size() && text.front() != '-') {
            return v;
        }
    } catch (const std::exception&) {
    }
    throw gearsim::Error(gearsim::ErrorCode::Config,
                         std::string(source) + ": '" + text + "' is not an unsigned 64-bit seed");
}

bool kind_matches(const std::string& command, gearsim::ExperimentKind kind) {
    if (command == "bounds") {
        return kind == gearsim::ExperimentKind::Bounds ||
               kind == gearsim::ExperimentKind::EnhancementCurve;
    }
    return command == gearsim::to_string(kind);
}

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    unsigned threads = 1;
};

int run(const std::string& command, const Options& opt) {
    gearsim::ExperimentConfig config = gearsim::load_config(opt.config);
    if (!kind_matches(command, config.kind)) {
        throw gearsim::Error(gearsim::ErrorCode::Config,
                             "config experiment '" + std::string(gearsim::to_string(config.kind)) +
                                 "' does not match subcommand '" + command + "'");
    }
    if (opt.seed) {
        config.seed = *opt.seed;
    } else if (const auto s = env("GEARSIM_SEED")) {
        config.seed = parse_seed(*s, "GEARSIM_SEED");
    }

    std::optional<std::filesystem::path> target;
    if (opt.out) {
        if (*opt.out != "-") {
            target = *opt.out;
        }
    } else if (const auto dir = env("GEARSIM_OUT_DIR")) {
        const std::filesystem::path name =
            config.output.empty() ? std::filesystem::path(command + ".csv")
                                  : std::filesystem::path(config.output).filename();
        target = std::filesystem::path(*dir) / name;
    } else if (!config.output.empty()) {
        target = config.output;
    }

    const std::string csv = gearsim::run_experiment(config, opt.threads);
    if (!target) {
        std::cout << csv;
        return 0;
    }
    if (target->has_parent_path()) {
        std::filesystem::create_directories(target->parent_path());
    }
    std::ofstream out(*target, std::ios::binary);
    out << csv;
    out.close();
    if (!out) {
        throw gearsim::Error(gearsim::ErrorCode::Io, "cannot write '" + target->string() + "'");
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Photonic-gear angle metrology experiments"};
    app.require_subcommand(1);

    Options opt;
    std::uint64_t seed = 0;
    std::string out;
    for (const char* name : {"fringe", "estimate", "adaptive", "bounds", "entangled", "coherent"}) {
        CLI::App* sub = app.add_subcommand(name, std::string("run the ") + name + " experiment");
        sub->add_option("--config", opt.config, "experiment config (JSON)")->required();
        sub->add_option("--seed", seed, "master seed; overrides GEARSIM_SEED and the config");
        sub->add_option("--out", out, "output CSV path (- for stdout); overrides GEARSIM_OUT_DIR");
        sub->add_option("--threads", opt.threads, "worker threads")
            ->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        print_error("usage", e.what());
        return kExitUsage;
    }

    CLI::App* sub = app.get_subcommands().front();
    if (sub->count("--seed") > 0) {
        opt.seed = seed;
    }
    if (sub->count("--out") > 0) {
        opt.out = out;
    }
    try {
        return run(sub->get_name(), opt);
    } catch (const gearsim::Error& e) {
        print_error(gearsim::to_string(e.code()), e.what());
    } catch (const std::exception& e) {
        print_error("internal", e.what());
    }
    return kExitError;
}
