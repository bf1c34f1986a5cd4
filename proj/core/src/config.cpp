#include "gearsim/config.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gearsim/error.hpp"
#include "gearsim/probe_models.hpp"
#include "gearsim/serialization.hpp"

namespace gearsim {
namespace {

using nlohmann::json;

constexpr std::array<std::pair<ExperimentKind, std::string_view>, 7> kKindNames{{
    {ExperimentKind::Fringe, "fringe"},
    {ExperimentKind::Estimate, "estimate"},
    {ExperimentKind::Adaptive, "adaptive"},
    {ExperimentKind::Bounds, "bounds"},
    {ExperimentKind::Entangled, "entangled"},
    {ExperimentKind::EnhancementCurve, "enhancement-curve"},
    {ExperimentKind::Coherent, "coherent"},
}};

int line_at(std::string_view text, std::size_t offset) {
    offset = std::min(offset, text.size());
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset),
                                           '\n'));
}

// Line of the dotted key path ("probe.xi"): each component is searched after
// the position of the previous one. Falls back to line 1.
int line_of_key(std::string_view text, std::string_view path) {
    std::size_t pos = 0;
    int line        = 1;
    while (!path.empty()) {
        const std::size_t dot       = path.find('.');
        const std::string_view head = path.substr(0, dot);
        const std::string quoted    = "\"" + std::string(head) + "\"";
        const std::size_t found     = text.find(quoted, pos);
        if (found == std::string_view::npos) {
            break;
        }
        pos  = found + quoted.size();
        line = line_at(text, found);
        if (dot == std::string_view::npos) {
            break;
        }
        path.remove_prefix(dot + 1);
    }
    return line;
}

class Reader {
  public:
    Reader(std::string_view text, const json& root) : text_(text), root_(root) {}

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        detail::fail(ErrorCode::Config,
                     fmt::format("line {}: {}: {}", line_of_key(text_, key), key, msg));
    }

    template <typename T>
    void read(const char* key, T& out) const {
        const auto it = root_.find(key);
        if (it == root_.end()) {
            return;
        }
        try {
            out = it->get<T>();
        } catch (const json::exception&) {
            fail(key, "wrong value type");
        }
    }

    template <typename T>
    void read_optional(const char* key, std::optional<T>& out) const {
        if (root_.contains(key)) {
            T value{};
            read(key, value);
            out = value;
        }
    }

    void read_sweep(const char* key, std::optional<Sweep>& out) const {
        const auto it = root_.find(key);
        if (it == root_.end()) {
            return;
        }
        if (!it->is_object()) {
            fail(key, "expected an object with start, stop, points");
        }
        Sweep s;
        for (const auto& item : it->items()) {
            const std::string sub = std::string(key) + "." + item.key();
            try {
                if (item.key() == "start") {
                    s.start = item.value().get<double>();
                } else if (item.key() == "stop") {
                    s.stop = item.value().get<double>();
                } else if (item.key() == "points") {
                    s.points = item.value().get<std::uint64_t>();
                } else {
                    fail(sub, "unknown key");
                }
            } catch (const json::exception&) {
                fail(sub, "wrong value type");
            }
        }
        out = s;
    }

  private:
    std::string_view text_;
    const json& root_;
};

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "experiment", "probe",      "seed",       "output",         "sweep",
        "sweep_b",    "true_theta", "shots",      "runs",           "grid_size",
        "interval",   "checkpoints", "budgets",   "available_m",    "m_values",
        "heuristic",  "fit_candidates", "fit_m",
    };
    return keys;
}

void validate(const ExperimentConfig& c, const Reader& r) {
    auto check_sweep = [&](const char* key, const std::optional<Sweep>& s) {
        if (s) {
            if (s->points < 1) {
                r.fail(key, "points must be >= 1");
            }
            if (s->stop < s->start) {
                r.fail(key, "stop must not precede start");
            }
        }
    };
    check_sweep("sweep", c.sweep);
    check_sweep("sweep_b", c.sweep_b);
    if (c.shots < 1) {
        r.fail("shots", "must be >= 1");
    }
    if (c.runs < 1) {
        r.fail("runs", "must be >= 1");
    }
    if (c.grid_size < 256) {
        r.fail("grid_size", "must be >= 256");
    }
    if (c.interval && !((*c.interval)[1] > (*c.interval)[0])) {
        r.fail("interval", "upper end must exceed lower end");
    }
    if (!std::is_sorted(c.checkpoints.begin(), c.checkpoints.end()) ||
        (!c.checkpoints.empty() && (c.checkpoints.front() < 1 || c.checkpoints.back() > c.shots))) {
        r.fail("checkpoints", "must be ascending and lie in [1, shots]");
    }
    for (const auto b : c.budgets) {
        if (b < 1) {
            r.fail("budgets", "every budget must be >= 1");
        }
    }

    const Strategy s = c.probe.strategy;
    switch (c.kind) {
    case ExperimentKind::Fringe:
        if (!is_single_mode(s)) {
            r.fail("probe.strategy", "fringe needs a single-mode strategy");
        }
        if (!c.sweep) {
            r.fail("experiment", "fringe needs a sweep");
        }
        break;
    case ExperimentKind::Estimate:
        if (!is_single_mode(s) && s != Strategy::CoherentGear) {
            r.fail("probe.strategy", "estimate needs a single-mode or coherent strategy");
        }
        if (!c.true_theta) {
            r.fail("experiment", "estimate needs true_theta");
        }
        break;
    case ExperimentKind::Adaptive:
        if (!c.true_theta) {
            r.fail("experiment", "adaptive needs true_theta");
        }
        break;
    case ExperimentKind::Entangled:
        if (s != Strategy::EntangledPair) {
            r.fail("probe.strategy", "entangled needs the EntangledPair strategy");
        }
        if (!c.sweep) {
            r.fail("experiment", "entangled needs a sweep");
        }
        break;
    case ExperimentKind::Coherent:
        if (s != Strategy::CoherentGear) {
            r.fail("probe.strategy", "coherent needs the CoherentGear strategy");
        }
        if (!c.sweep) {
            r.fail("experiment", "coherent needs a sweep");
        }
        break;
    case ExperimentKind::Bounds:
    case ExperimentKind::EnhancementCurve:
        if (c.m_values.empty()) {
            r.fail("m_values", "must not be empty");
        }
        break;
    }
}

} // namespace

std::string_view to_string(ExperimentKind kind) noexcept {
    for (const auto& [k, name] : kKindNames) {
        if (k == kind) {
            return name;
        }
    }
    return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view name) {
    for (const auto& [k, n] : kKindNames) {
        if (n == name) {
            return k;
        }
    }
    detail::fail(ErrorCode::Config, fmt::format("unknown experiment kind '{}'", name));
}

std::vector<double> Sweep::angles() const {
    std::vector<double> out;
    out.reserve(points);
    if (points == 1) {
        out.push_back(start);
        return out;
    }
    const double step = (stop - start) / static_cast<double>(points - 1);
    for (std::uint64_t i = 0; i < points; ++i) {
        out.push_back(start + step * static_cast<double>(i));
    }
    out.back() = stop;
    return out;
}

ExperimentConfig parse_config(std::string_view text) {
    json root;
    try {
        root = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& e) {
        detail::fail(ErrorCode::Config,
                     fmt::format("line {}: syntax error: {}", line_at(text, e.byte == 0 ? 0 : e.byte - 1),
                                 e.what()));
    }
    if (!root.is_object()) {
        detail::fail(ErrorCode::Config, "line 1: top level must be an object");
    }
    const Reader r(text, root);
    for (const auto& item : root.items()) {
        if (!known_keys().contains(item.key())) {
            r.fail(item.key(), "unknown key");
        }
    }
    if (!root.contains("experiment")) {
        r.fail("experiment", "missing experiment kind");
    }

    ExperimentConfig c;
    std::string kind;
    r.read("experiment", kind);
    try {
        c.kind = parse_experiment_kind(kind);
    } catch (const Error& e) {
        r.fail("experiment", e.what());
    }
    if (root.contains("probe")) {
        try {
            c.probe = root.at("probe").get<ProbeSpec>();
        } catch (const Error& e) {
            const std::string msg = e.what();
            const std::string key = msg.substr(0, msg.find(':'));
            detail::fail(ErrorCode::Config,
                         fmt::format("line {}: {}", line_of_key(text, key), msg));
        }
    }
    r.read("seed", c.seed);
    r.read("output", c.output);
    r.read_sweep("sweep", c.sweep);
    r.read_sweep("sweep_b", c.sweep_b);
    r.read_optional("true_theta", c.true_theta);
    r.read("shots", c.shots);
    r.read("runs", c.runs);
    r.read("grid_size", c.grid_size);
    r.read_optional("interval", c.interval);
    r.read("checkpoints", c.checkpoints);
    r.read("budgets", c.budgets);
    r.read("available_m", c.available_m);
    r.read("m_values", c.m_values);
    if (const auto it = root.find("heuristic"); it != root.end()) {
        if (!it->is_object()) {
            r.fail("heuristic", "expected an object");
        }
        for (const auto& item : it->items()) {
            const std::string sub = "heuristic." + item.key();
            double* field         = nullptr;
            if (item.key() == "v0") {
                field = &c.heuristic.v0;
            } else if (item.key() == "eta0") {
                field = &c.heuristic.eta0;
            } else if (item.key() == "gamma") {
                field = &c.heuristic.gamma;
            } else if (item.key() == "delta") {
                field = &c.heuristic.delta;
            } else {
                r.fail(sub, "unknown key");
            }
            if (!item.value().is_number()) {
                r.fail(sub, "wrong value type");
            }
            *field = item.value().get<double>();
        }
    }
    r.read("fit_candidates", c.fit_candidates);
    r.read_optional("fit_m", c.fit_m);
    validate(c, r);
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        detail::fail(ErrorCode::Io, fmt::format("cannot open config '{}'", path));
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    json j;
    j["experiment"] = std::string(to_string(c.kind));
    j["probe"]      = c.probe;
    j["seed"]       = c.seed;
    j["output"]     = c.output;
    auto sweep_json = [](const Sweep& s) {
        return json{{"start", s.start}, {"stop", s.stop}, {"points", s.points}};
    };
    if (c.sweep) {
        j["sweep"] = sweep_json(*c.sweep);
    }
    if (c.sweep_b) {
        j["sweep_b"] = sweep_json(*c.sweep_b);
    }
    if (c.true_theta) {
        j["true_theta"] = *c.true_theta;
    }
    j["shots"]     = c.shots;
    j["runs"]      = c.runs;
    j["grid_size"] = c.grid_size;
    if (c.interval) {
        j["interval"] = *c.interval;
    }
    j["checkpoints"] = c.checkpoints;
    j["budgets"]     = c.budgets;
    j["available_m"] = c.available_m;
    j["m_values"]    = c.m_values;
    j["heuristic"]   = json{{"v0", c.heuristic.v0},
                          {"eta0", c.heuristic.eta0},
                          {"gamma", c.heuristic.gamma},
                          {"delta", c.heuristic.delta}};
    j["fit_candidates"] = c.fit_candidates;
    if (c.fit_m) {
        j["fit_m"] = *c.fit_m;
    }
    return j.dump(2) + "\n";
}

} // namespace gearsim
