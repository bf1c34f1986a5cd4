#include "gearsim/serialization.hpp"

#include <set>
#include <string>

#include "gearsim/error.hpp"

namespace gearsim {
namespace {

const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys{
        "strategy",   "q",          "hwp_sign",     "xi",         "visibility",
        "visibility_v", "transmissivity", "n_photons", "mean_photons", "bell_state",
        "q_a",        "q_b",        "hwp_sign_a",   "hwp_sign_b",
    };
    return keys;
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
    const auto it = j.find(key);
    if (it == j.end()) {
        return;
    }
    try {
        out = it->get<T>();
    } catch (const nlohmann::json::exception&) {
        detail::fail(ErrorCode::Config, std::string("probe.") + key + ": wrong value type");
    }
}

Charge read_charge(const nlohmann::json& j, const char* key, Charge fallback) {
    double q = fallback.value();
    read_field(j, key, q);
    try {
        return Charge::from_value(q);
    } catch (const Error& e) {
        detail::fail(ErrorCode::Config, std::string("probe.") + key + ": " + e.what());
    }
}

} // namespace

void to_json(nlohmann::json& j, const ProbeSpec& spec) {
    j = nlohmann::json{
        {"strategy", std::string(to_string(spec.strategy))},
        {"q", spec.q.value()},
        {"hwp_sign", spec.hwp_sign},
        {"xi", spec.xi},
        {"visibility", spec.visibility},
        {"transmissivity", spec.transmissivity},
        {"n_photons", spec.n_photons},
        {"mean_photons", spec.mean_photons},
        {"bell_state", std::string(to_string(spec.bell_state))},
        {"q_a", spec.q_a.value()},
        {"q_b", spec.q_b.value()},
        {"hwp_sign_a", spec.hwp_sign_a},
        {"hwp_sign_b", spec.hwp_sign_b},
    };
    if (spec.visibility_v) {
        j["visibility_v"] = *spec.visibility_v;
    }
}

void from_json(const nlohmann::json& j, ProbeSpec& spec) {
    if (!j.is_object()) {
        detail::fail(ErrorCode::Config, "probe: expected an object");
    }
    for (const auto& item : j.items()) {
        if (!known_keys().contains(item.key())) {
            detail::fail(ErrorCode::Config, "probe." + item.key() + ": unknown key");
        }
    }
    ProbeSpec out;
    std::string name(to_string(out.strategy));
    read_field(j, "strategy", name);
    try {
        out.strategy = parse_strategy(name);
    } catch (const Error& e) {
        detail::fail(ErrorCode::Config, std::string("probe.strategy: ") + e.what());
    }
    out.q = read_charge(j, "q", out.q);
    read_field(j, "hwp_sign", out.hwp_sign);
    read_field(j, "xi", out.xi);
    read_field(j, "visibility", out.visibility);
    if (j.contains("visibility_v")) {
        double v = 0.0;
        read_field(j, "visibility_v", v);
        out.visibility_v = v;
    }
    read_field(j, "transmissivity", out.transmissivity);
    read_field(j, "n_photons", out.n_photons);
    read_field(j, "mean_photons", out.mean_photons);
    std::string bell(to_string(out.bell_state));
    read_field(j, "bell_state", bell);
    try {
        out.bell_state = parse_bell_state(bell);
    } catch (const Error& e) {
        detail::fail(ErrorCode::Config, std::string("probe.bell_state: ") + e.what());
    }
    out.q_a = read_charge(j, "q_a", out.q_a);
    out.q_b = read_charge(j, "q_b", out.q_b);
    read_field(j, "hwp_sign_a", out.hwp_sign_a);
    read_field(j, "hwp_sign_b", out.hwp_sign_b);
    spec = out;
}

} // namespace gearsim
