#pragma once

#include <nlohmann/json.hpp>

#include "gearsim/probe_spec.hpp"

namespace gearsim {

/// Every field is written, so parse(serialize(spec)) == spec.
void to_json(nlohmann::json& j, const ProbeSpec& spec);
/// Missing fields keep their defaults; unknown names and mistyped values throw
/// Error(Config) naming the offending key.
void from_json(const nlohmann::json& j, ProbeSpec& spec);

} // namespace gearsim
