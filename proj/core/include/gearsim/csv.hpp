#pragma once

#include <string>
#include <string_view>

namespace gearsim {

inline constexpr int kCsvSchemaVersion = 1;

/// Version comment line that opens every CSV the library writes.
[[nodiscard]] inline std::string csv_preamble(std::string_view kind) {
    return "# gearsim-csv v" + std::to_string(kCsvSchemaVersion) + " " + std::string(kind) + "\n";
}

} // namespace gearsim
