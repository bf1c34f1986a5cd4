#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gearsim {

enum class ErrorCode {
    InvalidArgument,
    OutcomeOutsideSpace,
    DegenerateCase,
    DegeneratePosterior,
    ResolutionConstraint,
    FitNonConvergence,
    Config,
    Io,
};

[[nodiscard]] std::string_view to_string(ErrorCode code) noexcept;

/// Base exception for every failure raised by the library. The code is
/// stable and is what the CLI prints on its machine-readable error line.
class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

namespace detail {

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

inline void require(bool cond, std::string_view what) {
    if (!cond) {
        fail(ErrorCode::InvalidArgument, std::string(what));
    }
}

} // namespace detail
} // namespace gearsim
