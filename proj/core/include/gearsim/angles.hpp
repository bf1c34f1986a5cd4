#pragma once

#include <cmath>
#include <numbers>

namespace gearsim {

inline constexpr double kPi    = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduces `x` into [0, period).
[[nodiscard]] inline double wrap(double x, double period) noexcept {
    double r = std::fmod(x, period);
    if (r < 0.0) {
        r += period;
    }
    // fmod of a tiny negative number can round up to exactly `period`
    if (r >= period) {
        r = 0.0;
    }
    return r;
}

[[nodiscard]] inline double wrap_two_pi(double x) noexcept { return wrap(x, kTwoPi); }

/// Shortest angular distance on the circle, in [0, pi].
[[nodiscard]] inline double circular_distance(double a, double b) noexcept {
    const double d = wrap_two_pi(a - b);
    return d > kPi ? kTwoPi - d : d;
}

/// Signed offset of `x` from the nearest multiple of `period`, in [-period/2, period/2).
[[nodiscard]] inline double offset_from_lattice(double x, double period) noexcept {
    return x - period * std::round(x / period);
}

} // namespace gearsim
