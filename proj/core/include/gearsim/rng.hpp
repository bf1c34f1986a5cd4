#pragma once

#include <cstdint>
#include <random>

namespace gearsim {

/// SplitMix64 finalizer (Steele, Lea, Flood 2014). Used to scramble seeds and
/// to derive independent sub-seeds from a (seed, stream) pair.
[[nodiscard]] constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

/// Sub-seed for stream `stream` of a run seeded with `seed`. Sweep points and
/// Monte Carlo repetitions use their index as the stream.
[[nodiscard]] constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
    return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632be59bd9b4e019ULL));
}

/// Reproducible random source. Bits come from std::mt19937_64 (MT19937-64,
/// whose output sequence is fixed by the C++ standard) seeded with
/// splitmix64(seed); every variate transform below is implemented here rather
/// than taken from <random>, whose distributions are implementation-defined.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

    [[nodiscard]] std::uint64_t next_u64() { return engine_(); }

    /// Uniform on [0, 1) with 53 random bits.
    [[nodiscard]] double uniform() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    /// Poisson variate: sequential inversion for mean < 10, Hormann's PTRS
    /// transformed rejection otherwise.
    [[nodiscard]] std::uint64_t poisson(double mean);

  private:
    std::mt19937_64 engine_;
};

} // namespace gearsim
