#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>

namespace vortrace {

/// Philox4x32-10 counter-based generator.
///
/// Output is a pure function of (seed, stream, counter), so any draw can be
/// addressed at random: trajectory code keys the counter by (step, mode slot)
/// and ensembles key the stream by trajectory index. Identical state always
/// reproduces identical bits regardless of scheduling.
namespace philox {

inline constexpr std::uint32_t kMul0 = 0xD2511F53u;
inline constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
inline constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
inline constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline std::array<std::uint32_t, 4> block(std::uint64_t seed, std::uint64_t stream,
                                          std::uint64_t counter) {
    std::uint32_t x0 = static_cast<std::uint32_t>(counter);
    std::uint32_t x1 = static_cast<std::uint32_t>(counter >> 32);
    std::uint32_t x2 = static_cast<std::uint32_t>(stream);
    std::uint32_t x3 = static_cast<std::uint32_t>(stream >> 32);
    std::uint32_t k0 = static_cast<std::uint32_t>(seed);
    std::uint32_t k1 = static_cast<std::uint32_t>(seed >> 32);
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x0;
        const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x2;
        const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
        const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
        const std::uint32_t y0 = hi1 ^ x1 ^ k0;
        const std::uint32_t y1 = lo1;
        const std::uint32_t y2 = hi0 ^ x3 ^ k1;
        const std::uint32_t y3 = lo0;
        x0 = y0;
        x1 = y1;
        x2 = y2;
        x3 = y3;
        k0 += kWeyl0;
        k1 += kWeyl1;
    }
    return {x0, x1, x2, x3};
}

}  // namespace philox

inline constexpr const char* kRngAlgorithm = "philox4x32-10";

struct RngState {
    std::uint64_t seed = 0;
    std::uint64_t stream = 0;
    std::uint64_t counter = 0;

    bool operator==(const RngState&) const = default;
};

/// Gaussian/uniform draws on top of the counter block cipher. One counter
/// tick consumes exactly one Philox block (128 bits).
class CounterRng {
  public:
    CounterRng() = default;
    explicit CounterRng(RngState s) : state_(s) {}
    CounterRng(std::uint64_t seed, std::uint64_t stream, std::uint64_t counter = 0)
        : state_{seed, stream, counter} {}

    const RngState& state() const { return state_; }
    void set_state(const RngState& s) { state_ = s; }
    void seek(std::uint64_t counter) { state_.counter = counter; }

    /// Two independent uniforms in (0,1) from one block.
    std::array<double, 2> next_uniform_pair() {
        const auto b = philox::block(state_.seed, state_.stream, state_.counter++);
        const std::uint64_t a = (static_cast<std::uint64_t>(b[1]) << 32) | b[0];
        const std::uint64_t c = (static_cast<std::uint64_t>(b[3]) << 32) | b[2];
        return {to_unit(a), to_unit(c)};
    }

    double next_uniform() { return next_uniform_pair()[0]; }

    /// One standard normal (Box-Muller cosine branch); one counter tick.
    double next_normal() {
        const auto u = next_uniform_pair();
        return std::sqrt(-2.0 * std::log(u[0])) * std::cos(kTwoPiLocal * u[1]);
    }

    /// Complex Gaussian with E|g|^2 = 1 (real and imaginary parts independent
    /// N(0, 1/2)); one counter tick via the full Box-Muller pair.
    std::complex<double> next_complex_gaussian() {
        const auto u = next_uniform_pair();
        const double r = std::sqrt(-std::log(u[0]));  // sqrt(-2 ln u)/sqrt(2)
        const double phi = kTwoPiLocal * u[1];
        return {r * std::cos(phi), r * std::sin(phi)};
    }

  private:
    static constexpr double kTwoPiLocal = 6.283185307179586476925286766559;

    // (0,1) strictly: offset by half an ulp of the 53-bit grid.
    static double to_unit(std::uint64_t x) {
        return (static_cast<double>(x >> 11) + 0.5) * 0x1.0p-53;
    }

    RngState state_;
};

}  // namespace vortrace
