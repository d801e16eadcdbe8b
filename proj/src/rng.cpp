#include "invmc/rng.hpp"

#include <cmath>
#include <numbers>

namespace invmc {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(p >> 32);
    lo = static_cast<std::uint32_t>(p);
}

inline double to_open_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

Philox4x32::Counter Philox4x32::generate(Counter ctr, Key key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

PathStream::PathStream(std::uint64_t seed, std::uint64_t stream) noexcept
    : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
      stream_lo_(static_cast<std::uint32_t>(stream)),
      stream_hi_(static_cast<std::uint32_t>(stream >> 32)) {}

std::array<double, 2> PathStream::uniforms(std::uint32_t step, DrawPurpose purpose,
                                           std::uint32_t slot) const noexcept {
    // The purpose tag lives in the top byte of the slot word.
    const std::uint32_t tagged = (static_cast<std::uint32_t>(purpose) << 24) ^ slot;
    const auto out = Philox4x32::generate({stream_lo_, stream_hi_, step, tagged}, key_);
    return {to_open_unit(out[0], out[1]), to_open_unit(out[2], out[3])};
}

std::array<double, 2> PathStream::normals(std::uint32_t step, DrawPurpose purpose,
                                          std::uint32_t slot) const noexcept {
    const auto u = uniforms(step, purpose, slot);
    const double r = std::sqrt(-2.0 * std::log(u[0]));
    const double theta = 2.0 * std::numbers::pi * u[1];
    return {r * std::cos(theta), r * std::sin(theta)};
}

}  // namespace invmc
