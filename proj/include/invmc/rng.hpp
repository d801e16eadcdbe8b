#pragma once

#include <array>
#include <cstdint>

namespace invmc {

/// Philox4x32-10 block function (Salmon et al., SC'11). Stateless: the output
/// is a pure function of (counter, key).
struct Philox4x32 {
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    static Counter generate(Counter counter, Key key) noexcept;
};

/// Purposes that partition the counter space of a stream so that draws for
/// different consumers never collide.
enum class DrawPurpose : std::uint32_t {
    Exogenous = 1,
    InventoryPlacement = 2,
    ControlSampling = 3,
    BrokenPathPlacement = 4,
    CrSweepMix = 5,
};

/// Counter-based random stream for one path. Every draw is addressed by
/// (step, slot) and can be generated in any order, from any thread.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t stream) noexcept;

    /// Two uniforms in the open interval (0, 1).
    std::array<double, 2> uniforms(std::uint32_t step, DrawPurpose purpose, std::uint32_t slot) const noexcept;

    /// Two independent standard normals (Box-Muller on `uniforms`).
    std::array<double, 2> normals(std::uint32_t step, DrawPurpose purpose, std::uint32_t slot) const noexcept;

private:
    Philox4x32::Key key_;
    std::uint32_t stream_lo_;
    std::uint32_t stream_hi_;
};

}  // namespace invmc
