#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace ibridge {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A (seed, stream) pair selects an independent substream: the seed is the
/// 64-bit key and the stream id occupies the upper half of the 128-bit
/// counter. Replicate r of a run uses stream r, so any replicate can be
/// regenerated in isolation. Satisfies UniformRandomBitGenerator.
class Philox4x32 {
public:
    using result_type = std::uint32_t;
    using block_type = std::array<std::uint32_t, 4>;
    using key_type = std::array<std::uint32_t, 2>;

    Philox4x32(std::uint64_t seed, std::uint64_t stream) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept;

    /// The raw bijection: ten Philox rounds of `counter` under `key`.
    static block_type encrypt(block_type counter, key_type key) noexcept;

private:
    key_type key_{};
    block_type counter_{};
    block_type buffer_{};
    int next_ = 4;
};

/// Stream ids reserved for internal, non-replicate draws.
namespace streams {
inline constexpr std::uint64_t censoring_pilot = 0xC3A5C85C97CB3127ULL;
inline constexpr std::uint64_t subsample_base = 0x9AE16A3B2F90404FULL;
} // namespace streams

} // namespace ibridge
