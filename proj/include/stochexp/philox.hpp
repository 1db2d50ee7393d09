#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace stochexp {

/// Philox4x32-10 counter-based generator.
///
/// A (key, counter) pair maps to 128 output bits through a pure function, so
/// parallel path generation needs no shared state: every draw is addressed by
/// (master seed, path index, step index) and reproduces bit-identically for
/// any scheduling of the work.
struct Philox4x32 {
    static constexpr std::uint32_t kMul0 = 0xD2511F53u;
    static constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
    static constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
    static constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

    [[nodiscard]] static std::array<std::uint32_t, 4> block(
        std::array<std::uint32_t, 2> key, std::array<std::uint32_t, 4> ctr) {
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = std::uint64_t(kMul0) * ctr[0];
            const std::uint64_t p1 = std::uint64_t(kMul1) * ctr[2];
            ctr = {std::uint32_t(p1 >> 32) ^ ctr[1] ^ key[0],
                   std::uint32_t(p1),
                   std::uint32_t(p0 >> 32) ^ ctr[3] ^ key[1],
                   std::uint32_t(p0)};
            key[0] += kWeyl0;
            key[1] += kWeyl1;
        }
        return ctr;
    }
};

/// Addresses one sample path: (master, path_index) -> path is a pure map.
struct Seed {
    std::uint64_t master = 0;
    std::uint64_t path_index = 0;
};

namespace detail {

// 53 significant bits, offset into the open interval (0,1).
inline double to_unit_interval(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (std::uint64_t(hi) << 32) | lo;
    return double(bits >> 11) * 0x1p-53 + 0x1p-54;
}

}  // namespace detail

/// Standard normal draw addressed by (seed, step, stream); Box-Muller on one
/// Philox block.
[[nodiscard]] inline double standard_gaussian(const Seed& seed, std::uint64_t step,
                                              std::uint32_t stream = 0) {
    const std::array<std::uint32_t, 2> key{std::uint32_t(seed.master),
                                           std::uint32_t(seed.master >> 32)};
    const std::array<std::uint32_t, 4> ctr{std::uint32_t(seed.path_index),
                                           std::uint32_t(seed.path_index >> 32),
                                           std::uint32_t(step),
                                           std::uint32_t(step >> 32) ^ stream};
    const auto out = Philox4x32::block(key, ctr);
    const double u1 = detail::to_unit_interval(out[0], out[1]);
    const double u2 = detail::to_unit_interval(out[2], out[3]);
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
}

/// Uniform draw in [lo, hi), same addressing scheme as standard_gaussian.
[[nodiscard]] inline double uniform_draw(const Seed& seed, std::uint64_t step, double lo,
                                         double hi, std::uint32_t stream = 1) {
    const std::array<std::uint32_t, 2> key{std::uint32_t(seed.master),
                                           std::uint32_t(seed.master >> 32)};
    const std::array<std::uint32_t, 4> ctr{std::uint32_t(seed.path_index),
                                           std::uint32_t(seed.path_index >> 32),
                                           std::uint32_t(step),
                                           std::uint32_t(step >> 32) ^ stream};
    const auto out = Philox4x32::block(key, ctr);
    return lo + (hi - lo) * detail::to_unit_interval(out[0], out[1]);
}

}  // namespace stochexp
