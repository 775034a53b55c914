#pragma once

#include <array>
#include <cstdint>

namespace jpegdct::jpeg {

/// zigzag position k -> natural index 8*u + v
inline constexpr std::array<uint8_t, 64> kZigzagToNatural = {
    0,  1,  8,  16, 9,  2,  3,  10, 17, 24, 32, 25, 18, 11, 4,  5,
    12, 19, 26, 33, 40, 48, 41, 34, 27, 20, 13, 6,  7,  14, 21, 28,
    35, 42, 49, 56, 57, 50, 43, 36, 29, 22, 15, 23, 30, 37, 44, 51,
    58, 59, 52, 45, 38, 31, 39, 46, 53, 60, 61, 54, 47, 55, 62, 63};

inline constexpr std::array<uint8_t, 64> kNaturalToZigzag = [] {
    std::array<uint8_t, 64> inv{};
    for (int k = 0; k < 64; ++k) inv[kZigzagToNatural[k]] = static_cast<uint8_t>(k);
    return inv;
}();

/// Frequency rank of coefficient position (u, v): its position in the zigzag
/// scan, 0 for DC, 63 for the highest frequency.
inline constexpr int zigzag_rank(int u, int v) { return kNaturalToZigzag[8 * u + v]; }

}  // namespace jpegdct::jpeg
