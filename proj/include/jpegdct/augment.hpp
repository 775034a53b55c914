#pragma once

#include "common.hpp"

namespace jpegdct::enhance {

namespace detail {

template <typename T>
inline void require_block_aligned(const grid<T>& p) {
    require(!p.empty() && p.rows() % 8 == 0 && p.cols() % 8 == 0, errc::non_block_aligned,
            "plane not 8x8 aligned");
}

}  // namespace detail

/// Horizontal flip computed directly on DCT coefficients: reverse the block
/// columns and negate coefficients at odd horizontal frequencies. Equals
/// blockwise DCT of the horizontally mirrored pixel image.
template <typename T>
inline grid<T> dct_flip_h(const grid<T>& p) {
    detail::require_block_aligned(p);
    const int bcols = p.cols() / 8;
    grid<T> out(p.rows(), p.cols());
    for (int r = 0; r < p.rows(); ++r)
        for (int bc = 0; bc < bcols; ++bc)
            for (int v = 0; v < 8; ++v) {
                const T x = p(r, 8 * (bcols - 1 - bc) + v);
                out(r, 8 * bc + v) = (v & 1) ? -x : x;
            }
    return out;
}

/// Vertical flip: reverse block rows, negate odd vertical frequencies.
template <typename T>
inline grid<T> dct_flip_v(const grid<T>& p) {
    detail::require_block_aligned(p);
    const int brows = p.rows() / 8;
    grid<T> out(p.rows(), p.cols());
    for (int br = 0; br < brows; ++br)
        for (int u = 0; u < 8; ++u)
            for (int c = 0; c < p.cols(); ++c) {
                const T x = p(8 * (brows - 1 - br) + u, c);
                out(8 * br + u, c) = (u & 1) ? -x : x;
            }
    return out;
}

/// Transpose in the DCT domain: transpose the block grid and each block
/// (the DCT of a transposed image is the transposed DCT).
template <typename T>
inline grid<T> dct_transpose(const grid<T>& p) {
    detail::require_block_aligned(p);
    grid<T> out(p.cols(), p.rows());
    for (int r = 0; r < p.rows(); ++r)
        for (int c = 0; c < p.cols(); ++c) out(c, r) = p(r, c);
    return out;
}

/// Quarter-turn clockwise: transpose then horizontal flip. Four applications
/// are the identity.
template <typename T>
inline grid<T> dct_rot90(const grid<T>& p) {
    return dct_flip_h(dct_transpose(p));
}

/// Block-aligned crop: select a rectangle of whole blocks; (block_r0,
/// block_c0) and the extent are in block units.
template <typename T>
inline grid<T> dct_crop(const grid<T>& p, int block_r0, int block_c0, int block_rows,
                        int block_cols) {
    detail::require_block_aligned(p);
    require(block_rows > 0 && block_cols > 0, errc::bad_config, "empty crop");
    require(block_r0 >= 0 && block_c0 >= 0 && 8 * (block_r0 + block_rows) <= p.rows() &&
                8 * (block_c0 + block_cols) <= p.cols(),
            errc::out_of_bounds, "crop rectangle outside block grid");
    return p.view_copy(8 * block_r0, 8 * block_c0, 8 * block_rows, 8 * block_cols);
}

}  // namespace jpegdct::enhance
