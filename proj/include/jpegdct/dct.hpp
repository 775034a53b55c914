#pragma once

#include <array>
#include <cmath>

#include "common.hpp"

namespace jpegdct::dct {

inline constexpr double kPi = 3.14159265358979323846;

/// Orthonormal 1-D DCT-II basis, rows are basis vectors:
/// T[k][n] = c_k * sqrt(2/N) * cos((2n+1) k pi / (2N)), c_0 = 1/sqrt(2), c_k = 1 otherwise.
inline matrix dct_basis(int n) {
    require(n >= 1, errc::bad_config, "dct_basis needs n >= 1");
    matrix t(n, n);
    const double scale = std::sqrt(2.0 / n);
    for (int k = 0; k < n; ++k) {
        const double ck = (k == 0) ? 1.0 / std::sqrt(2.0) : 1.0;
        for (int x = 0; x < n; ++x)
            t(k, x) = ck * scale * std::cos((2.0 * x + 1.0) * k * kPi / (2.0 * n));
    }
    return t;
}

/// Shared immutable tables for the block sizes this library uses.
inline const matrix& cached_dct_basis(int n) {
    switch (n) {
        case 1: { static const matrix m = dct_basis(1); return m; }
        case 2: { static const matrix m = dct_basis(2); return m; }
        case 4: { static const matrix m = dct_basis(4); return m; }
        case 8: { static const matrix m = dct_basis(8); return m; }
        case 16: { static const matrix m = dct_basis(16); return m; }
        default: fail(errc::bad_config, "uncached DCT size " + std::to_string(n));
    }
}

/// 2-D type-II DCT of a square pixel block: T B T^t.
inline matrix forward_dct2(const matrix& b) {
    require(b.rows() == b.cols(), errc::shape_mismatch, "forward_dct2 needs square block");
    const matrix& t = cached_dct_basis(b.rows());
    return matmul(matmul(t, b), transpose(t));
}

/// Inverse of forward_dct2: T^t B^ T.
inline matrix inverse_dct2(const matrix& b) {
    require(b.rows() == b.cols(), errc::shape_mismatch, "inverse_dct2 needs square block");
    const matrix& t = cached_dct_basis(b.rows());
    return matmul(matmul(transpose(t), b), t);
}

/// Nearest-neighbor pixel upsampling matrix of shape 2N x N: column i has ones
/// at rows 2i and 2i+1, so U x duplicates every entry of x.
inline matrix upsample_matrix(int n) {
    require(n >= 1, errc::bad_config, "upsample_matrix needs n >= 1");
    matrix u(2 * n, n, 0.0);
    for (int i = 0; i < n; ++i) {
        u(2 * i, i) = 1.0;
        u(2 * i + 1, i) = 1.0;
    }
    return u;
}

/// DCT-domain upsampling matrix for an arbitrary pixel-domain upsampling
/// operator `pixel_up` (2N x N): T_2N * pixel_up * T_N^t.
inline matrix dct_upsample_matrix(const matrix& pixel_up) {
    require(pixel_up.rows() == 2 * pixel_up.cols() && pixel_up.cols() >= 1,
            errc::shape_mismatch, "pixel upsampling matrix must be 2N x N");
    const int n = pixel_up.cols();
    return matmul(matmul(dct_basis(2 * n), pixel_up), transpose(dct_basis(n)));
}

/// Default DCT-domain upsampling matrix (nearest-neighbor), cached per size.
inline const matrix& dct_upsample_matrix(int n) {
    switch (n) {
        case 1: { static const matrix m = dct_upsample_matrix(upsample_matrix(1)); return m; }
        case 2: { static const matrix m = dct_upsample_matrix(upsample_matrix(2)); return m; }
        case 4: { static const matrix m = dct_upsample_matrix(upsample_matrix(4)); return m; }
        case 8: { static const matrix m = dct_upsample_matrix(upsample_matrix(8)); return m; }
        default: fail(errc::bad_config, "uncached upsample size " + std::to_string(n));
    }
}

/// 2x upsampling of an N x N DCT block entirely in the DCT domain; equals
/// forward_dct2(nearest-neighbor upsample of inverse_dct2(b)).
inline matrix dct_upsample_block(const matrix& b) {
    require(b.rows() == b.cols(), errc::shape_mismatch, "dct_upsample_block needs square block");
    const matrix& u = dct_upsample_matrix(b.rows());
    return matmul(matmul(u, b), transpose(u));
}

/// Pixel-domain nearest-neighbor 2x block upsample (entry replication).
inline matrix pixel_upsample_block(const matrix& b) {
    matrix out(b.rows() * 2, b.cols() * 2);
    for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c) {
            const double v = b(r, c);
            out(2 * r, 2 * c) = v;
            out(2 * r, 2 * c + 1) = v;
            out(2 * r + 1, 2 * c) = v;
            out(2 * r + 1, 2 * c + 1) = v;
        }
    return out;
}

/// Direct application of the pixel-domain replication operator to DCT
/// coefficients (U b U^t). Not equivalent to upsampling the underlying pixels;
/// kept as the counterexample the DCT-domain matrix exists to avoid.
inline matrix naive_dct_upsample_block(const matrix& b) {
    require(b.rows() == b.cols(), errc::shape_mismatch, "square block expected");
    const matrix u = upsample_matrix(b.rows());
    return matmul(matmul(u, b), transpose(u));
}

/// Sub-block conversion matrix H2 = T_8 * blockdiag(T_4, T_4)^t. Applying
/// H2^t B^_8 H2 turns one 8x8 DCT block into the four 4x4 DCT blocks of its
/// pixel quadrants.
inline const matrix& subblock_matrix() {
    static const matrix h2 = [] {
        const matrix& t8 = cached_dct_basis(8);
        const matrix& t4 = cached_dct_basis(4);
        matrix diag(8, 8, 0.0);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) {
                diag(r, c) = t4(r, c);
                diag(4 + r, 4 + c) = t4(r, c);
            }
        return matmul(t8, transpose(diag));
    }();
    return h2;
}

struct quad_blocks {
    // [0]=(0,0) top-left, [1]=(0,1) top-right, [2]=(1,0) bottom-left, [3]=(1,1) bottom-right
    std::array<matrix, 4> b;
};

/// One 8x8 DCT block -> four 4x4 DCT blocks, one per pixel quadrant.
inline quad_blocks subblock_split(const matrix& b8) {
    require(b8.rows() == 8 && b8.cols() == 8, errc::shape_mismatch, "subblock_split needs 8x8");
    const matrix& h2 = subblock_matrix();
    const matrix big = matmul(matmul(transpose(h2), b8), h2);
    quad_blocks out;
    for (int qr = 0; qr < 2; ++qr)
        for (int qc = 0; qc < 2; ++qc) out.b[qr * 2 + qc] = big.view_copy(4 * qr, 4 * qc, 4, 4);
    return out;
}

/// Exact inverse of subblock_split.
inline matrix subblock_merge(const quad_blocks& q) {
    matrix big(8, 8);
    for (int qr = 0; qr < 2; ++qr)
        for (int qc = 0; qc < 2; ++qc) {
            const matrix& sub = q.b[qr * 2 + qc];
            require(sub.rows() == 4 && sub.cols() == 4, errc::shape_mismatch, "4x4 sub-blocks expected");
            for (int r = 0; r < 4; ++r)
                for (int c = 0; c < 4; ++c) big(4 * qr + r, 4 * qc + c) = sub(r, c);
        }
    const matrix& h2 = subblock_matrix();
    return matmul(matmul(h2, big), transpose(h2));
}

/// 2x upsampling of a whole plane of 8x8 DCT blocks without leaving the DCT
/// domain: each block is split into its four quadrant 4x4 DCT blocks, each
/// quadrant is upsampled to 8x8, and the four results tile a 2x2 block
/// neighborhood of the output. Output plane has twice the rows and columns.
inline plane_f64 upsample_chroma_plane(const plane_f64& plane) {
    require(plane.rows() % 8 == 0 && plane.cols() % 8 == 0 && !plane.empty(),
            errc::non_block_aligned, "plane must be a whole grid of 8x8 blocks");
    plane_f64 out(plane.rows() * 2, plane.cols() * 2);
    matrix blk(8, 8);
    for (int br = 0; br < plane.rows() / 8; ++br)
        for (int bc = 0; bc < plane.cols() / 8; ++bc) {
            for (int r = 0; r < 8; ++r)
                for (int c = 0; c < 8; ++c) blk(r, c) = plane(8 * br + r, 8 * bc + c);
            const quad_blocks quads = subblock_split(blk);
            for (int qr = 0; qr < 2; ++qr)
                for (int qc = 0; qc < 2; ++qc) {
                    const matrix up = dct_upsample_block(quads.b[qr * 2 + qc]);
                    const int orow = 8 * (2 * br + qr), ocol = 8 * (2 * bc + qc);
                    for (int r = 0; r < 8; ++r)
                        for (int c = 0; c < 8; ++c) out(orow + r, ocol + c) = up(r, c);
                }
        }
    return out;
}

}  // namespace jpegdct::dct
