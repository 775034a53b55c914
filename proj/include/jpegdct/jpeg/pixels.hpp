#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "../common.hpp"
#include "../dct.hpp"
#include "types.hpp"

namespace jpegdct::jpeg {

/// Per-block elementwise multiply by the quantization steps.
inline plane_f64 dequantize(const plane_i32& plane, const quant_matrix& q) {
    require(!plane.empty(), errc::bad_format, "empty coefficient plane");
    require(plane.rows() % 8 == 0 && plane.cols() % 8 == 0, errc::non_block_aligned,
            "coefficient plane not 8x8 aligned");
    plane_f64 out(plane.rows(), plane.cols());
    for (int r = 0; r < plane.rows(); ++r)
        for (int c = 0; c < plane.cols(); ++c)
            out(r, c) = static_cast<double>(plane(r, c)) * q(r % 8, c % 8);
    return out;
}

// Widest coefficient range the extended baseline entropy layer can carry.
inline constexpr int32_t kCoeffMin = -2048;
inline constexpr int32_t kCoeffMax = 2047;

/// Per-block elementwise divide by the quantization steps, rounding half away
/// from zero. Fails if a result falls outside the encodable coefficient range.
inline plane_i32 quantize(const plane_f64& plane, const quant_matrix& q) {
    require(plane.rows() % 8 == 0 && plane.cols() % 8 == 0, errc::non_block_aligned,
            "coefficient plane not 8x8 aligned");
    plane_i32 out(plane.rows(), plane.cols());
    for (int r = 0; r < plane.rows(); ++r)
        for (int c = 0; c < plane.cols(); ++c) {
            const int32_t v = round_half_away(plane(r, c) / q(r % 8, c % 8));
            require(v >= kCoeffMin && v <= kCoeffMax, errc::range_overflow,
                    "quantized coefficient " + std::to_string(v) + " out of range");
            out(r, c) = v;
        }
    return out;
}

/// Dequantize + inverse DCT + level shift one component plane to 8-bit
/// samples (still MCU-padded).
inline plane_u8 reconstruct_plane(const plane_i32& plane, const quant_matrix& q) {
    const plane_f64 deq = dequantize(plane, q);
    plane_u8 out(plane.rows(), plane.cols());
    matrix block(8, 8);
    for (int br = 0; br < plane.rows() / 8; ++br)
        for (int bc = 0; bc < plane.cols() / 8; ++bc) {
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) block(u, v) = deq(8 * br + u, 8 * bc + v);
            const matrix pix = dct::inverse_dct2(block);
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x)
                    out(8 * br + y, 8 * bc + x) = clamp_u8(pix(y, x) + 128.0);
        }
    return out;
}

/// Nearest-neighbor 2x upsample (entry replication).
inline plane_u8 upsample_nn2x(const plane_u8& p) {
    plane_u8 out(2 * p.rows(), 2 * p.cols());
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) out(r, c) = p(r / 2, c / 2);
    return out;
}

inline plane_u8 crop_plane(const plane_u8& p, int width, int height) {
    require(width <= p.cols() && height <= p.rows(), errc::out_of_bounds, "crop larger than plane");
    return p.view_copy(0, 0, height, width);
}

// ITU-R BT.601 full-range YCbCr <-> RGB as used by JFIF.
inline void ycbcr_to_rgb(double y, double cb, double cr, uint8_t& r, uint8_t& g, uint8_t& b) {
    r = clamp_u8(y + 1.402 * (cr - 128.0));
    g = clamp_u8(y - 0.344136 * (cb - 128.0) - 0.714136 * (cr - 128.0));
    b = clamp_u8(y + 1.772 * (cb - 128.0));
}

inline void rgb_to_ycbcr(double r, double g, double b, uint8_t& y, uint8_t& cb, uint8_t& cr) {
    y = clamp_u8(0.299 * r + 0.587 * g + 0.114 * b);
    cb = clamp_u8(128.0 - 0.168735892 * r - 0.331264108 * g + 0.5 * b);
    cr = clamp_u8(128.0 + 0.5 * r - 0.418687589 * g - 0.081312411 * b);
}

/// Reference pixel reconstruction: dequantize, IDCT, level shift, NN chroma
/// upsample, optional color transform; output cropped to the header dims.
/// `want` selects RGB (default) or YCbCr output for color streams; grayscale
/// streams always produce a single channel.
inline raster_image decode_to_pixels(const compressed_image& img,
                                     raster_image::color want = raster_image::color::rgb) {
    img.validate();
    raster_image out;
    out.width = img.width;
    out.height = img.height;

    std::vector<plane_u8> comps(img.channels());
    for (int c = 0; c < img.channels(); ++c)
        comps[c] = reconstruct_plane(img.planes[c], img.qtables[c]);

    if (img.sampling == sampling_kind::grayscale) {
        out.space = raster_image::color::grayscale;
        out.channels.push_back(crop_plane(comps[0], img.width, img.height));
        return out;
    }

    if (img.sampling == sampling_kind::s420) {
        comps[1] = upsample_nn2x(comps[1]);
        comps[2] = upsample_nn2x(comps[2]);
    }
    for (int c = 0; c < 3; ++c) comps[c] = crop_plane(comps[c], img.width, img.height);

    if (want == raster_image::color::ycbcr) {
        out.space = raster_image::color::ycbcr;
        out.channels = std::move(comps);
        return out;
    }

    out.space = raster_image::color::rgb;
    out.channels.assign(3, plane_u8(img.height, img.width));
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            ycbcr_to_rgb(comps[0](r, c), comps[1](r, c), comps[2](r, c),
                         out.channels[0](r, c), out.channels[1](r, c), out.channels[2](r, c));
    return out;
}

}  // namespace jpegdct::jpeg
