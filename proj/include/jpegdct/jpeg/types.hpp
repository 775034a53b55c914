#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "../common.hpp"

namespace jpegdct::jpeg {

/// 8x8 quantization step table, natural (row-major) order.
struct quant_matrix {
    std::array<uint16_t, 64> values{};

    uint16_t operator()(int u, int v) const { return values[8 * u + v]; }
    uint16_t& operator()(int u, int v) { return values[8 * u + v]; }

    void validate() const {
        for (uint16_t q : values)
            require(q >= 1, errc::bad_format, "quantization step must be positive");
    }

    bool operator==(const quant_matrix&) const = default;
};

enum class sampling_kind { grayscale, s444, s420 };

inline const char* sampling_name(sampling_kind s) {
    switch (s) {
        case sampling_kind::grayscale: return "grayscale";
        case sampling_kind::s444: return "4:4:4";
        case sampling_kind::s420: return "4:2:0";
    }
    return "?";
}

/// Horizontal/vertical sampling factors per component.
inline void sampling_factors(sampling_kind s, int comp, int& h, int& v) {
    if (s == sampling_kind::s420 && comp == 0) {
        h = 2;
        v = 2;
    } else {
        h = 1;
        v = 1;
    }
}

inline int max_h(sampling_kind s) { return s == sampling_kind::s420 ? 2 : 1; }
inline int max_v(sampling_kind s) { return s == sampling_kind::s420 ? 2 : 1; }
inline int component_count(sampling_kind s) { return s == sampling_kind::grayscale ? 1 : 3; }

inline int ceil_div(int a, int b) { return (a + b - 1) / b; }

/// Padded block-grid dims of component `comp` for a luma image of w x h pixels.
inline void component_block_dims(sampling_kind s, int comp, int w, int h,
                                 int& blocks_wide, int& blocks_high) {
    int ch, cv;
    sampling_factors(s, comp, ch, cv);
    const int mcux = ceil_div(w, 8 * max_h(s));
    const int mcuy = ceil_div(h, 8 * max_v(s));
    blocks_wide = mcux * ch;
    blocks_high = mcuy * cv;
}

/// Fully entropy-decoded JPEG: per-channel quantized DCT coefficients in the
/// concatenated layout (block (br, bc) coefficient (u, v) lives at row
/// 8*br + u, col 8*bc + v), absolute DC, natural coefficient order. Planes are
/// padded out to whole MCUs; `width`/`height` are the luma pixel dims.
struct compressed_image {
    sampling_kind sampling = sampling_kind::grayscale;
    int width = 0;
    int height = 0;
    std::vector<plane_i32> planes;        // size 1 or 3 (Y, Cb, Cr)
    std::vector<quant_matrix> qtables;    // one per plane

    int channels() const { return static_cast<int>(planes.size()); }

    void validate() const {
        require(width > 0 && height > 0, errc::bad_format, "empty image dims");
        require(static_cast<int>(planes.size()) == component_count(sampling) &&
                    planes.size() == qtables.size(),
                errc::bad_format, "plane/table count vs sampling");
        for (int c = 0; c < channels(); ++c) {
            int bw, bh;
            component_block_dims(sampling, c, width, height, bw, bh);
            require(planes[c].cols() == 8 * bw && planes[c].rows() == 8 * bh,
                    errc::bad_format, "plane " + std::to_string(c) + " grid inconsistent with sampling");
            qtables[c].validate();
        }
    }

    bool operator==(const compressed_image&) const = default;
};

/// 8-bit raster with 1 or 3 channels.
struct raster_image {
    enum class color { grayscale, ycbcr, rgb };
    color space = color::grayscale;
    int width = 0;
    int height = 0;
    std::vector<plane_u8> channels;

    bool operator==(const raster_image&) const = default;
};

}  // namespace jpegdct::jpeg
