#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "../common.hpp"
#include "../dct.hpp"
#include "huffman.hpp"
#include "pixels.hpp"
#include "tables.hpp"
#include "types.hpp"
#include "zigzag.hpp"

namespace jpegdct::jpeg {

namespace detail {

/// MSB-first bit writer with 0xFF byte stuffing and 1-bit flush padding.
class bit_writer {
public:
    explicit bit_writer(std::vector<uint8_t>& out) : out_(out) {}

    void put(uint32_t code, int len) {
        acc_ = (acc_ << len) | (code & ((1u << len) - 1));
        nbits_ += len;
        while (nbits_ >= 8) {
            const uint8_t b = static_cast<uint8_t>(acc_ >> (nbits_ - 8));
            out_.push_back(b);
            if (b == 0xFF) out_.push_back(0x00);
            nbits_ -= 8;
        }
        acc_ &= (1u << nbits_) - 1;
    }

    void flush() {
        if (nbits_ & 7) put((1u << (8 - (nbits_ & 7))) - 1, 8 - (nbits_ & 7));
    }

private:
    std::vector<uint8_t>& out_;
    uint32_t acc_ = 0;
    int nbits_ = 0;
};

// T.81 magnitude coding: negative values append the low t bits of v-1.
inline uint32_t magnitude_bits(int32_t v, int t) {
    return static_cast<uint32_t>(v < 0 ? v - 1 : v) & ((1u << t) - 1);
}

inline void encode_block(bit_writer& bw, const huff_encoder& dc, const huff_encoder& ac,
                         int32_t& pred, const int32_t* blk /* 64, natural order */) {
    const int32_t diff = blk[0] - pred;
    pred = blk[0];
    const int t = bit_category(diff);
    require(t <= 15 && dc.size[t] != 0, errc::range_overflow,
            "DC difference " + std::to_string(diff) + " not encodable");
    bw.put(dc.code[t], dc.size[t]);
    if (t) bw.put(magnitude_bits(diff, t), t);

    int run = 0;
    for (int k = 1; k < 64; ++k) {
        const int32_t v = blk[kZigzagToNatural[k]];
        if (v == 0) {
            ++run;
            continue;
        }
        while (run > 15) {
            bw.put(ac.code[0xF0], ac.size[0xF0]);  // ZRL
            run -= 16;
        }
        const int s = bit_category(v);
        require(s <= 15, errc::range_overflow,
                "AC coefficient " + std::to_string(v) + " not encodable");
        const int rs = (run << 4) | s;
        require(ac.size[rs] != 0, errc::range_overflow,
                "AC coefficient " + std::to_string(v) + " not encodable");
        bw.put(ac.code[rs], ac.size[rs]);
        bw.put(magnitude_bits(v, s), s);
        run = 0;
    }
    if (run) bw.put(ac.code[0x00], ac.size[0x00]);  // EOB
}

inline void put_u16(std::vector<uint8_t>& out, int v) {
    out.push_back(static_cast<uint8_t>(v >> 8));
    out.push_back(static_cast<uint8_t>(v & 0xFF));
}

inline void put_marker(std::vector<uint8_t>& out, uint8_t code) {
    out.push_back(0xFF);
    out.push_back(code);
}

inline void put_dht(std::vector<uint8_t>& out, int tc, int th, const huff_spec& spec) {
    put_marker(out, 0xC4);
    put_u16(out, 2 + 1 + 16 + static_cast<int>(spec.symbols.size()));
    out.push_back(static_cast<uint8_t>((tc << 4) | th));
    for (uint8_t c : spec.counts) out.push_back(c);
    for (uint8_t s : spec.symbols) out.push_back(s);
}

}  // namespace detail

/// Serialize a compressed image back to a baseline JFIF stream using the
/// typical Huffman tables. The entropy stage is lossless: parsing the result
/// reproduces planes, quantization tables and sampling exactly.
inline std::vector<uint8_t> encode_coefficients(const compressed_image& img) {
    img.validate();
    const int ncomp = img.channels();
    std::vector<uint8_t> out;

    detail::put_marker(out, 0xD8);  // SOI

    detail::put_marker(out, 0xE0);  // APP0 / JFIF
    detail::put_u16(out, 16);
    const char jfif[5] = {'J', 'F', 'I', 'F', '\0'};
    out.insert(out.end(), jfif, jfif + 5);
    out.push_back(1);  // version 1.1
    out.push_back(1);
    out.push_back(0);  // aspect-ratio units
    detail::put_u16(out, 1);
    detail::put_u16(out, 1);
    out.push_back(0);  // no thumbnail
    out.push_back(0);

    // Assign each plane the lowest table id holding its quant table.
    std::vector<int> tq(ncomp, 0);
    std::vector<const quant_matrix*> tables;
    for (int c = 0; c < ncomp; ++c) {
        int id = -1;
        for (size_t i = 0; i < tables.size(); ++i)
            if (*tables[i] == img.qtables[c]) id = static_cast<int>(i);
        if (id < 0) {
            id = static_cast<int>(tables.size());
            tables.push_back(&img.qtables[c]);
        }
        tq[c] = id;
    }
    detail::put_marker(out, 0xDB);  // DQT
    detail::put_u16(out, 2 + 65 * static_cast<int>(tables.size()));
    for (size_t i = 0; i < tables.size(); ++i) {
        out.push_back(static_cast<uint8_t>(i));  // 8-bit precision, table id
        for (int k = 0; k < 64; ++k) {
            const uint16_t q = tables[i]->values[kZigzagToNatural[k]];
            require(q <= 255, errc::range_overflow, "quantization step exceeds 8-bit table");
            out.push_back(static_cast<uint8_t>(q));
        }
    }

    detail::put_marker(out, 0xC0);  // SOF0
    detail::put_u16(out, 8 + 3 * ncomp);
    out.push_back(8);  // sample precision
    detail::put_u16(out, img.height);
    detail::put_u16(out, img.width);
    out.push_back(static_cast<uint8_t>(ncomp));
    for (int c = 0; c < ncomp; ++c) {
        int h, v;
        sampling_factors(img.sampling, c, h, v);
        out.push_back(static_cast<uint8_t>(c + 1));  // component id
        out.push_back(static_cast<uint8_t>((h << 4) | v));
        out.push_back(static_cast<uint8_t>(tq[c]));
    }

    detail::put_dht(out, 0, 0, typical_dc_luma());
    detail::put_dht(out, 1, 0, typical_ac_luma());
    if (ncomp == 3) {
        detail::put_dht(out, 0, 1, typical_dc_chroma());
        detail::put_dht(out, 1, 1, typical_ac_chroma());
    }

    detail::put_marker(out, 0xDA);  // SOS
    detail::put_u16(out, 6 + 2 * ncomp);
    out.push_back(static_cast<uint8_t>(ncomp));
    for (int c = 0; c < ncomp; ++c) {
        out.push_back(static_cast<uint8_t>(c + 1));
        out.push_back(c == 0 ? 0x00 : 0x11);  // DC/AC table selectors
    }
    out.push_back(0);   // spectral selection 0..63
    out.push_back(63);
    out.push_back(0);   // no successive approximation

    const huff_encoder dc_luma = huff_encoder::build(typical_dc_luma());
    const huff_encoder ac_luma = huff_encoder::build(typical_ac_luma());
    const huff_encoder dc_chroma = huff_encoder::build(typical_dc_chroma());
    const huff_encoder ac_chroma = huff_encoder::build(typical_ac_chroma());

    detail::bit_writer bw(out);
    const int mcux = ceil_div(img.width, 8 * max_h(img.sampling));
    const int mcuy = ceil_div(img.height, 8 * max_v(img.sampling));
    std::array<int32_t, 3> pred{};
    for (int my = 0; my < mcuy; ++my)
        for (int mx = 0; mx < mcux; ++mx)
            for (int c = 0; c < ncomp; ++c) {
                int h, v;
                sampling_factors(img.sampling, c, h, v);
                for (int by = 0; by < v; ++by)
                    for (int bx = 0; bx < h; ++bx) {
                        const int brow = my * v + by;
                        const int bcol = mx * h + bx;
                        std::array<int32_t, 64> blk;
                        const plane_i32& pl = img.planes[c];
                        for (int u = 0; u < 8; ++u)
                            for (int w = 0; w < 8; ++w)
                                blk[8 * u + w] = pl(8 * brow + u, 8 * bcol + w);
                        detail::encode_block(bw, c == 0 ? dc_luma : dc_chroma,
                                             c == 0 ? ac_luma : ac_chroma, pred[c], blk.data());
                    }
            }
    bw.flush();

    detail::put_marker(out, 0xD9);  // EOI
    return out;
}

/// Average 2x2 pixel groups (rows/cols must be even).
inline plane_u8 box_subsample_2x(const plane_u8& p) {
    require(p.rows() % 2 == 0 && p.cols() % 2 == 0, errc::non_block_aligned,
            "subsample needs even dims");
    plane_u8 out(p.rows() / 2, p.cols() / 2);
    for (int r = 0; r < out.rows(); ++r)
        for (int c = 0; c < out.cols(); ++c) {
            const int sum = p(2 * r, 2 * c) + p(2 * r, 2 * c + 1) +
                            p(2 * r + 1, 2 * c) + p(2 * r + 1, 2 * c + 1);
            out(r, c) = static_cast<uint8_t>((sum + 2) / 4);
        }
    return out;
}

/// Replicate edge samples out to (rows, cols).
inline plane_u8 pad_edge(const plane_u8& p, int rows, int cols) {
    require(rows >= p.rows() && cols >= p.cols(), errc::bad_config, "pad smaller than plane");
    plane_u8 out(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            out(r, c) = p(std::min(r, p.rows() - 1), std::min(c, p.cols() - 1));
    return out;
}

/// Forward-transform one padded 8-bit plane: level shift, 8x8 DCT, quantize.
inline plane_i32 transform_plane(const plane_u8& p, const quant_matrix& q) {
    require(p.rows() % 8 == 0 && p.cols() % 8 == 0, errc::non_block_aligned,
            "plane not 8x8 aligned");
    plane_f64 coeffs(p.rows(), p.cols());
    matrix block(8, 8);
    for (int br = 0; br < p.rows() / 8; ++br)
        for (int bc = 0; bc < p.cols() / 8; ++bc) {
            for (int y = 0; y < 8; ++y)
                for (int x = 0; x < 8; ++x) block(y, x) = p(8 * br + y, 8 * bc + x) - 128.0;
            const matrix f = dct::forward_dct2(block);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) coeffs(8 * br + u, 8 * bc + v) = f(u, v);
        }
    return quantize(coeffs, q);
}

/// Compress an 8-bit raster with Annex-K tables scaled to `quality`. Color
/// rasters (RGB or YCbCr) use the requested chroma sampling; grayscale
/// rasters ignore it.
inline compressed_image build_compressed(const raster_image& raster, sampling_kind sampling,
                                         int quality) {
    require(raster.width > 0 && raster.height > 0 &&
                raster.channels.size() == (raster.space == raster_image::color::grayscale ? 1u : 3u),
            errc::bad_format, "inconsistent raster");
    for (const plane_u8& ch : raster.channels)
        require(ch.rows() == raster.height && ch.cols() == raster.width, errc::shape_mismatch,
                "raster channel dims");

    compressed_image img;
    img.width = raster.width;
    img.height = raster.height;

    if (raster.space == raster_image::color::grayscale) {
        img.sampling = sampling_kind::grayscale;
        const int bw = ceil_div(raster.width, 8), bh = ceil_div(raster.height, 8);
        img.planes.push_back(transform_plane(pad_edge(raster.channels[0], 8 * bh, 8 * bw),
                                             luma_quant_table(quality)));
        img.qtables.push_back(luma_quant_table(quality));
        return img;
    }

    require(sampling != sampling_kind::grayscale, errc::bad_config,
            "color raster needs a color sampling mode");
    img.sampling = sampling;

    std::vector<plane_u8> ycc(3, plane_u8(raster.height, raster.width));
    if (raster.space == raster_image::color::rgb) {
        for (int r = 0; r < raster.height; ++r)
            for (int c = 0; c < raster.width; ++c)
                rgb_to_ycbcr(raster.channels[0](r, c), raster.channels[1](r, c),
                             raster.channels[2](r, c), ycc[0](r, c), ycc[1](r, c), ycc[2](r, c));
    } else {
        ycc = raster.channels;
    }

    const int mcu = 8 * max_h(sampling);  // MCUs are square for both supported modes
    const int pw = ceil_div(raster.width, mcu) * mcu;
    const int ph = ceil_div(raster.height, mcu) * mcu;
    for (int c = 0; c < 3; ++c) {
        plane_u8 padded = pad_edge(ycc[c], ph, pw);
        if (c > 0 && sampling == sampling_kind::s420) padded = box_subsample_2x(padded);
        img.planes.push_back(
            transform_plane(padded, c == 0 ? luma_quant_table(quality) : chroma_quant_table(quality)));
        img.qtables.push_back(c == 0 ? luma_quant_table(quality) : chroma_quant_table(quality));
    }
    return img;
}

inline std::vector<uint8_t> compress_raster(const raster_image& raster, sampling_kind sampling,
                                            int quality) {
    return encode_coefficients(build_compressed(raster, sampling, quality));
}

}  // namespace jpegdct::jpeg
