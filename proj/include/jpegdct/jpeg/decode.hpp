#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "../common.hpp"
#include "huffman.hpp"
#include "types.hpp"
#include "zigzag.hpp"

namespace jpegdct::jpeg {

namespace detail {

inline std::string marker_name(int m) {
    static const char* hex = "0123456789ABCDEF";
    return std::string("0xFF") + hex[(m >> 4) & 15] + hex[m & 15];
}

/// MSB-first bit reader over entropy-coded data. Handles 0xFF00 byte stuffing
/// and stops (without consuming) at any marker. peek() zero-pads past the end
/// of the segment so fixed-width lookahead works at the tail; consume() only
/// accepts bits that were really in the stream.
class bit_reader {
public:
    bit_reader(const uint8_t* data, size_t size, size_t pos) : data_(data), size_(size), pos_(pos) {}

    uint32_t peek(int n) {
        ensure(n);
        return static_cast<uint32_t>(acc_ >> (nbits_ - n)) & ((1u << n) - 1);
    }

    void consume(int n) {
        require(n <= nbits_ - pad_, errc::truncated_stream, "entropy-coded data exhausted");
        nbits_ -= n;
        acc_ &= (uint64_t{1} << nbits_) - 1;
    }

    uint32_t bits(int n) {
        if (n == 0) return 0;
        uint32_t v = peek(n);
        consume(n);
        return v;
    }

    /// Drop pad bits and verify/skip a restart marker with the given number.
    void restart(int m) {
        acc_ = 0;
        nbits_ = 0;
        pad_ = 0;
        while (pos_ + 1 < size_ && data_[pos_] == 0xFF && data_[pos_ + 1] == 0xFF) ++pos_;  // fill bytes
        require(pos_ + 1 < size_, errc::truncated_stream, "stream ends before restart marker");
        require(data_[pos_] == 0xFF && data_[pos_ + 1] == (0xD0 + m), errc::bad_format,
                "expected restart marker " + std::to_string(m));
        pos_ += 2;
    }

    /// Byte position of the first unconsumed stream byte (buffered bits are
    /// all pad or trailing bits of already-passed bytes at scan end).
    size_t pos() const { return pos_; }

private:
    void ensure(int n) {
        while (nbits_ < n) {
            int b = next_byte();
            acc_ = (acc_ << 8) | static_cast<uint8_t>(b < 0 ? 0 : b);
            nbits_ += 8;
            if (b < 0) pad_ += 8;
        }
    }

    // Next entropy byte, or -1 at a marker / end of data (nothing consumed).
    int next_byte() {
        if (pad_ > 0 || pos_ >= size_) return -1;
        uint8_t b = data_[pos_];
        if (b != 0xFF) {
            ++pos_;
            return b;
        }
        if (pos_ + 1 >= size_ || data_[pos_ + 1] != 0x00) return -1;  // marker or truncated
        pos_ += 2;  // stuffed 0xFF
        return 0xFF;
    }

    const uint8_t* data_;
    size_t size_;
    size_t pos_;
    uint64_t acc_ = 0;
    int nbits_ = 0;
    int pad_ = 0;
};

inline int decode_symbol(bit_reader& br, const huff_decoder& h) {
    const uint32_t look = br.peek(huff_decoder::kFastBits);
    const int16_t f = h.fast[look];
    if (f >= 0) {
        br.consume(f >> 8);
        return f & 0xFF;
    }
    const uint32_t word = br.peek(16);
    for (int len = huff_decoder::kFastBits + 1; len <= 16; ++len) {
        const int32_t c = static_cast<int32_t>(word >> (16 - len));
        if (c <= h.maxcode[len]) {
            br.consume(len);
            return h.symbols[h.val_base[len] + (c - h.mincode[len])];
        }
    }
    fail(errc::invalid_huffman_code, "no Huffman code matches input bits");
}

/// Decode one block: differential DC + run-length AC, written de-zigzagged
/// into out[64] (natural order). `pred` is the running DC predictor.
inline void decode_block(bit_reader& br, const huff_decoder& dc, const huff_decoder& ac,
                         int32_t& pred, int32_t* out) {
    const int t = decode_symbol(br, dc);
    require(t <= 15, errc::bad_format, "DC size category out of range");
    pred += t ? huff_extend(br.bits(t), t) : 0;
    out[0] = pred;

    for (int k = 1; k < 64;) {
        const int rs = decode_symbol(br, ac);
        const int r = rs >> 4, s = rs & 15;
        if (s == 0) {
            if (r != 15) break;  // EOB
            k += 16;             // ZRL
            continue;
        }
        k += r;
        require(k < 64, errc::bad_format, "AC run-length past end of block");
        out[kZigzagToNatural[k]] = huff_extend(br.bits(s), s);
        ++k;
    }
}

struct frame_component {
    int id = 0;
    int h = 1, v = 1;
    int tq = 0;       // quant table id
    int td = 0, ta = 0;  // DC/AC Huffman table ids (from SOS)
};

struct parser {
    const uint8_t* data = nullptr;
    size_t size = 0;
    size_t pos = 0;

    std::array<std::optional<quant_matrix>, 4> qtables;
    std::array<std::optional<huff_decoder>, 4> dc_tables, ac_tables;
    int restart_interval = 0;

    bool have_frame = false;
    int width = 0, height = 0, ncomp = 0;
    std::array<frame_component, 3> comps;
    sampling_kind sampling = sampling_kind::grayscale;

    uint8_t u8() {
        require(pos < size, errc::truncated_stream, "unexpected end of file");
        return data[pos++];
    }

    int u16() {
        require(pos + 2 <= size, errc::truncated_stream, "unexpected end of file");
        int v = (data[pos] << 8) | data[pos + 1];
        pos += 2;
        return v;
    }

    // Next marker code, skipping 0xFF fill bytes. Returns the byte after 0xFF.
    int next_marker() {
        require(pos < size, errc::truncated_stream, "expected marker, hit end of file");
        require(data[pos] == 0xFF, errc::bad_format, "expected marker byte");
        while (pos < size && data[pos] == 0xFF) ++pos;
        require(pos < size, errc::truncated_stream, "expected marker, hit end of file");
        return data[pos++];
    }

    // Segment length (includes its own two bytes); returns payload byte count.
    int segment_length() {
        int len = u16();
        require(len >= 2, errc::bad_format, "marker segment length too small");
        require(pos + static_cast<size_t>(len) - 2 <= size, errc::truncated_stream,
                "marker segment extends past end of file");
        return len - 2;
    }

    void parse_dqt() {
        int remaining = segment_length();
        while (remaining > 0) {
            const uint8_t pq_tq = u8();
            const int pq = pq_tq >> 4, tq = pq_tq & 15;
            require(pq == 0, errc::unsupported_marker, "16-bit quantization tables not supported");
            require(tq < 4, errc::bad_format, "quantization table id out of range");
            require(remaining >= 65, errc::bad_format, "truncated quantization table");
            quant_matrix q;
            for (int k = 0; k < 64; ++k) q.values[kZigzagToNatural[k]] = u8();  // stream is zigzag order
            q.validate();
            qtables[tq] = q;
            remaining -= 65;
        }
    }

    void parse_dht() {
        int remaining = segment_length();
        while (remaining > 0) {
            const uint8_t tc_th = u8();
            const int tc = tc_th >> 4, th = tc_th & 15;
            require(tc <= 1, errc::bad_format, "Huffman table class out of range");
            require(th < 4, errc::bad_format, "Huffman table id out of range");
            require(remaining >= 17, errc::bad_format, "truncated Huffman table");
            huff_spec spec;
            int total = 0;
            for (int i = 0; i < 16; ++i) total += (spec.counts[i] = u8());
            require(total <= 256 && remaining >= 17 + total, errc::bad_format, "truncated Huffman table");
            spec.symbols.resize(total);
            for (int i = 0; i < total; ++i) spec.symbols[i] = u8();
            (tc == 0 ? dc_tables : ac_tables)[th] = huff_decoder::build(spec);
            remaining -= 17 + total;
        }
    }

    void parse_dri() {
        require(segment_length() == 2, errc::bad_format, "bad DRI segment length");
        restart_interval = u16();
    }

    void skip_segment() { pos += segment_length(); }

    void parse_sof0() {
        require(!have_frame, errc::bad_format, "multiple frame headers");
        const int len = segment_length();
        const int precision = u8();
        require(precision == 8, errc::unsupported_marker, "only 8-bit sample precision supported");
        height = u16();
        width = u16();
        require(width > 0 && height > 0, errc::unsupported_marker,
                "deferred image height (DNL) not supported");
        ncomp = u8();
        require(ncomp == 1 || ncomp == 3, errc::unsupported_sampling,
                std::to_string(ncomp) + "-component images not supported");
        require(len == 6 + 3 * ncomp, errc::bad_format, "bad frame header length");
        for (int c = 0; c < ncomp; ++c) {
            comps[c].id = u8();
            const uint8_t hv = u8();
            comps[c].h = hv >> 4;
            comps[c].v = hv & 15;
            comps[c].tq = u8();
            require(comps[c].h >= 1 && comps[c].h <= 4 && comps[c].v >= 1 && comps[c].v <= 4,
                    errc::bad_format, "sampling factor out of range");
            require(comps[c].tq < 4, errc::bad_format, "quantization table id out of range");
        }
        if (ncomp == 1) {
            sampling = sampling_kind::grayscale;  // factors are irrelevant for a single component
            comps[0].h = comps[0].v = 1;
        } else {
            const bool chroma_1x1 = comps[1].h == 1 && comps[1].v == 1 &&
                                    comps[2].h == 1 && comps[2].v == 1;
            if (comps[0].h == 1 && comps[0].v == 1 && chroma_1x1)
                sampling = sampling_kind::s444;
            else if (comps[0].h == 2 && comps[0].v == 2 && chroma_1x1)
                sampling = sampling_kind::s420;
            else
                fail(errc::unsupported_sampling,
                     "only 4:4:4 and 4:2:0 chroma sampling supported");
        }
        have_frame = true;
    }

    compressed_image parse_sos_and_scan() {
        require(have_frame, errc::bad_format, "scan before frame header");
        const int len = segment_length();
        const int ns = u8();
        require(ns == ncomp, errc::unsupported_marker, "non-interleaved multi-scan files not supported");
        require(len == 4 + 2 * ns, errc::bad_format, "bad scan header length");
        for (int i = 0; i < ns; ++i) {
            const int cs = u8();
            require(cs == comps[i].id, errc::bad_format, "scan component order differs from frame");
            const uint8_t tdta = u8();
            comps[i].td = tdta >> 4;
            comps[i].ta = tdta & 15;
            require(comps[i].td < 4 && comps[i].ta < 4, errc::bad_format, "Huffman selector out of range");
            require(dc_tables[comps[i].td].has_value(), errc::missing_table,
                    "DC Huffman table " + std::to_string(comps[i].td) + " not defined");
            require(ac_tables[comps[i].ta].has_value(), errc::missing_table,
                    "AC Huffman table " + std::to_string(comps[i].ta) + " not defined");
            require(qtables[comps[i].tq].has_value(), errc::missing_table,
                    "quantization table " + std::to_string(comps[i].tq) + " not defined");
        }
        const int ss = u8(), se = u8(), ahal = u8();
        require(ss == 0 && se == 63 && ahal == 0, errc::bad_format,
                "non-baseline spectral selection / successive approximation");

        compressed_image img;
        img.sampling = sampling;
        img.width = width;
        img.height = height;
        img.planes.resize(ncomp);
        img.qtables.resize(ncomp);
        for (int c = 0; c < ncomp; ++c) {
            int bw, bh;
            component_block_dims(sampling, c, width, height, bw, bh);
            img.planes[c] = plane_i32(8 * bh, 8 * bw);
            img.qtables[c] = *qtables[comps[c].tq];
        }

        const int mcux = ceil_div(width, 8 * max_h(sampling));
        const int mcuy = ceil_div(height, 8 * max_v(sampling));
        bit_reader br(data, size, pos);
        std::array<int32_t, 3> pred{};
        int rst = 0;

        for (int my = 0; my < mcuy; ++my) {
            for (int mx = 0; mx < mcux; ++mx) {
                const int mcu = my * mcux + mx;
                if (restart_interval && mcu && mcu % restart_interval == 0) {
                    br.restart(rst);
                    rst = (rst + 1) & 7;
                    pred.fill(0);
                }
                for (int c = 0; c < ncomp; ++c) {
                    for (int by = 0; by < comps[c].v; ++by) {
                        for (int bx = 0; bx < comps[c].h; ++bx) {
                            const int brow = my * comps[c].v + by;
                            const int bcol = mx * comps[c].h + bx;
                            std::array<int32_t, 64> block{};
                            decode_block(br, *dc_tables[comps[c].td], *ac_tables[comps[c].ta],
                                         pred[c], block.data());
                            plane_i32& pl = img.planes[c];
                            for (int u = 0; u < 8; ++u)
                                for (int v = 0; v < 8; ++v)
                                    pl(8 * brow + u, 8 * bcol + v) = block[8 * u + v];
                        }
                    }
                }
            }
        }

        pos = br.pos();
        return img;
    }

    compressed_image run() {
        require(size >= 2 && data[0] == 0xFF && data[1] == 0xD8, errc::bad_format,
                "not a JPEG stream (missing SOI)");
        pos = 2;
        while (true) {
            const int m = next_marker();
            switch (m) {
                case 0xC0:  // SOF0, baseline sequential
                    parse_sof0();
                    break;
                case 0xC4:
                    parse_dht();
                    break;
                case 0xDB:
                    parse_dqt();
                    break;
                case 0xDD:
                    parse_dri();
                    break;
                case 0xDA: {
                    compressed_image img = parse_sos_and_scan();
                    const int after = next_marker();
                    if (after == 0xDA)
                        fail(errc::unsupported_marker, "multi-scan files not supported");
                    require(after == 0xD9, errc::bad_format, "expected end-of-image after scan");
                    img.validate();
                    return img;
                }
                case 0xD9:
                    fail(errc::truncated_stream, "end-of-image before any scan");
                case 0xC2:
                    fail(errc::unsupported_marker, "progressive JPEG not supported");
                case 0xC9:
                case 0xCA:
                case 0xCB:
                case 0xCD:
                case 0xCE:
                case 0xCF:
                    fail(errc::unsupported_marker, "arithmetic-coded JPEG not supported");
                case 0xC1:
                case 0xC3:
                case 0xC5:
                case 0xC6:
                case 0xC7:
                    fail(errc::unsupported_marker, "only baseline sequential (SOF0) supported");
                case 0xCC:  // DAC
                    fail(errc::unsupported_marker, "arithmetic conditioning not supported");
                case 0xFE:  // COM
                    skip_segment();
                    break;
                default:
                    if (m >= 0xE0 && m <= 0xEF) {  // APPn
                        skip_segment();
                        break;
                    }
                    fail(errc::unsupported_marker, "unexpected marker " + marker_name(m));
            }
        }
    }
};

}  // namespace detail

/// Parse a baseline sequential Huffman JPEG into quantized DCT coefficients
/// (absolute DC, natural order) plus quantization tables and sampling layout.
inline compressed_image parse_jpeg(const uint8_t* data, size_t size) {
    detail::parser p{};
    p.data = data;
    p.size = size;
    return p.run();
}

inline compressed_image parse_jpeg(const std::vector<uint8_t>& bytes) {
    return parse_jpeg(bytes.data(), bytes.size());
}

}  // namespace jpegdct::jpeg
