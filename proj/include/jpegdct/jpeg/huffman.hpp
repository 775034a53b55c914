#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "../common.hpp"
#include "tables.hpp"

namespace jpegdct::jpeg {

/// Decode-side Huffman table: canonical codes from a DHT-style spec, with an
/// 9-bit lookahead LUT for short codes and min/max-code bounds for the rest.
struct huff_decoder {
    static constexpr int kFastBits = 9;

    std::vector<uint8_t> symbols;                 // values in code order
    std::array<int, 17> val_base{};               // symbols[] offset of first code of each length
    std::array<int32_t, 17> mincode{};            // first code value of each length
    std::array<int32_t, 17> maxcode{};            // last code value, -1 if none
    std::array<int16_t, 1 << kFastBits> fast{};   // (len << 8) | symbol, or -1

    static huff_decoder build(const huff_spec& spec) {
        huff_decoder h;
        h.fast.fill(-1);
        h.maxcode.fill(-1);

        uint32_t code = 0;
        int si = 0;
        for (int len = 1; len <= 16; ++len) {
            h.val_base[len] = si;
            h.mincode[len] = static_cast<int32_t>(code);
            const int n = spec.counts[len - 1];
            require(si + n <= static_cast<int>(spec.symbols.size()), errc::bad_format,
                    "Huffman table symbol count mismatch");
            for (int i = 0; i < n; ++i, ++si, ++code) {
                require(code < (1u << len), errc::bad_format, "Huffman code length counts overflow");
                if (len <= kFastBits) {
                    // all lookahead words beginning with this code resolve to it
                    const int shift = kFastBits - len;
                    const int base = static_cast<int>(code) << shift;
                    for (int j = 0; j < (1 << shift); ++j)
                        h.fast[base + j] = static_cast<int16_t>((len << 8) | spec.symbols[si]);
                }
            }
            h.maxcode[len] = n ? static_cast<int32_t>(code) - 1 : -1;
            code <<= 1;
        }
        require(si == static_cast<int>(spec.symbols.size()), errc::bad_format,
                "Huffman table has unused symbols");
        h.symbols = spec.symbols;
        return h;
    }
};

/// Encode-side Huffman table: code word and length per symbol (length 0 means
/// the symbol is not in the table).
struct huff_encoder {
    std::array<uint16_t, 256> code{};
    std::array<uint8_t, 256> size{};

    static huff_encoder build(const huff_spec& spec) {
        huff_encoder h;
        uint32_t c = 0;
        int si = 0;
        for (int len = 1; len <= 16; ++len) {
            for (int i = 0; i < spec.counts[len - 1]; ++i, ++si, ++c) {
                require(si < static_cast<int>(spec.symbols.size()) && c < (1u << len),
                        errc::bad_format, "invalid Huffman table spec");
                h.code[spec.symbols[si]] = static_cast<uint16_t>(c);
                h.size[spec.symbols[si]] = static_cast<uint8_t>(len);
            }
            c <<= 1;
        }
        return h;
    }
};

/// T.81 EXTEND: map a t-bit magnitude reading to its signed value.
inline int32_t huff_extend(uint32_t v, int t) {
    return v < (1u << (t - 1)) ? static_cast<int32_t>(v) - (1 << t) + 1 : static_cast<int32_t>(v);
}

/// Number of magnitude bits needed to code v (the DC/AC size category).
inline int bit_category(int32_t v) {
    uint32_t a = v < 0 ? static_cast<uint32_t>(-static_cast<int64_t>(v)) : static_cast<uint32_t>(v);
    int n = 0;
    while (a) {
        a >>= 1;
        ++n;
    }
    return n;
}

}  // namespace jpegdct::jpeg
