#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "common.hpp"
#include "jpeg/types.hpp"

namespace jpegdct {

inline std::vector<uint8_t> read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    require(f.good(), errc::not_found, "cannot open " + path);
    std::vector<uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return bytes;
}

inline void write_file(const std::string& path, const std::vector<uint8_t>& bytes) {
    std::ofstream f(path, std::ios::binary);
    require(f.good(), errc::not_found, "cannot create " + path);
    f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    require(f.good(), errc::bad_format, "write failed for " + path);
}

namespace pnm {

namespace detail {

// Whitespace/comment-skipping ASCII integer parse for PNM headers.
inline int parse_int(const std::vector<uint8_t>& b, size_t& i) {
    while (i < b.size()) {
        if (b[i] == '#') {
            while (i < b.size() && b[i] != '\n') ++i;
        } else if (b[i] == ' ' || b[i] == '\t' || b[i] == '\r' || b[i] == '\n') {
            ++i;
        } else {
            break;
        }
    }
    require(i < b.size() && b[i] >= '0' && b[i] <= '9', errc::bad_format, "malformed PNM header");
    int v = 0;
    while (i < b.size() && b[i] >= '0' && b[i] <= '9') {
        v = v * 10 + (b[i] - '0');
        require(v <= 1 << 24, errc::bad_format, "PNM header value too large");
        ++i;
    }
    return v;
}

}  // namespace detail

/// Read a binary PGM (P5) or PPM (P6), maxval 255.
inline jpeg::raster_image read(const std::vector<uint8_t>& bytes) {
    require(bytes.size() >= 2 && bytes[0] == 'P' && (bytes[1] == '5' || bytes[1] == '6'),
            errc::bad_format, "not a binary PGM/PPM");
    const int nch = bytes[1] == '5' ? 1 : 3;
    size_t i = 2;
    const int w = detail::parse_int(bytes, i);
    const int h = detail::parse_int(bytes, i);
    const int maxval = detail::parse_int(bytes, i);
    require(w > 0 && h > 0, errc::bad_format, "empty PNM image");
    require(maxval == 255, errc::bad_format, "only maxval 255 supported");
    require(i < bytes.size() && (bytes[i] == '\n' || bytes[i] == ' ' || bytes[i] == '\t' || bytes[i] == '\r'),
            errc::bad_format, "malformed PNM header");
    ++i;  // single whitespace byte separates header from samples

    const size_t need = static_cast<size_t>(w) * h * nch;
    require(bytes.size() - i >= need, errc::truncated_stream, "PNM sample data truncated");

    jpeg::raster_image img;
    img.space = nch == 1 ? jpeg::raster_image::color::grayscale : jpeg::raster_image::color::rgb;
    img.width = w;
    img.height = h;
    img.channels.assign(nch, plane_u8(h, w));
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c)
            for (int ch = 0; ch < nch; ++ch) img.channels[ch](r, c) = bytes[i++];
    return img;
}

inline jpeg::raster_image read(const std::string& path) { return read(read_file(path)); }

/// Write grayscale as PGM (P5), RGB as PPM (P6). YCbCr rasters are refused so
/// a color-space mix-up can't masquerade as RGB.
inline std::vector<uint8_t> write(const jpeg::raster_image& img) {
    require(img.space != jpeg::raster_image::color::ycbcr, errc::bad_config,
            "YCbCr rasters have no PNM form; convert to RGB first");
    const int nch = static_cast<int>(img.channels.size());
    require(nch == 1 || nch == 3, errc::bad_format, "raster must have 1 or 3 channels");
    std::string header = std::string(nch == 1 ? "P5" : "P6") + "\n" + std::to_string(img.width) +
                         " " + std::to_string(img.height) + "\n255\n";
    std::vector<uint8_t> out(header.begin(), header.end());
    out.reserve(out.size() + static_cast<size_t>(img.width) * img.height * nch);
    for (int r = 0; r < img.height; ++r)
        for (int c = 0; c < img.width; ++c)
            for (int ch = 0; ch < nch; ++ch) out.push_back(img.channels[ch](r, c));
    return out;
}

inline void write(const std::string& path, const jpeg::raster_image& img) {
    write_file(path, write(img));
}

}  // namespace pnm
}  // namespace jpegdct
