#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "common.hpp"
#include "jpeg/pixels.hpp"
#include "jpeg/types.hpp"

namespace jpegdct::metrics {

/// On color inputs, compare luma planes (the usual convention for these
/// tables) or average squared error over all channels.
enum class color_mode { luma, channel_mean };

struct metric_options {
    color_mode colors = color_mode::luma;
    // SSIM window and stabilizers, standard published defaults
    int window = 11;
    double sigma = 1.5;
    double k1 = 0.01;
    double k2 = 0.03;
    double peak = 255.0;
    int block = 8;  // boundary grid for the blocking-effect factor
};

struct metric_result {
    double psnr = 0;    // +inf when images identical
    double ssim = 0;
    double psnr_b = 0;  // +inf when MSE and BEF both vanish
};

namespace detail {

inline plane_f64 to_f64(const plane_u8& p) {
    plane_f64 out(p.rows(), p.cols());
    for (size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i];
    return out;
}

/// Planes the metric runs on: luma (converting RGB if needed) or every channel.
inline std::vector<plane_f64> metric_planes(const jpeg::raster_image& img, color_mode mode) {
    require(!img.channels.empty(), errc::shape_mismatch, "raster without channels");
    if (img.channels.size() == 1 || mode == color_mode::channel_mean) {
        std::vector<plane_f64> out;
        for (const plane_u8& c : img.channels) out.push_back(to_f64(c));
        return out;
    }
    require(img.channels.size() == 3, errc::shape_mismatch, "expected 1 or 3 channels");
    if (img.space == jpeg::raster_image::color::ycbcr) return {to_f64(img.channels[0])};
    const plane_u8& r = img.channels[0];
    plane_f64 y(r.rows(), r.cols());
    for (int i = 0; i < r.rows(); ++i)
        for (int j = 0; j < r.cols(); ++j) {
            uint8_t yy, cb, cr;
            jpeg::rgb_to_ycbcr(img.channels[0](i, j), img.channels[1](i, j),
                               img.channels[2](i, j), yy, cb, cr);
            y(i, j) = yy;
        }
    return {y};
}

inline void require_compatible(const jpeg::raster_image& a, const jpeg::raster_image& b) {
    require(a.width == b.width && a.height == b.height && a.channels.size() == b.channels.size(),
            errc::shape_mismatch, "metric inputs must share dims and channel count");
    for (size_t c = 0; c < a.channels.size(); ++c)
        require(a.channels[c].same_shape(b.channels[c]) && a.channels[c].rows() == a.height &&
                    a.channels[c].cols() == a.width,
                errc::shape_mismatch, "metric inputs must share dims and channel count");
}

inline double mse(const std::vector<plane_f64>& a, const std::vector<plane_f64>& b) {
    double acc = 0;
    size_t n = 0;
    for (size_t c = 0; c < a.size(); ++c) {
        for (size_t i = 0; i < a[c].size(); ++i) {
            const double d = a[c].data()[i] - b[c].data()[i];
            acc += d * d;
        }
        n += a[c].size();
    }
    return acc / static_cast<double>(n);
}

/// Blocking-effect factor of Yim & Bovik, single block size. Mean squared
/// step across block-boundary pixel pairs minus the within-block mean, scaled
/// by log2(block)/log2(min dim); zero when boundaries are no rougher than the
/// block interiors.
inline double blocking_effect_factor(const plane_f64& x, int block) {
    const int h = x.rows(), w = x.cols();
    double sb = 0, snb = 0;
    int64_t nb = 0, nnb = 0;
    for (int r = 0; r < h; ++r)
        for (int c = 0; c + 1 < w; ++c) {
            const double d = x(r, c) - x(r, c + 1);
            if ((c + 1) % block == 0) { sb += d * d; ++nb; }
            else { snb += d * d; ++nnb; }
        }
    for (int c = 0; c < w; ++c)
        for (int r = 0; r + 1 < h; ++r) {
            const double d = x(r, c) - x(r + 1, c);
            if ((r + 1) % block == 0) { sb += d * d; ++nb; }
            else { snb += d * d; ++nnb; }
        }
    const double d_b = nb ? sb / static_cast<double>(nb) : 0.0;
    const double d_bc = nnb ? snb / static_cast<double>(nnb) : 0.0;
    if (d_b <= d_bc) return 0.0;
    const double eta = std::log2(static_cast<double>(block)) /
                       std::log2(static_cast<double>(std::min(h, w)));
    return eta * (d_b - d_bc);
}

inline std::vector<double> gaussian_window(int n, double sigma) {
    std::vector<double> w(n);
    const double mid = (n - 1) / 2.0;
    double total = 0;
    for (int i = 0; i < n; ++i) {
        w[i] = std::exp(-(i - mid) * (i - mid) / (2.0 * sigma * sigma));
        total += w[i];
    }
    for (double& v : w) v /= total;
    return w;
}

}  // namespace detail

inline double psnr_from_mse(double mse_value, double peak = 255.0) {
    if (mse_value <= 0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse_value);
}

inline double psnr(const jpeg::raster_image& a, const jpeg::raster_image& b,
                   const metric_options& opt = {}) {
    detail::require_compatible(a, b);
    return psnr_from_mse(
        detail::mse(detail::metric_planes(a, opt.colors), detail::metric_planes(b, opt.colors)),
        opt.peak);
}

/// Mean local SSIM over all fully-covered window positions, separable
/// Gaussian weighting. Color inputs are compared on luma.
inline double ssim(const jpeg::raster_image& a, const jpeg::raster_image& b,
                   const metric_options& opt = {}) {
    detail::require_compatible(a, b);
    const plane_f64 x = detail::metric_planes(a, color_mode::luma)[0];
    const plane_f64 y = detail::metric_planes(b, color_mode::luma)[0];
    const int n = opt.window;
    require(n >= 1 && n % 2 == 1, errc::bad_config, "SSIM window must be odd");
    require(x.rows() >= n && x.cols() >= n, errc::too_small, "image smaller than SSIM window");
    const std::vector<double> g = detail::gaussian_window(n, opt.sigma);
    const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
    const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);

    // separable pass: per-row filtered planes of the five products
    const int rows = x.rows(), cols = x.cols();
    const int out_cols = cols - n + 1, out_rows = rows - n + 1;
    std::vector<plane_f64> row_filt(5, plane_f64(rows, out_cols));
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < out_cols; ++c) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int k = 0; k < n; ++k) {
                const double xv = x(r, c + k), yv = y(r, c + k);
                sx += g[k] * xv;
                sy += g[k] * yv;
                sxx += g[k] * xv * xv;
                syy += g[k] * yv * yv;
                sxy += g[k] * xv * yv;
            }
            row_filt[0](r, c) = sx;
            row_filt[1](r, c) = sy;
            row_filt[2](r, c) = sxx;
            row_filt[3](r, c) = syy;
            row_filt[4](r, c) = sxy;
        }
    double total = 0;
    for (int r = 0; r < out_rows; ++r)
        for (int c = 0; c < out_cols; ++c) {
            double m[5] = {0, 0, 0, 0, 0};
            for (int k = 0; k < n; ++k)
                for (int t = 0; t < 5; ++t) m[t] += g[k] * row_filt[t](r + k, c);
            const double mx = m[0], my = m[1];
            const double vx = m[2] - mx * mx, vy = m[3] - my * my, cxy = m[4] - mx * my;
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
        }
    return total / (static_cast<double>(out_rows) * out_cols);
}

/// PSNR penalized by the blocking-effect factor of the TEST image:
/// 10*log10(peak^2 / (MSE + BEF)).
inline double psnr_b(const jpeg::raster_image& ref, const jpeg::raster_image& test,
                     const metric_options& opt = {}) {
    detail::require_compatible(ref, test);
    const std::vector<plane_f64> a = detail::metric_planes(ref, opt.colors);
    const std::vector<plane_f64> b = detail::metric_planes(test, opt.colors);
    double bef = 0;
    for (const plane_f64& p : b) bef += detail::blocking_effect_factor(p, opt.block);
    bef /= static_cast<double>(b.size());
    return psnr_from_mse(detail::mse(a, b) + bef, opt.peak);
}

inline metric_result compute_metrics(const jpeg::raster_image& ref, const jpeg::raster_image& test,
                                     const metric_options& opt = {}) {
    metric_result out;
    out.psnr = psnr(ref, test, opt);
    out.ssim = ssim(ref, test, opt);
    out.psnr_b = psnr_b(ref, test, opt);
    return out;
}

}  // namespace jpegdct::metrics
