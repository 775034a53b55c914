// Image quality metrics: PSNR closed forms and symmetry, SSIM against a
// dense per-window oracle plus its exactness/range properties, and PSNR-B
// against a brute-force blocking-effect implementation.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <vector>

#include <jpegdct/jpeg/pixels.hpp>
#include <jpegdct/metrics.hpp>

#include "testing.hpp"

using namespace jpegdct;
using metrics::metric_options;

namespace {

std::mt19937& rng() {
    static std::mt19937 g(0x3e791c);
    return g;
}

jpeg::raster_image gray_image(const plane_u8& p) {
    jpeg::raster_image img;
    img.space = jpeg::raster_image::color::grayscale;
    img.width = p.cols();
    img.height = p.rows();
    img.channels = {p};
    return img;
}

plane_u8 random_u8(int rows, int cols, int lo = 0, int hi = 255) {
    std::uniform_int_distribution<int> dist(lo, hi);
    plane_u8 p(rows, cols);
    for (size_t i = 0; i < p.size(); ++i) p.data()[i] = static_cast<uint8_t>(dist(rng()));
    return p;
}

// Smooth, block-boundary-free content: samples off a 2-D sinusoid ramp.
plane_u8 smooth_u8(int rows, int cols) {
    plane_u8 p(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            p(r, c) = static_cast<uint8_t>(
                120 + 60 * std::sin(0.07 * r) + 50 * std::cos(0.05 * c + 0.3));
    return p;
}

plane_u8 shift_u8(const plane_u8& p, int delta) {
    plane_u8 out(p.rows(), p.cols());
    for (size_t i = 0; i < p.size(); ++i)
        out.data()[i] = static_cast<uint8_t>(p.data()[i] + delta);
    return out;
}

// Fully dense SSIM: explicit 2-D Gaussian window and centered moments at
// every valid position. Structured nothing like the separable pass.
double ssim_oracle(const plane_u8& a, const plane_u8& b, const metric_options& opt) {
    const int n = opt.window;
    std::vector<double> g(n);
    const double mid = (n - 1) / 2.0;
    double gt = 0;
    for (int i = 0; i < n; ++i) {
        g[i] = std::exp(-(i - mid) * (i - mid) / (2 * opt.sigma * opt.sigma));
        gt += g[i];
    }
    for (double& v : g) v /= gt;
    const double c1 = (opt.k1 * opt.peak) * (opt.k1 * opt.peak);
    const double c2 = (opt.k2 * opt.peak) * (opt.k2 * opt.peak);

    double total = 0;
    int count = 0;
    for (int r0 = 0; r0 + n <= a.rows(); ++r0)
        for (int c0 = 0; c0 + n <= a.cols(); ++c0) {
            double mx = 0, my = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double w = g[i] * g[j];
                    mx += w * a(r0 + i, c0 + j);
                    my += w * b(r0 + i, c0 + j);
                }
            double vx = 0, vy = 0, cxy = 0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const double w = g[i] * g[j];
                    const double dx = a(r0 + i, c0 + j) - mx, dy = b(r0 + i, c0 + j) - my;
                    vx += w * dx * dx;
                    vy += w * dy * dy;
                    cxy += w * dx * dy;
                }
            total += ((2 * mx * my + c1) * (2 * cxy + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++count;
        }
    return total / count;
}

// Independent blocking-effect factor: gather boundary/interior squared steps
// with explicit pair lists instead of the production sweep.
double bef_oracle(const plane_u8& x, int block) {
    std::vector<double> boundary, interior;
    for (int r = 0; r < x.rows(); ++r)
        for (int c = 0; c + 1 < x.cols(); ++c) {
            const double d = double(x(r, c)) - double(x(r, c + 1));
            ((c + 1) % block == 0 ? boundary : interior).push_back(d * d);
        }
    for (int c = 0; c < x.cols(); ++c)
        for (int r = 0; r + 1 < x.rows(); ++r) {
            const double d = double(x(r, c)) - double(x(r + 1, c));
            ((r + 1) % block == 0 ? boundary : interior).push_back(d * d);
        }
    auto mean = [](const std::vector<double>& v) {
        double s = 0;
        for (double e : v) s += e;
        return v.empty() ? 0.0 : s / v.size();
    };
    const double d_b = mean(boundary), d_bc = mean(interior);
    if (d_b <= d_bc) return 0.0;
    return std::log2(double(block)) / std::log2(double(std::min(x.rows(), x.cols()))) *
           (d_b - d_bc);
}

}  // namespace

TEST_CASE("psnr closed forms") {
    const plane_u8 a = random_u8(48, 64, 0, 239);
    CHECK(std::isinf(metrics::psnr(gray_image(a), gray_image(a))));

    // Uniform error of 16 on every sample: MSE = 256.
    const double want = 10.0 * std::log10(255.0 * 255.0 / 256.0);
    const double got = metrics::psnr(gray_image(a), gray_image(shift_u8(a, 16)));
    CHECK(got == Catch::Approx(want).margin(1e-3));
    CHECK(got == Catch::Approx(24.0484).margin(1e-3));

    CHECK(metrics::psnr(gray_image(a), gray_image(shift_u8(a, 16))) ==
          metrics::psnr(gray_image(shift_u8(a, 16)), gray_image(a)));

    CHECK(std::isinf(metrics::psnr_from_mse(0.0)));
    CHECK(metrics::psnr_from_mse(65025.0) == Catch::Approx(0.0).margin(1e-12));
}

TEST_CASE("psnr strictly decreases with noise amplitude") {
    const plane_u8 a = random_u8(32, 32, 20, 200);
    double prev = std::numeric_limits<double>::infinity();
    for (int amp : {1, 2, 4, 8, 16}) {
        const double v = metrics::psnr(gray_image(a), gray_image(shift_u8(a, amp)));
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("ssim of an image with itself is exactly one") {
    const plane_u8 a = random_u8(32, 48);
    CHECK(metrics::ssim(gray_image(a), gray_image(a)) == 1.0);
    const plane_u8 s = smooth_u8(24, 24);
    CHECK(metrics::ssim(gray_image(s), gray_image(s)) == 1.0);
}

TEST_CASE("ssim on constant pairs collapses to the luminance term") {
    for (auto [va, vb] : {std::pair{60, 68}, {200, 180}, {15, 15}}) {
        const plane_u8 a(24, 24, static_cast<uint8_t>(va));
        const plane_u8 b(24, 24, static_cast<uint8_t>(vb));
        const double c1 = (0.01 * 255) * (0.01 * 255);
        const double want =
            (2.0 * va * vb + c1) / (double(va) * va + double(vb) * vb + c1);
        CHECK(metrics::ssim(gray_image(a), gray_image(b)) ==
              Catch::Approx(want).margin(1e-12));
    }
}

TEST_CASE("ssim matches the dense per-window oracle") {
    const metric_options opt;
    const plane_u8 a = smooth_u8(20, 26);
    plane_u8 b = a;
    std::uniform_int_distribution<int> noise(-12, 12);
    for (size_t i = 0; i < b.size(); ++i) {
        const int v = b.data()[i] + noise(rng());
        b.data()[i] = static_cast<uint8_t>(std::clamp(v, 0, 255));
    }
    CHECK(metrics::ssim(gray_image(a), gray_image(b)) ==
          Catch::Approx(ssim_oracle(a, b, opt)).margin(1e-9));

    // Photometric negation: structure inverts, score goes strongly negative
    // (keep values away from mid-gray so a and 255-a differ everywhere).
    plane_u8 hi(22, 22), neg(22, 22);
    for (int r = 0; r < 22; ++r)
        for (int c = 0; c < 22; ++c) {
            hi(r, c) = static_cast<uint8_t>(30 + 3 * r + 5 * c + 40 * ((r / 4 + c / 4) % 2));
            neg(r, c) = static_cast<uint8_t>(255 - hi(r, c));
        }
    const double inverted = metrics::ssim(gray_image(hi), gray_image(neg));
    CHECK(inverted == Catch::Approx(ssim_oracle(hi, neg, opt)).margin(1e-9));
    CHECK(inverted < 0.0);
}

TEST_CASE("ssim stays in range and ignores where content sits") {
    for (int trial = 0; trial < 5; ++trial) {
        const plane_u8 a = random_u8(16, 16), b = random_u8(16, 16);
        const double v = metrics::ssim(gray_image(a), gray_image(b));
        CHECK(v >= -1.0);
        CHECK(v <= 1.0);
    }

    // Same content embedded at two offsets in constant-padded canvases:
    // every window either sees the (translated) content pair or the constant
    // pair, so the mean over windows is unchanged.
    const int canvas = 80, content = 40;
    const plane_u8 ca = random_u8(content, content, 30, 220);
    const plane_u8 cb = random_u8(content, content, 30, 220);
    auto embed = [&](const plane_u8& src, int r0, int c0, uint8_t fill) {
        plane_u8 out(canvas, canvas, fill);
        for (int r = 0; r < content; ++r)
            for (int c = 0; c < content; ++c) out(r0 + r, c0 + c) = src(r, c);
        return out;
    };
    const double at_origin = metrics::ssim(gray_image(embed(ca, 12, 12, 60)),
                                           gray_image(embed(cb, 12, 12, 65)));
    const double shifted = metrics::ssim(gray_image(embed(ca, 20, 16, 60)),
                                         gray_image(embed(cb, 20, 16, 65)));
    CHECK(at_origin == Catch::Approx(shifted).margin(1e-12));
}

TEST_CASE("ssim input contracts") {
    const plane_u8 small = random_u8(8, 8);
    CHECK_THROWS_MATCHES(metrics::ssim(gray_image(small), gray_image(small)), error,
                         error_code(errc::too_small));

    metric_options even;
    even.window = 10;
    const plane_u8 a = random_u8(32, 32);
    CHECK_THROWS_MATCHES(metrics::ssim(gray_image(a), gray_image(a), even), error,
                         error_code(errc::bad_config));

    CHECK_THROWS_MATCHES(metrics::psnr(gray_image(a), gray_image(random_u8(32, 31))), error,
                         error_code(errc::shape_mismatch));
}

TEST_CASE("psnr-b equals psnr when boundaries are clean, penalizes when not") {
    // Identical boundary-smooth pair: MSE and BEF both vanish, both infinite.
    const plane_u8 s = smooth_u8(48, 48);
    CHECK(std::isinf(metrics::psnr(gray_image(s), gray_image(s))));
    CHECK(std::isinf(metrics::psnr_b(gray_image(s), gray_image(s))));

    // Flatten each 8x8 block of the test image to its mean: strong artificial
    // 8-grid discontinuities.
    plane_u8 blocky(48, 48);
    for (int br = 0; br < 6; ++br)
        for (int bc = 0; bc < 6; ++bc) {
            int sum = 0;
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) sum += s(8 * br + u, 8 * bc + v);
            const uint8_t m = static_cast<uint8_t>((sum + 32) / 64);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) blocky(8 * br + u, 8 * bc + v) = m;
        }
    const double p = metrics::psnr(gray_image(s), gray_image(blocky));
    const double pb = metrics::psnr_b(gray_image(s), gray_image(blocky));
    CHECK(pb < p);

    // And the penalty matches the brute-force factor.
    double mse = 0;
    for (size_t i = 0; i < s.size(); ++i) {
        const double d = double(s.data()[i]) - double(blocky.data()[i]);
        mse += d * d;
    }
    mse /= double(s.size());
    const double want = metrics::psnr_from_mse(mse + bef_oracle(blocky, 8));
    CHECK(pb == Catch::Approx(want).margin(1e-9));
}

TEST_CASE("psnr-b never exceeds psnr") {
    for (int trial = 0; trial < 8; ++trial) {
        const plane_u8 a = random_u8(40, 32), b = random_u8(40, 32);
        CHECK(metrics::psnr_b(gray_image(a), gray_image(b)) <=
              metrics::psnr(gray_image(a), gray_image(b)) + 1e-12);
    }
}

TEST_CASE("color inputs compare on luma by default, rgb mean on request") {
    jpeg::raster_image a, b;
    a.space = b.space = jpeg::raster_image::color::rgb;
    a.width = b.width = 24;
    a.height = b.height = 24;
    for (int c = 0; c < 3; ++c) {
        a.channels.push_back(random_u8(24, 24, 10, 245));
        b.channels.push_back(random_u8(24, 24, 10, 245));
    }

    // Luma mode equals the grayscale metric on converted Y planes.
    auto to_y = [](const jpeg::raster_image& img) {
        plane_u8 y(img.height, img.width);
        for (int r = 0; r < img.height; ++r)
            for (int c = 0; c < img.width; ++c) {
                uint8_t yy, cb, cr;
                jpeg::rgb_to_ycbcr(img.channels[0](r, c), img.channels[1](r, c),
                                   img.channels[2](r, c), yy, cb, cr);
                y(r, c) = yy;
            }
        return y;
    };
    CHECK(metrics::psnr(a, b) ==
          metrics::psnr(gray_image(to_y(a)), gray_image(to_y(b))));
    CHECK(metrics::ssim(a, b) ==
          metrics::ssim(gray_image(to_y(a)), gray_image(to_y(b))));

    // Channel-mean mode pools squared error over all three planes.
    metric_options mean_mode;
    mean_mode.colors = metrics::color_mode::channel_mean;
    double acc = 0;
    for (int c = 0; c < 3; ++c)
        for (size_t i = 0; i < a.channels[c].size(); ++i) {
            const double d = double(a.channels[c].data()[i]) - double(b.channels[c].data()[i]);
            acc += d * d;
        }
    const double pooled = acc / (3.0 * 24 * 24);
    CHECK(metrics::psnr(a, b, mean_mode) ==
          Catch::Approx(metrics::psnr_from_mse(pooled)).margin(1e-12));

    const metrics::metric_result r = metrics::compute_metrics(a, b);
    CHECK(r.psnr == metrics::psnr(a, b));
    CHECK(r.ssim == metrics::ssim(a, b));
    CHECK(r.psnr_b == metrics::psnr_b(a, b));
}
