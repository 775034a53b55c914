#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "common.hpp"
#include "jpeg/types.hpp"

namespace jpegdct::corr {

enum class weight_scheme { queen8, rook4 };
enum class weight_norm { binary, row_standardized };

/// Contiguity weights over a 2-D grid. Default: 8-neighbor (queen) binary.
struct spatial_weights {
    weight_scheme scheme = weight_scheme::queen8;
    weight_norm norm = weight_norm::binary;
};

namespace detail {

inline constexpr int kQueenOffsets[8][2] = {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1},
                                            {0, 1},   {1, -1}, {1, 0},  {1, 1}};
inline constexpr int kRookOffsets[4][2] = {{-1, 0}, {0, -1}, {0, 1}, {1, 0}};

/// Visit every ordered neighbor pair (i -> j) once; fn(r, c, nr, nc).
template <typename Fn>
inline void for_each_neighbor(int rows, int cols, weight_scheme scheme, Fn&& fn) {
    const auto* offs = scheme == weight_scheme::queen8 ? kQueenOffsets : kRookOffsets;
    const int noffs = scheme == weight_scheme::queen8 ? 8 : 4;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c)
            for (int o = 0; o < noffs; ++o) {
                const int nr = r + offs[o][0], nc = c + offs[o][1];
                if (nr >= 0 && nr < rows && nc >= 0 && nc < cols) fn(r, c, nr, nc);
            }
}

inline int degree(int r, int c, int rows, int cols, weight_scheme scheme) {
    const int dr = (r > 0) + (r < rows - 1);
    const int dc = (c > 0) + (c < cols - 1);
    return scheme == weight_scheme::queen8 ? (dr + 1) * (dc + 1) - 1 : dr + dc;
}

struct centered_field {
    plane_f64 z;      // x - mean
    double ssq = 0;   // sum of squared deviations
    int n = 0;
};

inline centered_field center(const plane_f64& f) {
    const int n = f.rows() * f.cols();
    require(n >= 2, errc::too_small, "correlation needs at least 2 cells");
    double mn = f.data()[0], mx = f.data()[0], sum = 0;
    for (size_t i = 0; i < f.size(); ++i) {
        const double v = f.data()[i];
        sum += v;
        if (v < mn) mn = v;
        if (v > mx) mx = v;
    }
    require(mx > mn, errc::zero_variance, "field is constant");
    centered_field out;
    out.n = n;
    const double mean = sum / n;
    out.z = plane_f64(f.rows(), f.cols());
    for (size_t i = 0; i < f.size(); ++i) {
        const double z = f.data()[i] - mean;
        out.z.data()[i] = z;
        out.ssq += z * z;
    }
    return out;
}

}  // namespace detail

/// Moran's I: (n/S0) * sum_ij w_ij z_i z_j / sum_i z_i^2, neighbor sweep over
/// the grid instead of a dense weight matrix.
inline double morans_i(const plane_f64& f, const spatial_weights& w = {}) {
    const detail::centered_field cf = detail::center(f);
    double s0 = 0, num = 0;
    const bool rs = w.norm == weight_norm::row_standardized;
    detail::for_each_neighbor(f.rows(), f.cols(), w.scheme, [&](int r, int c, int nr, int nc) {
        const double wij = rs ? 1.0 / detail::degree(r, c, f.rows(), f.cols(), w.scheme) : 1.0;
        s0 += wij;
        num += wij * cf.z(r, c) * cf.z(nr, nc);
    });
    return (cf.n / s0) * (num / cf.ssq);
}

/// Geary's C: ((n-1)/(2 S0)) * sum_ij w_ij (x_i - x_j)^2 / sum_i z_i^2.
inline double gearys_c(const plane_f64& f, const spatial_weights& w = {}) {
    const detail::centered_field cf = detail::center(f);
    double s0 = 0, num = 0;
    const bool rs = w.norm == weight_norm::row_standardized;
    detail::for_each_neighbor(f.rows(), f.cols(), w.scheme, [&](int r, int c, int nr, int nc) {
        const double wij = rs ? 1.0 / detail::degree(r, c, f.rows(), f.cols(), w.scheme) : 1.0;
        const double d = f(r, c) - f(nr, nc);
        s0 += wij;
        num += wij * d * d;
    });
    return ((cf.n - 1) / (2.0 * s0)) * (num / cf.ssq);
}

enum class feature_kind { sum, ssum, wsum };

inline const char* feature_name(feature_kind k) {
    switch (k) {
        case feature_kind::sum: return "sum";
        case feature_kind::ssum: return "s-sum";
        case feature_kind::wsum: return "w-sum";
    }
    return "?";
}

/// Gaussian weighting kernel for the weighted-sum feature: peak at the
/// low-frequency corner (0,0), normalized to sum 1.
inline matrix wsum_kernel(double sigma = 2.0) {
    require(sigma > 0, errc::bad_config, "kernel sigma must be positive");
    matrix k(8, 8);
    double total = 0;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) total += (k(u, v) = std::exp(-(u * u + v * v) / (2 * sigma * sigma)));
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) k(u, v) /= total;
    return k;
}

/// One of the six block-feature variants: sum / squared sum / weighted sum,
/// on quantized or dequantized coefficients.
struct block_feature_kind {
    feature_kind kind = feature_kind::sum;
    bool dequantized = false;
    matrix kernel;  // 8x8 weights, used by wsum only

    static block_feature_kind make(feature_kind k, bool dq, double sigma = 2.0) {
        block_feature_kind f;
        f.kind = k;
        f.dequantized = dq;
        if (k == feature_kind::wsum) f.kernel = wsum_kernel(sigma);
        return f;
    }

    std::string name() const { return std::string(dequantized ? "dq-" : "") + feature_name(kind); }
};

/// All six variants in the order: sum, s-sum, w-sum, dq-sum, dq-s-sum, dq-w-sum.
inline std::vector<block_feature_kind> all_block_features(double sigma = 2.0) {
    std::vector<block_feature_kind> out;
    for (bool dq : {false, true})
        for (feature_kind k : {feature_kind::sum, feature_kind::ssum, feature_kind::wsum})
            out.push_back(block_feature_kind::make(k, dq, sigma));
    return out;
}

/// Scalar feature of one 8x8 quantized block; `q` is required for (and only
/// used by) the dequantized variants.
inline double block_feature(const plane_i32& plane, int br, int bc, const block_feature_kind& kind,
                            const jpeg::quant_matrix* q) {
    require(!kind.dequantized || q != nullptr, errc::bad_config,
            "dequantized feature needs a quantization table");
    double acc = 0;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            double x = plane(8 * br + u, 8 * bc + v);
            if (kind.dequantized) x *= (*q)(u, v);
            switch (kind.kind) {
                case feature_kind::sum: acc += x; break;
                case feature_kind::ssum: acc += x * x; break;
                case feature_kind::wsum: acc += kind.kernel(u, v) * x; break;
            }
        }
    return acc;
}

/// One feature value per 8x8 block, preserving the block-grid geometry.
inline plane_f64 block_feature_field(const plane_i32& plane, const block_feature_kind& kind,
                                     const jpeg::quant_matrix* q) {
    require(plane.rows() % 8 == 0 && plane.cols() % 8 == 0, errc::non_block_aligned,
            "coefficient plane not 8x8 aligned");
    plane_f64 field(plane.rows() / 8, plane.cols() / 8);
    for (int br = 0; br < field.rows(); ++br)
        for (int bc = 0; bc < field.cols(); ++bc)
            field(br, bc) = block_feature(plane, br, bc, kind, q);
    return field;
}

}  // namespace jpegdct::corr
