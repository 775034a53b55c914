#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "correlation.hpp"
#include "jpeg/zigzag.hpp"

namespace jpegdct::maps {

using jpeg::kNaturalToZigzag;
using jpeg::kZigzagToNatural;
using jpeg::zigzag_rank;

/// The point-based view of a coefficient plane: 64 spatial maps, one per
/// frequency position; map 8u+v collects coefficient (u,v) of every block.
template <typename T>
struct coeff_maps_t {
    int block_rows = 0;
    int block_cols = 0;
    std::vector<grid<T>> maps;  // 64 entries, natural (8u+v) order

    bool operator==(const coeff_maps_t&) const = default;
};

using coefficient_maps = coeff_maps_t<double>;

template <typename T>
inline coeff_maps_t<T> to_maps(const grid<T>& plane) {
    require(plane.rows() % 8 == 0 && plane.cols() % 8 == 0 && !plane.empty(),
            errc::non_block_aligned, "coefficient plane not 8x8 aligned");
    coeff_maps_t<T> out;
    out.block_rows = plane.rows() / 8;
    out.block_cols = plane.cols() / 8;
    out.maps.assign(64, grid<T>(out.block_rows, out.block_cols));
    for (int br = 0; br < out.block_rows; ++br)
        for (int bc = 0; bc < out.block_cols; ++bc)
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v)
                    out.maps[8 * u + v](br, bc) = plane(8 * br + u, 8 * bc + v);
    return out;
}

template <typename T>
inline grid<T> from_maps(const coeff_maps_t<T>& m) {
    require(m.maps.size() == 64, errc::inconsistent_map_dims, "expected 64 coefficient maps");
    for (const grid<T>& g : m.maps)
        require(g.rows() == m.block_rows && g.cols() == m.block_cols, errc::inconsistent_map_dims,
                "coefficient map dims differ from block grid");
    require(m.block_rows > 0 && m.block_cols > 0, errc::inconsistent_map_dims, "empty map grid");
    grid<T> plane(8 * m.block_rows, 8 * m.block_cols);
    for (int br = 0; br < m.block_rows; ++br)
        for (int bc = 0; bc < m.block_cols; ++bc)
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v)
                    plane(8 * br + u, 8 * bc + v) = m.maps[8 * u + v](br, bc);
    return plane;
}

/// Frequency-compacted map stack: the retained maps in ascending zigzag-rank
/// order plus their natural-order indices.
template <typename T>
struct compacted_maps_t {
    int block_rows = 0;
    int block_cols = 0;
    std::vector<grid<T>> maps;
    std::vector<int> kept;  // natural (8u+v) indices, ascending zigzag rank
};

using compacted_maps = compacted_maps_t<double>;

/// Number of maps retained at alpha percent (round to nearest, at least 1).
inline int compaction_keep_count(double alpha_percent) {
    require(alpha_percent > 0 && alpha_percent <= 100, errc::bad_config,
            "compaction percentage must be in (0, 100]");
    const int k = static_cast<int>(std::lround(alpha_percent / 100.0 * 64.0));
    return std::max(k, 1);
}

/// Keep the lowest-frequency maps (smallest zigzag ranks) and drop the rest.
template <typename T>
inline compacted_maps_t<T> compact_maps(const coeff_maps_t<T>& m, double alpha_percent) {
    require(m.maps.size() == 64, errc::inconsistent_map_dims, "expected 64 coefficient maps");
    const int k = compaction_keep_count(alpha_percent);
    compacted_maps_t<T> out;
    out.block_rows = m.block_rows;
    out.block_cols = m.block_cols;
    for (int rank = 0; rank < k; ++rank) {
        const int natural = kZigzagToNatural[rank];
        out.maps.push_back(m.maps[natural]);
        out.kept.push_back(natural);
    }
    return out;
}

/// Restore a compacted stack to the full 64-map layout, zero-filling the
/// discarded frequency positions.
template <typename T>
inline coeff_maps_t<T> expand_maps(const compacted_maps_t<T>& c) {
    require(c.maps.size() == c.kept.size() && !c.kept.empty() && c.kept.size() <= 64,
            errc::index_mismatch, "kept-index list inconsistent with map stack");
    coeff_maps_t<T> out;
    out.block_rows = c.block_rows;
    out.block_cols = c.block_cols;
    out.maps.assign(64, grid<T>(c.block_rows, c.block_cols));
    std::vector<bool> seen(64, false);
    for (size_t i = 0; i < c.kept.size(); ++i) {
        const int natural = c.kept[i];
        require(natural >= 0 && natural < 64 && !seen[natural], errc::index_mismatch,
                "kept index out of range or duplicated");
        require(c.maps[i].rows() == c.block_rows && c.maps[i].cols() == c.block_cols,
                errc::inconsistent_map_dims, "compacted map dims differ from block grid");
        seen[natural] = true;
        out.maps[natural] = c.maps[i];
    }
    return out;
}

/// Pixelwise linear remix of a map stack: out[o] = sum_i weights(o, i) * in[i].
/// This is a 1x1 convolution across the stack; the runtime form of the
/// learnable compaction/expansion and of channel fusion.
inline std::vector<plane_f64> mix_maps(const std::vector<plane_f64>& stack, const matrix& weights) {
    require(!stack.empty(), errc::bad_config, "empty map stack");
    require(weights.cols() == static_cast<int>(stack.size()), errc::shape_mismatch,
            "mixing matrix columns must match stack size");
    for (const plane_f64& m : stack)
        require(m.same_shape(stack[0]), errc::inconsistent_map_dims, "map stack dims differ");
    std::vector<plane_f64> out(weights.rows(), plane_f64(stack[0].rows(), stack[0].cols(), 0.0));
    for (int o = 0; o < weights.rows(); ++o)
        for (int i = 0; i < weights.cols(); ++i) {
            const double w = weights(o, i);
            if (w == 0.0) continue;
            for (size_t p = 0; p < stack[0].size(); ++p)
                out[o].data()[p] += w * stack[i].data()[p];
        }
    return out;
}

/// Learnable-compaction output count: floor(alpha% * 64 * c_in).
inline int learnable_map_count(double alpha_percent, int c_in) {
    require(alpha_percent > 0 && alpha_percent <= 100 && c_in >= 1, errc::bad_config,
            "invalid compaction parameters");
    return static_cast<int>(alpha_percent / 100.0 * 64.0 * c_in);
}

/// Per-frequency MI/GC grids; positions whose map is constant are flagged
/// rather than given a value.
struct map_correlations {
    matrix mi{8, 8};
    matrix gc{8, 8};
    grid<uint8_t> zero_variance{8, 8};
};

inline map_correlations per_map_correlations(const coefficient_maps& m,
                                             const corr::spatial_weights& w = {}) {
    require(m.maps.size() == 64, errc::inconsistent_map_dims, "expected 64 coefficient maps");
    map_correlations out;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            const plane_f64& map = m.maps[8 * u + v];
            try {
                out.mi(u, v) = corr::morans_i(map, w);
                out.gc(u, v) = corr::gearys_c(map, w);
            } catch (const error& e) {
                if (e.code() != errc::zero_variance) throw;
                out.zero_variance(u, v) = 1;
            }
        }
    return out;
}

}  // namespace jpegdct::maps
