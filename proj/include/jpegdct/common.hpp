#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace jpegdct {

enum class errc {
    unsupported_marker,
    unsupported_sampling,
    truncated_stream,
    invalid_huffman_code,
    missing_table,
    range_overflow,
    zero_variance,
    shape_mismatch,
    non_block_aligned,
    out_of_bounds,
    index_mismatch,
    inconsistent_map_dims,
    missing_weights,
    empty_dataset,
    not_found,
    no_trials,
    too_small,
    bad_format,
    bad_config,
};

inline const char* errc_name(errc c) {
    switch (c) {
        case errc::unsupported_marker: return "unsupported_marker";
        case errc::unsupported_sampling: return "unsupported_sampling";
        case errc::truncated_stream: return "truncated_stream";
        case errc::invalid_huffman_code: return "invalid_huffman_code";
        case errc::missing_table: return "missing_table";
        case errc::range_overflow: return "range_overflow";
        case errc::zero_variance: return "zero_variance";
        case errc::shape_mismatch: return "shape_mismatch";
        case errc::non_block_aligned: return "non_block_aligned";
        case errc::out_of_bounds: return "out_of_bounds";
        case errc::index_mismatch: return "index_mismatch";
        case errc::inconsistent_map_dims: return "inconsistent_map_dims";
        case errc::missing_weights: return "missing_weights";
        case errc::empty_dataset: return "empty_dataset";
        case errc::not_found: return "not_found";
        case errc::no_trials: return "no_trials";
        case errc::too_small: return "too_small";
        case errc::bad_format: return "bad_format";
        case errc::bad_config: return "bad_config";
    }
    return "unknown";
}

class error : public std::runtime_error {
public:
    error(errc code, const std::string& msg)
        : std::runtime_error(std::string(errc_name(code)) + ": " + msg), code_(code) {}

    errc code() const noexcept { return code_; }

private:
    errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& msg) { throw error(code, msg); }

inline void require(bool ok, errc code, const std::string& msg) {
    if (!ok) fail(code, msg);
}

/// Dense row-major 2-D array. Doubles as a small matrix, an image plane and a
/// scalar field; (r, c) indexing with r in [0, rows), c in [0, cols).
template <typename T>
class grid {
public:
    grid() = default;
    grid(int rows, int cols, T fill = T{})
        : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, fill) {
        require(rows >= 0 && cols >= 0, errc::bad_format, "negative grid dims");
    }

    int rows() const noexcept { return rows_; }
    int cols() const noexcept { return cols_; }
    size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    T& operator()(int r, int c) { return data_[static_cast<size_t>(r) * cols_ + c]; }
    const T& operator()(int r, int c) const { return data_[static_cast<size_t>(r) * cols_ + c]; }

    T* row(int r) { return data_.data() + static_cast<size_t>(r) * cols_; }
    const T* row(int r) const { return data_.data() + static_cast<size_t>(r) * cols_; }

    T* data() noexcept { return data_.data(); }
    const T* data() const noexcept { return data_.data(); }

    bool same_shape(const grid& o) const noexcept { return rows_ == o.rows_ && cols_ == o.cols_; }

    bool operator==(const grid& o) const { return rows_ == o.rows_ && cols_ == o.cols_ && data_ == o.data_; }

    template <typename U>
    grid<U> cast() const {
        grid<U> out(rows_, cols_);
        for (size_t i = 0; i < data_.size(); ++i) out.data()[i] = static_cast<U>(data_[i]);
        return out;
    }

    grid view_copy(int r0, int c0, int nrows, int ncols) const {
        require(r0 >= 0 && c0 >= 0 && r0 + nrows <= rows_ && c0 + ncols <= cols_,
                errc::out_of_bounds, "sub-grid outside parent");
        grid out(nrows, ncols);
        for (int r = 0; r < nrows; ++r)
            for (int c = 0; c < ncols; ++c) out(r, c) = (*this)(r0 + r, c0 + c);
        return out;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<T> data_;
};

using matrix = grid<double>;
using plane_i32 = grid<int32_t>;
using plane_f64 = grid<double>;
using plane_u8 = grid<uint8_t>;

inline matrix matmul(const matrix& a, const matrix& b) {
    require(a.cols() == b.rows(), errc::shape_mismatch, "matmul inner dims");
    matrix out(a.rows(), b.cols(), 0.0);
    for (int i = 0; i < a.rows(); ++i)
        for (int k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            if (aik == 0.0) continue;
            for (int j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
        }
    return out;
}

inline matrix transpose(const matrix& a) {
    matrix out(a.cols(), a.rows());
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
    return out;
}

inline matrix identity(int n) {
    matrix out(n, n, 0.0);
    for (int i = 0; i < n; ++i) out(i, i) = 1.0;
    return out;
}

inline double max_abs_diff(const matrix& a, const matrix& b) {
    require(a.same_shape(b), errc::shape_mismatch, "max_abs_diff shapes");
    double m = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double d = a.data()[i] - b.data()[i];
        if (d < 0) d = -d;
        if (d > m) m = d;
    }
    return m;
}

/// round-half-away-from-zero to the nearest integer (-1.5 -> -2, 1.5 -> 2)
inline int32_t round_half_away(double x) {
    return static_cast<int32_t>(x >= 0.0 ? x + 0.5 : x - 0.5);
}

inline uint8_t clamp_u8(double x) {
    int32_t v = round_half_away(x);
    if (v < 0) v = 0;
    if (v > 255) v = 255;
    return static_cast<uint8_t>(v);
}

}  // namespace jpegdct
