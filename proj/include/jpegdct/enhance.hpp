#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "coeff_maps.hpp"
#include "common.hpp"
#include "correlation.hpp"
#include "dct.hpp"
#include "jpeg/types.hpp"
#include "weights.hpp"

namespace jpegdct::enhance {

/// C x H x W stack of real-valued planes.
struct feature_tensor {
    std::vector<plane_f64> ch;

    feature_tensor() = default;
    explicit feature_tensor(std::vector<plane_f64> planes) : ch(std::move(planes)) { validate(); }

    int channels() const { return static_cast<int>(ch.size()); }
    int height() const { return ch.empty() ? 0 : ch[0].rows(); }
    int width() const { return ch.empty() ? 0 : ch[0].cols(); }

    void validate() const {
        require(!ch.empty(), errc::shape_mismatch, "feature tensor needs at least one channel");
        for (const plane_f64& p : ch)
            require(p.same_shape(ch[0]) && !p.empty(), errc::shape_mismatch,
                    "feature tensor channels must share dims");
    }
};

/// Weights of one block-based convolution: stride-8 non-overlapping 8x8
/// windows, C_in input channels, C_out output feature maps.
struct block_conv_params {
    int c_out = 0;
    int c_in = 0;
    std::vector<matrix> kernel;  // c_out * c_in entries of 8x8, index o * c_in + i
    std::vector<double> bias;    // c_out

    void validate() const {
        require(c_out >= 1 && c_in >= 1 &&
                    kernel.size() == static_cast<size_t>(c_out) * c_in &&
                    bias.size() == static_cast<size_t>(c_out),
                errc::shape_mismatch, "inconsistent block-conv params");
        for (const matrix& k : kernel)
            require(k.rows() == 8 && k.cols() == 8, errc::shape_mismatch,
                    "block-conv kernels must be 8x8");
    }
};

/// out[o](r,c) = bias[o] + sum_i sum_uv kernel[o][i](u,v) * x[i](8r+u, 8c+v).
inline feature_tensor block_conv(const feature_tensor& x, const block_conv_params& p) {
    x.validate();
    p.validate();
    require(x.channels() == p.c_in, errc::shape_mismatch, "block-conv input channel count");
    require(x.height() % 8 == 0 && x.width() % 8 == 0, errc::non_block_aligned,
            "block-conv input not 8x8 aligned");
    const int br = x.height() / 8, bc = x.width() / 8;
    feature_tensor out;
    out.ch.assign(p.c_out, plane_f64(br, bc));
    for (int o = 0; o < p.c_out; ++o)
        for (int r = 0; r < br; ++r)
            for (int c = 0; c < bc; ++c) {
                double acc = 0.0;
                for (int i = 0; i < p.c_in; ++i) {
                    const matrix& k = p.kernel[static_cast<size_t>(o) * p.c_in + i];
                    const plane_f64& plane = x.ch[i];
                    for (int u = 0; u < 8; ++u)
                        for (int v = 0; v < 8; ++v) acc += k(u, v) * plane(8 * r + u, 8 * c + v);
                }
                out.ch[o](r, c) = acc + p.bias[o];
            }
    return out;
}

/// Inverse-shaped counterpart of block_conv: at every block cell, map the C
/// feature channels to 64 values placed as that block's 8x8 coefficients.
/// `m` is 64 x C (row 8u+v), `bias` has 64 entries.
inline plane_f64 block_expand(const feature_tensor& feat, const matrix& m,
                              const std::vector<double>& bias) {
    feat.validate();
    require(m.rows() == 64 && m.cols() == feat.channels() && bias.size() == 64,
            errc::shape_mismatch, "block-expand weights must be 64 x channels (+64 bias)");
    plane_f64 out(8 * feat.height(), 8 * feat.width());
    for (int r = 0; r < feat.height(); ++r)
        for (int c = 0; c < feat.width(); ++c)
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    double acc = 0.0;
                    for (int i = 0; i < feat.channels(); ++i)
                        acc += m(8 * u + v, i) * feat.ch[i](r, c);
                    out(8 * r + u, 8 * c + v) = acc + bias[8 * u + v];
                }
    return out;
}

// Coefficients live in [-1024, 1024]; models see the standardized [-1, 1].
inline constexpr double kCoeffScale = 1024.0;

inline plane_f64 normalize_coeffs(const plane_f64& p) {
    plane_f64 out(p.rows(), p.cols());
    for (size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i] / kCoeffScale;
    return out;
}

inline plane_f64 denormalize_coeffs(const plane_f64& p) {
    plane_f64 out(p.rows(), p.cols());
    for (size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i] * kCoeffScale;
    return out;
}

/// Pluggable pixel-domain model: a pure map on feature tensors.
using inner_model = std::function<feature_tensor(const feature_tensor&)>;

inline feature_tensor identity_model(const feature_tensor& x) { return x; }

/// Tiny fixed reference model: per-channel 3x3 same-padded convolution added
/// as a small residual, with weights drawn from a seeded generator. Exists to
/// exercise shape and determinism contracts, not to enhance anything.
inline inner_model make_reference_model(uint32_t seed = 0x1234) {
    return [seed](const feature_tensor& x) {
        x.validate();
        feature_tensor out = x;
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (int i = 0; i < x.channels(); ++i) {
            double k[3][3];
            for (auto& row : k)
                for (double& v : row) v = 0.1 * dist(rng);
            const plane_f64& in = x.ch[i];
            for (int r = 0; r < in.rows(); ++r)
                for (int c = 0; c < in.cols(); ++c) {
                    double acc = 0.0;
                    for (int dr = -1; dr <= 1; ++dr)
                        for (int dc = -1; dc <= 1; ++dc) {
                            const int rr = r + dr, cc = c + dc;
                            if (rr >= 0 && rr < in.rows() && cc >= 0 && cc < in.cols())
                                acc += k[dr + 1][dc + 1] * in(rr, cc);
                        }
                    out.ch[i](r, c) += acc;
                }
        }
        return out;
    };
}

/// Linear kernel generator: global-average-pool each context plane, append
/// the flattened quantization matrix, and apply an affine map to produce a
/// flat parameter vector for the consuming site.
struct kernel_generator {
    matrix w;                  // out_params x (n_ctx + 64)
    std::vector<double> bias;  // out_params

    std::vector<double> generate(const std::vector<plane_f64>& ctx,
                                 const jpeg::quant_matrix& q) const {
        require(w.rows() == static_cast<int>(bias.size()), errc::shape_mismatch,
                "generator weight/bias rows differ");
        require(w.cols() == static_cast<int>(ctx.size()) + 64, errc::shape_mismatch,
                "generator input dim must be context-plane count + 64");
        std::vector<double> in;
        in.reserve(ctx.size() + 64);
        for (const plane_f64& p : ctx) {
            require(!p.empty(), errc::shape_mismatch, "empty context plane");
            double sum = 0;
            for (size_t i = 0; i < p.size(); ++i) sum += p.data()[i];
            in.push_back(sum / static_cast<double>(p.size()));
        }
        for (int i = 0; i < 64; ++i) in.push_back(q.values[i]);
        std::vector<double> out(bias);
        for (int o = 0; o < w.rows(); ++o)
            for (size_t i = 0; i < in.size(); ++i) out[o] += w(o, static_cast<int>(i)) * in[i];
        return out;
    }
};

/// Interpret a generated parameter vector as block-conv weights:
/// c_out*c_in 8x8 kernels (o-major, then i, row-major taps) followed by
/// c_out biases.
inline block_conv_params unpack_conv_params(const std::vector<double>& p, int c_out, int c_in) {
    require(p.size() == static_cast<size_t>(c_out) * c_in * 64 + c_out, errc::shape_mismatch,
            "generated parameter vector does not fit block-conv shape");
    block_conv_params out;
    out.c_out = c_out;
    out.c_in = c_in;
    size_t idx = 0;
    for (int o = 0; o < c_out; ++o)
        for (int i = 0; i < c_in; ++i) {
            matrix k(8, 8);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) k(u, v) = p[idx++];
            out.kernel.push_back(std::move(k));
        }
    out.bias.assign(p.begin() + idx, p.begin() + idx + c_out);
    return out;
}

struct expand_params {
    matrix m;                  // 64 x c_in
    std::vector<double> bias;  // 64
};

/// Interpret a generated parameter vector as block-expand weights: a 64 x
/// c_in matrix (row-major) followed by 64 biases.
inline expand_params unpack_expand_params(const std::vector<double>& p, int c_in) {
    require(p.size() == static_cast<size_t>(64) * c_in + 64, errc::shape_mismatch,
            "generated parameter vector does not fit block-expand shape");
    expand_params out;
    out.m = matrix(64, c_in);
    size_t idx = 0;
    for (int r = 0; r < 64; ++r)
        for (int c = 0; c < c_in; ++c) out.m(r, c) = p[idx++];
    out.bias.assign(p.begin() + idx, p.end());
    return out;
}

/// One enhancement module built on block-based convolution: analysis
/// block-conv into C_hid feature maps, pluggable pixel-domain model, then a
/// block-expand back to the coefficient layout. Both parameter sets come
/// from kernel generators conditioned on (context planes, quant matrix).
struct embc_weights {
    int c_hid = 0;
    kernel_generator analysis;   // emits block-conv params, c_out = c_hid, c_in = 1
    kernel_generator synthesis;  // emits block-expand params, c_in = c_hid

    static embc_weights load(const weight_bundle& w, const std::string& prefix, int n_ctx) {
        const weight_bundle::tensor& aw = w.get(prefix + ".analysis.weight");
        require(aw.shape.size() == 2 && aw.shape[0] % 65 == 0, errc::shape_mismatch,
                "'" + prefix + ".analysis.weight' rows must be 65 * c_hid");
        embc_weights e;
        e.c_hid = aw.shape[0] / 65;
        const int in_dim = n_ctx + 64;
        e.analysis.w = w.get_matrix(prefix + ".analysis.weight", 65 * e.c_hid, in_dim);
        e.analysis.bias = w.get_vector(prefix + ".analysis.bias", 65 * e.c_hid);
        e.synthesis.w = w.get_matrix(prefix + ".synthesis.weight", 64 * (e.c_hid + 1), in_dim);
        e.synthesis.bias = w.get_vector(prefix + ".synthesis.bias", 64 * (e.c_hid + 1));
        return e;
    }
};

inline plane_f64 embc_forward(const plane_f64& x, const std::vector<plane_f64>& ctx,
                              const jpeg::quant_matrix& q, const embc_weights& ew,
                              const inner_model& inner) {
    const block_conv_params analysis = unpack_conv_params(ew.analysis.generate(ctx, q), ew.c_hid, 1);
    feature_tensor feat = block_conv(feature_tensor({x}), analysis);
    feat = inner(feat);
    feat.validate();
    require(feat.channels() == ew.c_hid && feat.height() == x.rows() / 8 &&
                feat.width() == x.cols() / 8,
            errc::shape_mismatch, "inner model changed feature dims");
    const expand_params synthesis = unpack_expand_params(ew.synthesis.generate(ctx, q), ew.c_hid);
    return block_expand(feat, synthesis.m, synthesis.bias);
}

enum class compaction_strategy { non_learnable, learnable };

/// Frequency compaction plan for the map-based module. The learnable variant
/// carries runtime linear maps (no training here): compact_w mixes the
/// 64*C input maps down, expand_w mixes back up.
struct compaction_spec {
    double alpha_percent = 100.0;
    compaction_strategy strategy = compaction_strategy::non_learnable;
    matrix compact_w;  // learnable: floor(alpha% * 64 * C) x 64*C
    matrix expand_w;   // learnable: 64*C x floor(alpha% * 64 * C)
};

/// One enhancement module built on coefficient maps: per-channel map
/// extraction, frequency compaction, pluggable model over the map stack,
/// expansion, and reassembly.
inline feature_tensor empc_forward(const feature_tensor& x, const compaction_spec& spec,
                                   const inner_model& inner) {
    x.validate();
    const int c = x.channels();
    std::vector<maps::coefficient_maps> per_ch;
    per_ch.reserve(c);
    for (const plane_f64& p : x.ch) per_ch.push_back(maps::to_maps(p));

    feature_tensor out;
    if (spec.strategy == compaction_strategy::non_learnable) {
        std::vector<maps::compacted_maps> compacted;
        std::vector<plane_f64> stack;
        for (const maps::coefficient_maps& m : per_ch) {
            compacted.push_back(maps::compact_maps(m, spec.alpha_percent));
            for (const plane_f64& map : compacted.back().maps) stack.push_back(map);
        }
        const int per_channel = static_cast<int>(compacted[0].maps.size());
        feature_tensor ft(std::move(stack));
        ft = inner(ft);
        ft.validate();
        require(ft.channels() == per_channel * c &&
                    ft.height() == per_ch[0].block_rows && ft.width() == per_ch[0].block_cols,
                errc::shape_mismatch, "inner model changed map-stack dims");
        for (int i = 0; i < c; ++i) {
            maps::compacted_maps cm = std::move(compacted[i]);
            cm.maps.assign(ft.ch.begin() + static_cast<size_t>(i) * per_channel,
                           ft.ch.begin() + static_cast<size_t>(i + 1) * per_channel);
            out.ch.push_back(maps::from_maps(maps::expand_maps(cm)));
        }
        return out;
    }

    // learnable: mix all 64*C maps down, run the model, mix back up
    std::vector<plane_f64> stack;
    for (const maps::coefficient_maps& m : per_ch)
        for (const plane_f64& map : m.maps) stack.push_back(map);
    const int k = maps::learnable_map_count(spec.alpha_percent, c);
    require(spec.compact_w.rows() == k && spec.compact_w.cols() == 64 * c, errc::shape_mismatch,
            "learnable compaction matrix shape");
    require(spec.expand_w.rows() == 64 * c && spec.expand_w.cols() == k, errc::shape_mismatch,
            "learnable expansion matrix shape");
    feature_tensor ft(maps::mix_maps(stack, spec.compact_w));
    ft = inner(ft);
    ft.validate();
    require(ft.channels() == k && ft.height() == per_ch[0].block_rows &&
                ft.width() == per_ch[0].block_cols,
            errc::shape_mismatch, "inner model changed map-stack dims");
    const std::vector<plane_f64> restored = maps::mix_maps(ft.ch, spec.expand_w);
    for (int i = 0; i < c; ++i) {
        maps::coefficient_maps m;
        m.block_rows = per_ch[i].block_rows;
        m.block_cols = per_ch[i].block_cols;
        m.maps.assign(restored.begin() + static_cast<size_t>(i) * 64,
                      restored.begin() + static_cast<size_t>(i + 1) * 64);
        out.ch.push_back(maps::from_maps(m));
    }
    return out;
}

/// Fusion: concatenate module outputs along channels and apply a 1x1 linear
/// map + bias. `weights` is C_out x (total input channels).
inline feature_tensor fuse(const std::vector<feature_tensor>& features, const matrix& weights,
                           const std::vector<double>& bias) {
    require(!features.empty(), errc::shape_mismatch, "fusion needs at least one input");
    std::vector<plane_f64> stack;
    for (const feature_tensor& f : features) {
        f.validate();
        require(f.height() == features[0].height() && f.width() == features[0].width(),
                errc::shape_mismatch, "fusion inputs must share dims");
        for (const plane_f64& p : f.ch) stack.push_back(p);
    }
    require(weights.rows() == static_cast<int>(bias.size()), errc::shape_mismatch,
            "fusion weight/bias rows differ");
    std::vector<plane_f64> mixed = maps::mix_maps(stack, weights);
    for (int o = 0; o < weights.rows(); ++o)
        for (size_t i = 0; i < mixed[o].size(); ++i) mixed[o].data()[i] += bias[o];
    return feature_tensor(std::move(mixed));
}

/// Mean L1 distance over the coefficient planes: sum of |enh - gt| divided
/// by (channel count * H * W). Channels must share dims.
inline double dct_l1_loss(const std::vector<plane_f64>& enh, const std::vector<plane_f64>& gt) {
    require(!enh.empty() && enh.size() == gt.size(), errc::shape_mismatch,
            "loss needs matching channel sets");
    double total = 0;
    for (size_t c = 0; c < enh.size(); ++c) {
        require(enh[c].same_shape(gt[c]) && enh[c].same_shape(enh[0]) && !enh[c].empty(),
                errc::shape_mismatch, "loss planes must share dims");
        for (size_t i = 0; i < enh[c].size(); ++i) total += std::abs(enh[c].data()[i] - gt[c].data()[i]);
    }
    return total / (static_cast<double>(enh.size()) * enh[0].rows() * enh[0].cols());
}

}  // namespace jpegdct::enhance
