#pragma once

#include <string>
#include <vector>

#include "dct.hpp"
#include "enhance.hpp"
#include "jpeg/pixels.hpp"
#include "jpeg/types.hpp"
#include "weights.hpp"

namespace jpegdct::enhance {

struct pipeline_options {
    int embc_count = 2;
    double alpha_percent = 100.0;
    compaction_strategy strategy = compaction_strategy::non_learnable;
};

namespace detail {

/// Run every module of one stage over a channel set and fuse the results.
/// EMBC weights are shared across channels; each channel conditions its
/// kernel generators on its own quant matrix. The map-based module sees all
/// channels jointly. Fusion input order is module-major, channel-minor.
inline feature_tensor run_stage(const std::string& stage, const std::vector<plane_f64>& chans,
                                const std::vector<plane_f64>& ctx,
                                const std::vector<const jpeg::quant_matrix*>& qs,
                                const weight_bundle& w, const inner_model& inner,
                                const pipeline_options& opt) {
    require(opt.embc_count >= 1, errc::bad_config, "need at least one block-based module");
    const int n_ch = static_cast<int>(chans.size());
    std::vector<feature_tensor> outs;
    for (int k = 0; k < opt.embc_count; ++k) {
        const embc_weights ew = embc_weights::load(w, stage + ".embc" + std::to_string(k),
                                                   static_cast<int>(ctx.size()));
        feature_tensor ft;
        for (int c = 0; c < n_ch; ++c) ft.ch.push_back(embc_forward(chans[c], ctx, *qs[c], ew, inner));
        outs.push_back(std::move(ft));
    }
    compaction_spec cs;
    cs.alpha_percent = opt.alpha_percent;
    cs.strategy = opt.strategy;
    if (opt.strategy == compaction_strategy::learnable) {
        const int k = maps::learnable_map_count(opt.alpha_percent, n_ch);
        cs.compact_w = w.get_matrix(stage + ".empc.compact.weight", k, 64 * n_ch);
        cs.expand_w = w.get_matrix(stage + ".empc.expand.weight", 64 * n_ch, k);
    }
    outs.push_back(empc_forward(feature_tensor(chans), cs, inner));

    const int total_in = n_ch * (opt.embc_count + 1);
    const matrix fw = w.get_matrix(stage + ".fuse.weight", n_ch, total_in);
    const std::vector<double> fb = w.get_vector(stage + ".fuse.bias", n_ch);
    return fuse(outs, fw, fb);
}

}  // namespace detail

/// Two-stage coefficient enhancement. Stage 1 enhances the luma plane with
/// the chroma planes (lifted to luma resolution when subsampled) and Q_Y as
/// generator context; stage 2 enhances both chroma planes with the
/// stage-1-enhanced luma and Q_C as context. Grayscale images run stage 1
/// only, conditioned on Q_Y alone. The result is re-quantized with the
/// file's own tables so it can be re-encoded directly.
inline jpeg::compressed_image enhance_pipeline(const jpeg::compressed_image& img,
                                               const weight_bundle& w, const inner_model& inner,
                                               const pipeline_options& opt = {}) {
    img.validate();
    jpeg::compressed_image out = img;

    const plane_f64 y = normalize_coeffs(jpeg::dequantize(img.planes[0], img.qtables[0]));
    std::vector<plane_f64> ctx1;
    if (img.channels() == 3)
        for (int c = 1; c <= 2; ++c) {
            plane_f64 deq = jpeg::dequantize(img.planes[c], img.qtables[c]);
            if (img.sampling == jpeg::sampling_kind::s420) deq = dct::upsample_chroma_plane(deq);
            ctx1.push_back(normalize_coeffs(deq));
        }
    const feature_tensor fused1 =
        detail::run_stage("stage1", {y}, ctx1, {&img.qtables[0]}, w, inner, opt);
    out.planes[0] = jpeg::quantize(denormalize_coeffs(fused1.ch[0]), img.qtables[0]);

    if (img.channels() == 3) {
        const std::vector<plane_f64> chroma = {
            normalize_coeffs(jpeg::dequantize(img.planes[1], img.qtables[1])),
            normalize_coeffs(jpeg::dequantize(img.planes[2], img.qtables[2]))};
        // stage 2 sees the luma exactly as a decoder of the output would
        const std::vector<plane_f64> ctx2 = {
            normalize_coeffs(jpeg::dequantize(out.planes[0], img.qtables[0]))};
        const feature_tensor fused2 = detail::run_stage(
            "stage2", chroma, ctx2, {&img.qtables[1], &img.qtables[2]}, w, inner, opt);
        out.planes[1] = jpeg::quantize(denormalize_coeffs(fused2.ch[0]), img.qtables[1]);
        out.planes[2] = jpeg::quantize(denormalize_coeffs(fused2.ch[1]), img.qtables[2]);
    }
    out.validate();
    return out;
}

/// Weight bundle under which the whole pipeline is the identity map (up to
/// requantization): analysis kernels perform the blockwise inverse
/// transform, synthesis performs the forward transform, generator weights
/// are zero (parameters live entirely in the generator bias), and fusion
/// averages the identical module outputs. Hidden width is fixed at 64 — the
/// one width where the transform pair is exactly invertible.
inline weight_bundle make_identity_bundle(int embc_count = 2, bool grayscale = false) {
    require(embc_count >= 1, errc::bad_config, "need at least one block-based module");
    const matrix& t8 = dct::cached_dct_basis(8);

    // packed block-conv params: 64 filters x 1 input x 8x8 taps, then biases
    std::vector<double> analysis(static_cast<size_t>(64) * 64 + 64, 0.0);
    size_t idx = 0;
    for (int o = 0; o < 64; ++o) {
        const int i = o / 8, j = o % 8;
        for (int u = 0; u < 8; ++u)
            for (int v = 0; v < 8; ++v) analysis[idx++] = t8(u, i) * t8(v, j);
    }
    // packed block-expand params: 64x64 matrix (row 8u+v, col 8i+j), then biases
    std::vector<double> synthesis(static_cast<size_t>(64) * 64 + 64, 0.0);
    idx = 0;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v)
            for (int i = 0; i < 8; ++i)
                for (int j = 0; j < 8; ++j) synthesis[idx++] = t8(u, i) * t8(v, j);

    weight_bundle w;
    auto put_stage = [&](const std::string& stage, int n_ctx, int n_ch) {
        const int in_dim = n_ctx + 64;
        for (int k = 0; k < embc_count; ++k) {
            const std::string p = stage + ".embc" + std::to_string(k);
            w.put(p + ".analysis.weight", {65 * 64, in_dim},
                  std::vector<double>(static_cast<size_t>(65) * 64 * in_dim, 0.0));
            w.put(p + ".analysis.bias", {65 * 64}, analysis);
            w.put(p + ".synthesis.weight", {64 * 65, in_dim},
                  std::vector<double>(static_cast<size_t>(64) * 65 * in_dim, 0.0));
            w.put(p + ".synthesis.bias", {64 * 65}, synthesis);
        }
        const int total_in = n_ch * (embc_count + 1);
        matrix fw(n_ch, total_in, 0.0);
        for (int m = 0; m <= embc_count; ++m)
            for (int c = 0; c < n_ch; ++c) fw(c, m * n_ch + c) = 1.0 / (embc_count + 1);
        w.put_matrix(stage + ".fuse.weight", fw);
        w.put(stage + ".fuse.bias", {n_ch}, std::vector<double>(n_ch, 0.0));
    };
    put_stage("stage1", grayscale ? 0 : 2, 1);
    if (!grayscale) put_stage("stage2", 1, 2);
    return w;
}

}  // namespace jpegdct::enhance
