// Two-stage enhancement pipeline: identity-weight idempotence for every
// sampling layout, bit-level determinism, bundle serialization, and the
// weight-loading contracts.

#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <random>
#include <string>

#include <jpegdct/jpeg/encode.hpp>
#include <jpegdct/jpeg/tables.hpp>
#include <jpegdct/pipeline.hpp>
#include <jpegdct/weights.hpp>

#include "testing.hpp"

using namespace jpegdct;
using enhance::weight_bundle;

namespace {

std::mt19937& rng() {
    static std::mt19937 g(0x91e1);
    return g;
}

plane_i32 random_coeff_plane(int blocks_high, int blocks_wide) {
    plane_i32 p(8 * blocks_high, 8 * blocks_wide, 0);
    std::uniform_int_distribution<int> dc(-600, 600);
    std::uniform_int_distribution<int> ac(-40, 40);
    std::uniform_int_distribution<int> keep(0, 99);
    for (int br = 0; br < blocks_high; ++br)
        for (int bc = 0; bc < blocks_wide; ++bc) {
            p(8 * br, 8 * bc) = dc(rng());
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v)
                    if ((u || v) && keep(rng()) < 30) p(8 * br + u, 8 * bc + v) = ac(rng());
        }
    return p;
}

jpeg::compressed_image synthetic_image(jpeg::sampling_kind kind, int width, int height,
                                       int quality) {
    jpeg::compressed_image img;
    img.sampling = kind;
    img.width = width;
    img.height = height;
    const int ncomp = jpeg::component_count(kind);
    for (int c = 0; c < ncomp; ++c) {
        int bw, bh;
        jpeg::component_block_dims(kind, c, width, height, bw, bh);
        img.planes.push_back(random_coeff_plane(bh, bw));
        img.qtables.push_back(c == 0 ? jpeg::luma_quant_table(quality)
                                     : jpeg::chroma_quant_table(quality));
    }
    img.validate();
    return img;
}

// Largest |difference| in quantized coefficient steps, across all planes.
int max_coeff_step(const jpeg::compressed_image& a, const jpeg::compressed_image& b) {
    int worst = 0;
    for (int c = 0; c < a.channels(); ++c)
        for (size_t i = 0; i < a.planes[c].size(); ++i) {
            const int d = std::abs(a.planes[c].data()[i] - b.planes[c].data()[i]);
            if (d > worst) worst = d;
        }
    return worst;
}

}  // namespace

TEST_CASE("identity weights leave every layout within one quantization step") {
    const weight_bundle w = enhance::make_identity_bundle();
    for (auto kind : {jpeg::sampling_kind::grayscale, jpeg::sampling_kind::s444,
                      jpeg::sampling_kind::s420}) {
        const weight_bundle& bundle =
            kind == jpeg::sampling_kind::grayscale
                ? enhance::make_identity_bundle(2, true)
                : w;
        const jpeg::compressed_image img = synthetic_image(kind, 64, 48, 50);
        const jpeg::compressed_image out =
            enhance::enhance_pipeline(img, bundle, enhance::identity_model);
        CHECK(out.sampling == img.sampling);
        CHECK(out.width == img.width);
        CHECK(out.height == img.height);
        CHECK(max_coeff_step(out, img) <= 1);
    }
}

TEST_CASE("identity run is itself idempotent") {
    const weight_bundle w = enhance::make_identity_bundle();
    const jpeg::compressed_image img = synthetic_image(jpeg::sampling_kind::s420, 80, 64, 35);
    const jpeg::compressed_image once = enhance::enhance_pipeline(img, w, enhance::identity_model);
    const jpeg::compressed_image twice =
        enhance::enhance_pipeline(once, w, enhance::identity_model);
    CHECK(max_coeff_step(twice, once) <= 1);
}

TEST_CASE("pipeline output is bit-identical across runs") {
    const weight_bundle w = enhance::make_identity_bundle();
    const enhance::inner_model model = enhance::make_reference_model();
    const jpeg::compressed_image img = synthetic_image(jpeg::sampling_kind::s444, 48, 48, 60);

    const jpeg::compressed_image a = enhance::enhance_pipeline(img, w, model);
    const jpeg::compressed_image b = enhance::enhance_pipeline(img, w, model);
    CHECK(a == b);
}

TEST_CASE("learnable compaction option threads through the pipeline") {
    weight_bundle w = enhance::make_identity_bundle();
    // Identity mixing matrices for both stages at full retention.
    w.put_matrix("stage1.empc.compact.weight", identity(64));
    w.put_matrix("stage1.empc.expand.weight", identity(64));
    w.put_matrix("stage2.empc.compact.weight", identity(128));
    w.put_matrix("stage2.empc.expand.weight", identity(128));

    enhance::pipeline_options opt;
    opt.strategy = enhance::compaction_strategy::learnable;
    const jpeg::compressed_image img = synthetic_image(jpeg::sampling_kind::s420, 64, 48, 50);
    const jpeg::compressed_image out =
        enhance::enhance_pipeline(img, w, enhance::identity_model, opt);
    CHECK(max_coeff_step(out, img) <= 1);

    // Dropping one mixing matrix is a missing-weights error.
    w.tensors.erase("stage2.empc.expand.weight");
    CHECK_THROWS_MATCHES(enhance::enhance_pipeline(img, w, enhance::identity_model, opt), error,
                         error_code(errc::missing_weights));
}

TEST_CASE("bundles survive a JSON round trip") {
    const weight_bundle w = enhance::make_identity_bundle(1, true);
    const std::string path = "test_bundle_roundtrip.json";
    w.save(path);
    const weight_bundle back = weight_bundle::load(path);
    std::remove(path.c_str());

    REQUIRE(back.tensors.size() == w.tensors.size());
    for (const auto& [name, t] : w.tensors) {
        REQUIRE(back.has(name));
        const auto& bt = back.get(name);
        CHECK(bt.shape == t.shape);
        CHECK(bt.data == t.data);
    }

    // Rejection paths: bad JSON, bad tensor entries.
    CHECK_THROWS_MATCHES(weight_bundle::load("does_not_exist.json"), error,
                         error_code(errc::not_found));
    CHECK_THROWS_MATCHES(weight_bundle::from_json(nlohmann::json::array()), error,
                         error_code(errc::bad_format));
    CHECK_THROWS_MATCHES(
        weight_bundle::from_json({{"t", {{"shape", {2, 2}}, {"data", {1.0, 2.0}}}}}), error,
        error_code(errc::bad_format));
    CHECK_THROWS_MATCHES(
        weight_bundle::from_json({{"t", {{"shape", {0}}, {"data", nlohmann::json::array()}}}}),
        error, error_code(errc::bad_format));
}

TEST_CASE("missing or misshapen tensors fail with the right codes") {
    weight_bundle w = enhance::make_identity_bundle(1);
    const jpeg::compressed_image img = synthetic_image(jpeg::sampling_kind::s444, 32, 32, 50);
    enhance::pipeline_options opt;
    opt.embc_count = 1;

    // Complete bundle works.
    enhance::enhance_pipeline(img, w, enhance::identity_model, opt);

    weight_bundle missing = w;
    missing.tensors.erase("stage2.fuse.bias");
    CHECK_THROWS_MATCHES(enhance::enhance_pipeline(img, missing, enhance::identity_model, opt),
                         error, error_code(errc::missing_weights));

    weight_bundle misshapen = w;
    misshapen.put("stage1.fuse.bias", {2}, {0.0, 0.0});
    CHECK_THROWS_MATCHES(enhance::enhance_pipeline(img, misshapen, enhance::identity_model, opt),
                         error, error_code(errc::shape_mismatch));

    // Analysis rows not divisible by 65 cannot define a hidden width.
    weight_bundle badrows = w;
    badrows.put("stage1.embc0.analysis.weight", {64, 66},
                std::vector<double>(static_cast<size_t>(64) * 66, 0.0));
    CHECK_THROWS_MATCHES(enhance::enhance_pipeline(img, badrows, enhance::identity_model, opt),
                         error, error_code(errc::shape_mismatch));
}

TEST_CASE("generator conditioning feeds quantization tables through") {
    // Make the stage-1 analysis DC bias depend on q(0,0): identical inputs
    // under different tables must then produce different outputs.
    weight_bundle w = enhance::make_identity_bundle(1, true);
    auto& t = w.tensors.at("stage1.embc0.analysis.weight");
    // Row 0 is the first tap of the first analysis kernel; column layout is
    // [context means (none here)] ++ [64 quant entries].
    t.data[0] = 1e-4;

    jpeg::compressed_image img = synthetic_image(jpeg::sampling_kind::grayscale, 32, 32, 50);
    enhance::pipeline_options opt;
    opt.embc_count = 1;
    const jpeg::compressed_image a = enhance::enhance_pipeline(img, w, enhance::identity_model, opt);

    jpeg::compressed_image img2 = img;
    img2.qtables[0] = jpeg::luma_quant_table(10);
    const jpeg::compressed_image b =
        enhance::enhance_pipeline(img2, w, enhance::identity_model, opt);
    CHECK(a.planes[0] != b.planes[0]);
}
