// Coefficient-map view of a block plane: plane <-> 64-map conversion,
// zigzag-ordered frequency compaction, stack mixing, and the per-frequency
// correlation grids.

#include <catch2/catch_amalgamated.hpp>

#include <random>

#include <jpegdct/coeff_maps.hpp>

#include "testing.hpp"

using namespace jpegdct;

namespace {

std::mt19937& rng() {
    static std::mt19937 g(0x3a95);
    return g;
}

plane_f64 random_plane(int rows, int cols) {
    std::uniform_real_distribution<double> dist(-512.0, 512.0);
    plane_f64 p(rows, cols);
    for (size_t i = 0; i < p.size(); ++i) p.data()[i] = dist(rng());
    return p;
}

}  // namespace

TEST_CASE("single-block plane becomes 64 one-cell maps") {
    plane_f64 plane(8, 8);
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) plane(u, v) = 10.0 * u + v;

    const auto m = maps::to_maps(plane);
    REQUIRE(m.block_rows == 1);
    REQUIRE(m.block_cols == 1);
    REQUIRE(m.maps.size() == 64);
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) {
            REQUIRE(m.maps[8 * u + v].rows() == 1);
            CHECK(m.maps[8 * u + v](0, 0) == 10.0 * u + v);
        }
}

TEST_CASE("DC map collects the (0,0) coefficient of every block") {
    // Two blocks side by side with DC values 5 and 7.
    plane_f64 plane(8, 16, 0.0);
    plane(0, 0) = 5;
    plane(0, 8) = 7;
    const auto m = maps::to_maps(plane);
    REQUIRE(m.maps[0].rows() == 1);
    REQUIRE(m.maps[0].cols() == 2);
    CHECK(m.maps[0](0, 0) == 5);
    CHECK(m.maps[0](0, 1) == 7);
    for (int i = 1; i < 64; ++i) CHECK(m.maps[i](0, 0) == 0);
}

TEST_CASE("plane -> maps -> plane is exact") {
    const plane_f64 plane = random_plane(32, 32);
    CHECK(max_abs_diff(maps::from_maps(maps::to_maps(plane)), plane) == 0.0);

    // Integer planes take the same template path.
    plane_i32 ip(16, 24);
    std::uniform_int_distribution<int> coeff(-1024, 1024);
    for (size_t i = 0; i < ip.size(); ++i) ip.data()[i] = coeff(rng());
    const grid<int32_t> back = maps::from_maps(maps::to_maps(ip));
    REQUIRE(back.same_shape(ip));
    for (size_t i = 0; i < ip.size(); ++i) CHECK(back.data()[i] == ip.data()[i]);
}

TEST_CASE("misshapen inputs are rejected") {
    CHECK_THROWS_MATCHES(maps::to_maps(plane_f64(12, 16, 0.0)), error,
                         error_code(errc::non_block_aligned));
    CHECK_THROWS_MATCHES(maps::to_maps(plane_f64()), error, error_code(errc::non_block_aligned));

    maps::coefficient_maps m = maps::to_maps(plane_f64(8, 8, 0.0));
    m.maps.pop_back();
    CHECK_THROWS_MATCHES(maps::from_maps(m), error, error_code(errc::inconsistent_map_dims));

    m = maps::to_maps(plane_f64(8, 8, 0.0));
    m.maps[5] = plane_f64(2, 2, 0.0);
    CHECK_THROWS_MATCHES(maps::from_maps(m), error, error_code(errc::inconsistent_map_dims));
}

TEST_CASE("keep count rounds to nearest and never hits zero") {
    CHECK(maps::compaction_keep_count(100.0) == 64);
    CHECK(maps::compaction_keep_count(50.0) == 32);
    CHECK(maps::compaction_keep_count(25.0) == 16);
    CHECK(maps::compaction_keep_count(1.5625) == 1);   // exactly one map
    CHECK(maps::compaction_keep_count(0.1) == 1);      // rounds to 0, clamped up
    CHECK(maps::compaction_keep_count(2.35) == 2);     // 1.504 rounds to 2
    CHECK_THROWS_MATCHES(maps::compaction_keep_count(0.0), error, error_code(errc::bad_config));
    CHECK_THROWS_MATCHES(maps::compaction_keep_count(100.5), error, error_code(errc::bad_config));
}

TEST_CASE("compaction keeps ascending zigzag ranks") {
    const plane_f64 plane = random_plane(24, 16);
    const auto m = maps::to_maps(plane);

    const auto c = maps::compact_maps(m, 12.5);  // 8 maps
    REQUIRE(c.kept.size() == 8);
    // First zigzag positions in natural (8u+v) indexing.
    const int want[] = {0, 1, 8, 16, 9, 2, 3, 10};
    for (int i = 0; i < 8; ++i) {
        CHECK(c.kept[i] == want[i]);
        CHECK(c.maps[i] == m.maps[want[i]]);
    }

    // Full retention preserves everything and expansion is the identity.
    const auto full = maps::compact_maps(m, 100.0);
    REQUIRE(full.kept.size() == 64);
    CHECK(maps::expand_maps(full) == m);

    // DC-only: every AC position zero-fills on expansion.
    const auto dc = maps::compact_maps(m, 1.5625);
    REQUIRE(dc.kept.size() == 1);
    CHECK(dc.kept[0] == 0);
    const auto back = maps::expand_maps(dc);
    CHECK(back.maps[0] == m.maps[0]);
    for (int i = 1; i < 64; ++i)
        CHECK(back.maps[i] == plane_f64(m.block_rows, m.block_cols, 0.0));
}

TEST_CASE("expansion validates the kept-index list") {
    const auto m = maps::to_maps(random_plane(8, 8));
    auto c = maps::compact_maps(m, 6.25);  // 4 maps

    auto bad = c;
    bad.kept[1] = 64;
    CHECK_THROWS_MATCHES(maps::expand_maps(bad), error, error_code(errc::index_mismatch));

    bad = c;
    bad.kept[1] = bad.kept[0];
    CHECK_THROWS_MATCHES(maps::expand_maps(bad), error, error_code(errc::index_mismatch));

    bad = c;
    bad.kept.clear();
    bad.maps.clear();
    CHECK_THROWS_MATCHES(maps::expand_maps(bad), error, error_code(errc::index_mismatch));

    bad = c;
    bad.maps[2] = plane_f64(5, 5, 0.0);
    CHECK_THROWS_MATCHES(maps::expand_maps(bad), error, error_code(errc::inconsistent_map_dims));
}

TEST_CASE("stack mixing matches a direct weighted sum") {
    std::vector<plane_f64> stack;
    for (int i = 0; i < 5; ++i) stack.push_back(random_plane(6, 9));
    matrix w(3, 5);
    std::uniform_real_distribution<double> wdist(-2.0, 2.0);
    for (size_t i = 0; i < w.size(); ++i) w.data()[i] = wdist(rng());
    w(1, 2) = 0.0;  // exercise the zero-weight skip

    const auto out = maps::mix_maps(stack, w);
    REQUIRE(out.size() == 3);
    for (int o = 0; o < 3; ++o) {
        REQUIRE(out[o].same_shape(stack[0]));
        for (int r = 0; r < 6; ++r)
            for (int c = 0; c < 9; ++c) {
                double want = 0;
                for (int i = 0; i < 5; ++i) want += w(o, i) * stack[i](r, c);
                CHECK(out[o](r, c) == Catch::Approx(want).margin(1e-12));
            }
    }

    // Identity matrix reproduces the stack bit-for-bit.
    const auto same = maps::mix_maps(stack, identity(5));
    for (int i = 0; i < 5; ++i) CHECK(same[i] == stack[i]);

    CHECK_THROWS_MATCHES(maps::mix_maps({}, w), error, error_code(errc::bad_config));
    CHECK_THROWS_MATCHES(maps::mix_maps(stack, matrix(3, 4, 1.0)), error,
                         error_code(errc::shape_mismatch));
    stack[3] = random_plane(6, 10);
    CHECK_THROWS_MATCHES(maps::mix_maps(stack, w), error, error_code(errc::inconsistent_map_dims));
}

TEST_CASE("learnable compaction count floors") {
    CHECK(maps::learnable_map_count(100.0, 1) == 64);
    CHECK(maps::learnable_map_count(100.0, 3) == 192);
    CHECK(maps::learnable_map_count(50.0, 3) == 96);
    CHECK(maps::learnable_map_count(10.0, 1) == 6);   // floor(6.4)
    CHECK(maps::learnable_map_count(2.9, 1) == 1);    // floor(1.856)
    CHECK_THROWS_MATCHES(maps::learnable_map_count(0.0, 1), error, error_code(errc::bad_config));
    CHECK_THROWS_MATCHES(maps::learnable_map_count(50.0, 0), error, error_code(errc::bad_config));
}

TEST_CASE("per-frequency correlations flag constant maps instead of failing") {
    // Build a plane whose DC map is a smooth ramp, whose (0,1) map alternates,
    // and whose remaining maps are identically zero (hence flagged).
    const int br = 8, bc = 8;
    plane_f64 plane(8 * br, 8 * bc, 0.0);
    for (int r = 0; r < br; ++r)
        for (int c = 0; c < bc; ++c) {
            plane(8 * r, 8 * c) = r + c;
            plane(8 * r, 8 * c + 1) = ((r + c) % 2 == 0) ? 1.0 : -1.0;
        }

    const auto m = maps::to_maps(plane);
    const auto mc = maps::per_map_correlations(m);

    CHECK(mc.zero_variance(0, 0) == 0);
    CHECK(mc.zero_variance(0, 1) == 0);
    CHECK(mc.mi(0, 0) == Catch::Approx(corr::morans_i(m.maps[0])).margin(1e-15));
    CHECK(mc.gc(0, 1) == Catch::Approx(corr::gearys_c(m.maps[1])).margin(1e-15));
    CHECK(mc.mi(0, 0) > 0.5);   // ramp: positive autocorrelation
    CHECK(mc.mi(0, 1) < 0.0);   // checkerboard: negative

    int flagged = 0;
    for (int u = 0; u < 8; ++u)
        for (int v = 0; v < 8; ++v) flagged += mc.zero_variance(u, v);
    CHECK(flagged == 62);

    maps::coefficient_maps bad = m;
    bad.maps.pop_back();
    CHECK_THROWS_MATCHES(maps::per_map_correlations(bad), error,
                         error_code(errc::inconsistent_map_dims));
}
