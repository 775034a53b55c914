// jpegdct — compressed-domain JPEG toolkit front door.
//
// Subcommands: coeffs, analyze, upsample-verify, enhance, metrics,
// gen-identity-weights. All errors leave as one machine-readable JSON object
// on stderr and a nonzero exit code.

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include <jpegdct/jpegdct.hpp>

namespace fs = std::filesystem;
using namespace jpegdct;

namespace {

struct settings {
    std::vector<int> qfs = {10, 20, 30, 40, 50};
    std::string weight_scheme = "queen8";
    std::string weight_norm = "binary";
    double wsum_sigma = 2.0;
    int crop_blocks = 64;
    double alpha = 100.0;
    std::string channels = "all";  // all | y
    int workers = 0;               // 0 = hardware concurrency
    std::string sampling = "420";  // chroma layout when encoding raw input
};

std::vector<int> parse_qf_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        size_t used = 0;
        const int v = std::stoi(tok, &used);
        require(used == tok.size() && v >= 1 && v <= 100, errc::bad_config,
                "quality factor must be an integer in [1,100]: '" + tok + "'");
        out.push_back(v);
    }
    require(!out.empty(), errc::bad_config, "empty quality-factor list");
    return out;
}

// Flat key = value config file; # starts a comment, blank lines ignored.
void load_config_file(const std::string& path, settings& s) {
    std::ifstream in(path);
    require(in.good(), errc::not_found, "cannot open config file " + path);
    std::string line;
    int ln = 0;
    while (std::getline(in, line)) {
        ++ln;
        if (const size_t hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const auto trim = [](std::string v) {
            const auto sp = [](unsigned char c) { return std::isspace(c); };
            while (!v.empty() && sp(v.front())) v.erase(v.begin());
            while (!v.empty() && sp(v.back())) v.pop_back();
            return v;
        };
        if (trim(line).empty()) continue;
        const size_t eq = line.find('=');
        require(eq != std::string::npos, errc::bad_config,
                "config line " + std::to_string(ln) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq)), val = trim(line.substr(eq + 1));
        if (key == "qf") s.qfs = parse_qf_list(val);
        else if (key == "weight_scheme") s.weight_scheme = val;
        else if (key == "weight_norm") s.weight_norm = val;
        else if (key == "wsum_sigma") s.wsum_sigma = std::stod(val);
        else if (key == "crop_blocks") s.crop_blocks = std::stoi(val);
        else if (key == "alpha") s.alpha = std::stod(val);
        else if (key == "channels") s.channels = val;
        else if (key == "workers") s.workers = std::stoi(val);
        else if (key == "sampling") s.sampling = val;
        else fail(errc::bad_config, "config line " + std::to_string(ln) + ": unknown key '" + key + "'");
    }
}

corr::spatial_weights make_weights(const settings& s) {
    corr::spatial_weights w;
    if (s.weight_scheme == "queen8") w.scheme = corr::weight_scheme::queen8;
    else if (s.weight_scheme == "rook4") w.scheme = corr::weight_scheme::rook4;
    else fail(errc::bad_config, "weight scheme must be queen8 or rook4");
    if (s.weight_norm == "binary") w.norm = corr::weight_norm::binary;
    else if (s.weight_norm == "row") w.norm = corr::weight_norm::row_standardized;
    else fail(errc::bad_config, "weight norm must be binary or row");
    return w;
}

jpeg::sampling_kind make_sampling(const settings& s) {
    if (s.sampling == "420") return jpeg::sampling_kind::s420;
    if (s.sampling == "444") return jpeg::sampling_kind::s444;
    fail(errc::bad_config, "sampling must be 420 or 444");
}

std::string fmt_value(double v, const char* spec = "%.6f") {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

bool is_jpeg_bytes(const std::vector<uint8_t>& b) {
    return b.size() >= 2 && b[0] == 0xFF && b[1] == 0xD8;
}

// Load a comparison image: JPEG by magic, else PNM. JPEG color output stays
// in YCbCr so luma metrics skip the RGB detour.
jpeg::raster_image load_raster(const std::string& path) {
    const std::vector<uint8_t> bytes = read_file(path);
    if (is_jpeg_bytes(bytes)) {
        const jpeg::compressed_image img = jpeg::parse_jpeg(bytes.data(), bytes.size());
        return jpeg::decode_to_pixels(img, img.channels() == 1
                                               ? jpeg::raster_image::color::grayscale
                                               : jpeg::raster_image::color::ycbcr);
    }
    return pnm::read(bytes);
}

// ---- coeffs ---------------------------------------------------------------

void dump_plane_csv(std::ostream& os, const plane_i32& p, bool deq, const jpeg::quant_matrix& q) {
    for (int r = 0; r < p.rows(); ++r) {
        for (int c = 0; c < p.cols(); ++c) {
            if (c) os << ',';
            if (deq) os << fmt_value(static_cast<double>(p(r, c)) * q(r % 8, c % 8), "%.9g");
            else os << p(r, c);
        }
        os << '\n';
    }
}

int cmd_coeffs(const std::string& input, bool deq, const std::string& out_prefix) {
    const std::vector<uint8_t> bytes = read_file(input);
    const jpeg::compressed_image img = jpeg::parse_jpeg(bytes.data(), bytes.size());
    static const char* names[3] = {"y", "cb", "cr"};
    for (int c = 0; c < img.channels(); ++c) {
        if (out_prefix.empty()) {
            std::cout << "# channel " << names[c] << ' ' << img.planes[c].rows() << 'x'
                      << img.planes[c].cols() << '\n';
            dump_plane_csv(std::cout, img.planes[c], deq, img.qtables[c]);
        } else {
            const std::string path = out_prefix + "." + names[c] + ".csv";
            std::ofstream os(path);
            require(os.good(), errc::not_found, "cannot open " + path);
            dump_plane_csv(os, img.planes[c], deq, img.qtables[c]);
        }
    }
    return 0;
}

// ---- analyze ----------------------------------------------------------------

bool has_ext(const fs::path& p, std::initializer_list<const char*> exts) {
    std::string e = p.extension().string();
    std::transform(e.begin(), e.end(), e.begin(), [](unsigned char c) { return std::tolower(c); });
    for (const char* x : exts)
        if (e == x) return true;
    return false;
}

int cmd_analyze(const std::string& dir, const settings& s, const std::string& dataset,
                const std::string& csv_path, const std::string& json_path) {
    std::vector<fs::path> raws, jpegs;
    require(fs::is_directory(dir), errc::not_found, "not a directory: " + dir);
    for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        if (has_ext(e.path(), {".pgm", ".ppm", ".pnm"})) raws.push_back(e.path());
        else if (has_ext(e.path(), {".jpg", ".jpeg"})) jpegs.push_back(e.path());
    }
    std::sort(raws.begin(), raws.end());
    std::sort(jpegs.begin(), jpegs.end());
    require(!raws.empty() || !jpegs.empty(), errc::empty_dataset,
            "no PGM/PPM/JPEG files in " + dir);

    analysis::analysis_config cfg;
    cfg.dataset = dataset;
    cfg.weights = make_weights(s);
    cfg.wsum_sigma = s.wsum_sigma;
    cfg.crop_blocks = s.crop_blocks;
    cfg.workers = s.workers;
    const jpeg::sampling_kind color_sampling = make_sampling(s);

    std::vector<analysis::correlation_report> reports;
    if (!jpegs.empty()) {
        std::vector<analysis::dataset_item> items;
        for (const fs::path& p : jpegs) items.push_back({p.filename().string(), read_file(p.string())});
        cfg.qf = 0;  // label for files analyzed as provided
        reports.push_back(analysis::analyze_dataset(items, cfg));
    }
    if (!raws.empty()) {
        std::vector<jpeg::raster_image> rasters;
        rasters.reserve(raws.size());
        for (const fs::path& p : raws) rasters.push_back(pnm::read(p.string()));
        for (const int qf : s.qfs) {
            std::vector<analysis::dataset_item> items;
            for (size_t i = 0; i < raws.size(); ++i) {
                const jpeg::sampling_kind k = rasters[i].channels.size() == 1
                                                  ? jpeg::sampling_kind::grayscale
                                                  : color_sampling;
                items.push_back({raws[i].filename().string(),
                                 jpeg::compress_raster(rasters[i], k, qf)});
            }
            cfg.qf = qf;
            reports.push_back(analysis::analyze_dataset(items, cfg));
        }
    }

    if (s.channels == "y")
        for (analysis::correlation_report& r : reports)
            std::erase_if(r.entries, [](const analysis::report_entry& e) { return e.channel != "y"; });
    else
        require(s.channels == "all", errc::bad_config, "channels must be all or y");

    size_t rows = 0, skipped = 0;
    for (const analysis::correlation_report& r : reports) {
        rows += r.entries.size();
        skipped += r.skipped.size();
    }
    {
        std::ofstream os(csv_path);
        require(os.good(), errc::not_found, "cannot open " + csv_path);
        analysis::write_report_csv(os, reports);
    }
    {
        std::ofstream os(json_path);
        require(os.good(), errc::not_found, "cannot open " + json_path);
        os << analysis::report_json(reports).dump(2) << '\n';
    }
    std::cout << "wrote " << csv_path << " and " << json_path << ": " << rows << " rows, "
              << skipped << " file(s) skipped\n";
    if (skipped) {
        nlohmann::json err = {{"error",
                               {{"code", "per_file_errors"},
                                {"message", std::to_string(skipped) + " file(s) skipped; see " +
                                                json_path}}}};
        std::cerr << err.dump() << '\n';
        return 1;
    }
    return 0;
}

// ---- upsample-verify --------------------------------------------------------

int cmd_upsample_verify(int trials, bool naive, uint32_t seed) {
    require(trials > 0, errc::no_trials, "trial count must be positive");
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> dist(-1024.0, 1024.0);
    double max_err = 0;
    for (int t = 0; t < trials; ++t) {
        matrix block(4, 4);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) block(r, c) = dist(rng);
        // ground truth: decode the block, replicate pixels, re-transform
        const matrix oracle =
            dct::forward_dct2(dct::pixel_upsample_block(dct::inverse_dct2(block)));
        const matrix got = naive ? dct::naive_dct_upsample_block(block)
                                 : dct::dct_upsample_block(block);
        max_err = std::max(max_err, max_abs_diff(oracle, got));
    }
    if (naive) {
        const bool shown = max_err >= 1e-3;
        std::cout << "naive-upsample: trials=" << trials << " max_error=" << fmt_value(max_err, "%.3e")
                  << (shown ? " (deviates as expected; transform-domain correction required)"
                            : " (unexpectedly small)")
                  << (shown ? " PASS" : " FAIL") << '\n';
        return shown ? 0 : 1;
    }
    const bool ok = max_err <= 1e-9;
    std::cout << "umep-upsample: trials=" << trials << " max_error=" << fmt_value(max_err, "%.3e")
              << " tolerance=1.0e-09 " << (ok ? "PASS" : "FAIL") << '\n';
    return ok ? 0 : 1;
}

// ---- enhance ----------------------------------------------------------------

int cmd_enhance(const std::string& input, const std::string& weights_path,
                const std::string& out_path, const settings& s, int embc_count,
                const std::string& strategy, const std::string& model, uint32_t seed) {
    const std::vector<uint8_t> bytes = read_file(input);
    const jpeg::compressed_image img = jpeg::parse_jpeg(bytes.data(), bytes.size());

    enhance::weight_bundle w;
    try {
        w = enhance::weight_bundle::load(weights_path);
    } catch (const error& e) {
        if (e.code() == errc::not_found)
            fail(errc::missing_weights, "weight bundle not readable: " + weights_path);
        throw;
    }

    enhance::pipeline_options opt;
    opt.embc_count = embc_count;
    opt.alpha_percent = s.alpha;
    if (strategy == "learnable") opt.strategy = enhance::compaction_strategy::learnable;
    else require(strategy == "plain", errc::bad_config, "strategy must be plain or learnable");

    enhance::inner_model inner = enhance::identity_model;
    if (model == "reference") inner = enhance::make_reference_model(seed);
    else require(model == "identity", errc::bad_config, "model must be identity or reference");

    const jpeg::compressed_image enhanced = enhance::enhance_pipeline(img, w, inner, opt);
    write_file(out_path, jpeg::encode_coefficients(enhanced));

    const jpeg::raster_image::color space = img.channels() == 1
                                                ? jpeg::raster_image::color::grayscale
                                                : jpeg::raster_image::color::ycbcr;
    const metrics::metric_result m =
        metrics::compute_metrics(jpeg::decode_to_pixels(img, space),
                                 jpeg::decode_to_pixels(enhanced, space));
    std::cout << out_path << ',' << fmt_value(m.psnr) << ',' << fmt_value(m.ssim) << ','
              << fmt_value(m.psnr_b) << '\n';
    return 0;
}

// ---- metrics ----------------------------------------------------------------

int cmd_metrics(const std::string& ref_path, const std::string& test_path, bool rgb_mean,
                bool header) {
    metrics::metric_options opt;
    if (rgb_mean) opt.colors = metrics::color_mode::channel_mean;
    const metrics::metric_result m =
        metrics::compute_metrics(load_raster(ref_path), load_raster(test_path), opt);
    if (header) std::cout << "file,psnr,ssim,psnr_b\n";
    std::cout << test_path << ',' << fmt_value(m.psnr) << ',' << fmt_value(m.ssim) << ','
              << fmt_value(m.psnr_b) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    settings s;
    if (const char* env = std::getenv("JPEGDCT_WORKERS"))
        if (const int v = std::atoi(env); v > 0) s.workers = v;

    try {
        // config file loads first so command-line flags can override it
        for (int i = 1; i + 1 < argc; ++i)
            if (std::string(argv[i]) == "--config") load_config_file(argv[i + 1], s);

        CLI::App app{"compressed-domain JPEG toolkit"};
        app.require_subcommand(1);
        std::string config_path;
        app.add_option("--config", config_path, "flat key = value config file");

        std::string qf_csv;

        // coeffs
        auto* coeffs = app.add_subcommand("coeffs", "dump per-channel DCT coefficient planes");
        std::string co_in, co_out;
        bool co_deq = false;
        coeffs->add_option("input", co_in, "JPEG file")->required();
        coeffs->add_flag("--dequantize", co_deq, "multiply by quantization steps");
        coeffs->add_option("--out", co_out, "output path prefix (default: stdout)");

        // analyze
        auto* analyze = app.add_subcommand("analyze", "dataset correlation report");
        std::string an_dir, an_dataset, an_csv = "report.csv", an_json;
        analyze->add_option("dir", an_dir, "directory of PGM/PPM raws or JPEGs")->required();
        analyze->add_option("--qf", qf_csv, "comma-separated quality factors for raw inputs");
        analyze->add_option("--out", an_csv, "CSV output path");
        analyze->add_option("--json", an_json, "JSON output path (default: CSV path + .json)");
        analyze->add_option("--dataset", an_dataset, "dataset label (default: directory name)");
        analyze->add_option("--workers", s.workers, "worker thread count (0 = auto)");
        analyze->add_option("--crop-blocks", s.crop_blocks, "centered crop cap in blocks");
        analyze->add_option("--sigma", s.wsum_sigma, "weighted-sum kernel sigma");
        analyze->add_option("--weight-scheme", s.weight_scheme, "queen8 or rook4");
        analyze->add_option("--weight-norm", s.weight_norm, "binary or row");
        analyze->add_option("--channels", s.channels, "all or y");
        analyze->add_option("--sampling", s.sampling, "chroma layout for encoded raws: 420 or 444");

        // upsample-verify
        auto* uv = app.add_subcommand("upsample-verify",
                                      "check transform-domain upsampling against the pixel oracle");
        int uv_trials = 1000;
        bool uv_naive = false;
        uint32_t uv_seed = 7;
        uv->add_option("--trials", uv_trials, "random blocks to test");
        uv->add_flag("--naive", uv_naive, "show the uncorrected upsampling matrix deviating");
        uv->add_option("--seed", uv_seed, "RNG seed");

        // enhance
        auto* enh = app.add_subcommand("enhance", "run the coefficient enhancement pipeline");
        std::string en_in, en_weights, en_out, en_strategy = "plain", en_model = "identity";
        int en_embc = 2;
        uint32_t en_seed = 0x1234;
        enh->add_option("input", en_in, "JPEG file")->required();
        enh->add_option("--weights", en_weights, "weight bundle JSON")->required();
        enh->add_option("--out", en_out, "output JPEG path")->required();
        enh->add_option("--embc", en_embc, "block-based modules per stage");
        enh->add_option("--alpha", s.alpha, "compaction percentage (0,100]");
        enh->add_option("--strategy", en_strategy, "compaction strategy: plain or learnable");
        enh->add_option("--model", en_model, "inner model: identity or reference");
        enh->add_option("--seed", en_seed, "reference-model seed");

        // metrics
        auto* met = app.add_subcommand("metrics", "PSNR / SSIM / PSNR-B between two images");
        std::string me_ref, me_test;
        bool me_rgb = false, me_header = false;
        met->add_option("ref", me_ref, "reference image (JPEG or PNM)")->required();
        met->add_option("test", me_test, "test image (JPEG or PNM)")->required();
        met->add_flag("--rgb-mean", me_rgb, "average squared error over RGB channels");
        met->add_flag("--header", me_header, "print the CSV header line");

        // gen-identity-weights
        auto* gen = app.add_subcommand("gen-identity-weights",
                                       "write a weight bundle that makes the pipeline an identity");
        std::string gw_out;
        int gw_embc = 2;
        bool gw_gray = false;
        gen->add_option("--out", gw_out, "output JSON path")->required();
        gen->add_option("--embc", gw_embc, "block-based modules per stage");
        gen->add_flag("--grayscale", gw_gray, "single-channel layout (stage 1 only, no chroma context)");

        try {
            app.parse(argc, argv);
        } catch (const CLI::ParseError& e) {
            return app.exit(e);
        }

        if (!qf_csv.empty()) s.qfs = parse_qf_list(qf_csv);

        if (*coeffs) return cmd_coeffs(co_in, co_deq, co_out);
        if (*analyze) {
            if (an_dataset.empty())
                an_dataset = fs::path(an_dir).filename().string();
            if (an_dataset.empty()) an_dataset = "dataset";
            if (an_json.empty()) an_json = an_csv + ".json";
            return cmd_analyze(an_dir, s, an_dataset, an_csv, an_json);
        }
        if (*uv) return cmd_upsample_verify(uv_trials, uv_naive, uv_seed);
        if (*enh) return cmd_enhance(en_in, en_weights, en_out, s, en_embc, en_strategy, en_model,
                                     en_seed);
        if (*met) return cmd_metrics(me_ref, me_test, me_rgb, me_header);
        if (*gen) {
            enhance::make_identity_bundle(gw_embc, gw_gray).save(gw_out);
            std::cout << "wrote " << gw_out << '\n';
            return 0;
        }
        return 0;
    } catch (const error& e) {
        nlohmann::json err = {{"error", {{"code", errc_name(e.code())}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        nlohmann::json err = {{"error", {{"code", "internal"}, {"message", e.what()}}}};
        std::cerr << err.dump() << '\n';
        return 2;
    }
}
