#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "augment.hpp"
#include "coeff_maps.hpp"
#include "common.hpp"
#include "correlation.hpp"
#include "jpeg/decode.hpp"
#include "jpeg/pixels.hpp"
#include "pnm.hpp"

namespace jpegdct::analysis {

struct analysis_config {
    std::string dataset = "dataset";
    int qf = 0;                       // reporting label only
    corr::spatial_weights weights{};  // queen 8-neighbor binary by default
    double wsum_sigma = 2.0;
    int crop_blocks = 64;  // per-channel centered crop cap, in 8-sample blocks
    int workers = 0;       // 0 = hardware concurrency
    bool per_map = true;   // include the 64 per-frequency map rows
};

/// One statistic of one field of one image; value absent when the field was
/// constant (zero variance).
struct measurement {
    std::string channel;  // y / cb / cr
    std::string domain;   // pixel, dct, feature name, or map_u_v
    std::string metric;   // mi / gc
    std::optional<double> value;
};

struct report_entry {
    std::string channel, domain, metric;
    double value = 0;  // mean over contributing images; meaningless when n == 0
    int n = 0;         // images contributing a value
    int flagged = 0;   // images where the field was constant
};

struct skipped_file {
    std::string name;
    std::string reason;
};

struct correlation_report {
    std::string dataset;
    int qf = 0;
    int analyzed = 0;
    std::vector<report_entry> entries;
    std::vector<skipped_file> skipped;
};

namespace detail {

inline plane_f64 u8_field(const plane_u8& p) {
    plane_f64 out(p.rows(), p.cols());
    for (size_t i = 0; i < p.size(); ++i) out.data()[i] = p.data()[i];
    return out;
}

inline void push_stats(std::vector<measurement>& out, const std::string& channel,
                       const std::string& domain, const plane_f64& field,
                       const corr::spatial_weights& w) {
    std::optional<double> mi, gc;
    try {
        mi = corr::morans_i(field, w);
        gc = corr::gearys_c(field, w);
    } catch (const error& e) {
        if (e.code() != errc::zero_variance) throw;
    }
    out.push_back({channel, domain, "mi", mi});
    out.push_back({channel, domain, "gc", gc});
}

inline const char* channel_name(const jpeg::compressed_image& img, int c) {
    if (img.channels() == 1) return "y";
    return c == 0 ? "y" : (c == 1 ? "cb" : "cr");
}

}  // namespace detail

/// All measurements of a single parsed image: per channel, spatial
/// autocorrelation of the decoded samples, of the dequantized concatenated
/// coefficients, of the six block-feature fields, and of each per-frequency
/// coefficient map. Large planes are analyzed on a centered block-aligned
/// crop.
inline std::vector<measurement> analyze_image(const jpeg::compressed_image& img,
                                              const analysis_config& cfg = {}) {
    img.validate();
    require(cfg.crop_blocks >= 1, errc::bad_config, "crop cap must be at least one block");
    std::vector<measurement> out;
    const std::vector<corr::block_feature_kind> kinds = corr::all_block_features(cfg.wsum_sigma);
    for (int c = 0; c < img.channels(); ++c) {
        const std::string ch = detail::channel_name(img, c);
        const jpeg::quant_matrix& q = img.qtables[c];
        const plane_i32& full = img.planes[c];
        const int bh = full.rows() / 8, bw = full.cols() / 8;
        const int kh = std::min(bh, cfg.crop_blocks), kw = std::min(bw, cfg.crop_blocks);
        const plane_i32 plane = enhance::dct_crop(full, (bh - kh) / 2, (bw - kw) / 2, kh, kw);

        detail::push_stats(out, ch, "pixel", detail::u8_field(jpeg::reconstruct_plane(plane, q)),
                           cfg.weights);
        const plane_f64 deq = jpeg::dequantize(plane, q);
        detail::push_stats(out, ch, "dct", deq, cfg.weights);
        for (const corr::block_feature_kind& kind : kinds)
            detail::push_stats(out, ch, kind.name(), corr::block_feature_field(plane, kind, &q),
                               cfg.weights);
        if (cfg.per_map) {
            const maps::coefficient_maps m = maps::to_maps(deq);
            for (int u = 0; u < 8; ++u)
                for (int v = 0; v < 8; ++v) {
                    const std::string domain =
                        "map_" + std::to_string(u) + "_" + std::to_string(v);
                    detail::push_stats(out, ch, domain, m.maps[8 * u + v], cfg.weights);
                }
        }
    }
    return out;
}

struct dataset_item {
    std::string name;
    std::vector<uint8_t> jpeg_bytes;
};

/// Analyze a batch of encoded images with a bounded worker pool and merge
/// per-image statistics by unweighted mean. Files that fail to parse are
/// skipped and recorded. The merge runs in input order, so results do not
/// depend on the worker count.
inline correlation_report analyze_dataset(const std::vector<dataset_item>& items,
                                          const analysis_config& cfg = {}) {
    require(!items.empty(), errc::empty_dataset, "no input images");

    struct per_file {
        bool ok = false;
        std::string err;
        std::vector<measurement> ms;
    };
    std::vector<per_file> results(items.size());
    const int hw = static_cast<int>(std::thread::hardware_concurrency());
    const int workers = std::max(1, std::min<int>(static_cast<int>(items.size()),
                                                  cfg.workers > 0 ? cfg.workers : std::max(hw, 1)));
    std::atomic<size_t> next{0};
    auto work = [&] {
        for (size_t i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1)) {
            try {
                const jpeg::compressed_image img =
                    jpeg::parse_jpeg(items[i].jpeg_bytes.data(), items[i].jpeg_bytes.size());
                results[i].ms = analyze_image(img, cfg);
                results[i].ok = true;
            } catch (const error& e) {
                results[i].err = e.what();
            }
        }
    };
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < workers; ++t) pool.emplace_back(work);
        for (std::thread& t : pool) t.join();
    }

    correlation_report rep;
    rep.dataset = cfg.dataset;
    rep.qf = cfg.qf;
    struct cell {
        double sum = 0;
        int n = 0, flagged = 0, order = 0;
    };
    std::map<std::array<std::string, 3>, cell> agg;
    int order = 0;
    for (size_t i = 0; i < items.size(); ++i) {
        if (!results[i].ok) {
            rep.skipped.push_back({items[i].name, results[i].err});
            continue;
        }
        ++rep.analyzed;
        for (const measurement& m : results[i].ms) {
            cell& c = agg[{m.channel, m.domain, m.metric}];
            if (c.n == 0 && c.flagged == 0) c.order = order++;
            if (m.value) {
                c.sum += *m.value;
                ++c.n;
            } else {
                ++c.flagged;
            }
        }
    }
    require(rep.analyzed > 0, errc::empty_dataset, "every input failed to parse");

    rep.entries.resize(agg.size());
    for (const auto& [key, c] : agg)
        rep.entries[c.order] = {key[0], key[1], key[2], c.n ? c.sum / c.n : 0.0, c.n, c.flagged};
    return rep;
}

inline double report_value(const correlation_report& rep, const std::string& channel,
                           const std::string& domain, const std::string& metric) {
    for (const report_entry& e : rep.entries)
        if (e.channel == channel && e.domain == domain && e.metric == metric) {
            require(e.n > 0, errc::zero_variance, "requested statistic has no contributing images");
            return e.value;
        }
    fail(errc::not_found, "no report entry " + channel + "/" + domain + "/" + metric);
}

/// CSV emission, one row per entry: dataset,qf,channel,domain,metric,value,n.
/// Entries with no contributing images print "nan".
inline void write_report_csv(std::ostream& os, const std::vector<correlation_report>& reports,
                             bool header = true) {
    if (header) os << "dataset,qf,channel,domain,metric,value,n\n";
    for (const correlation_report& rep : reports)
        for (const report_entry& e : rep.entries) {
            os << rep.dataset << ',' << rep.qf << ',' << e.channel << ',' << e.domain << ','
               << e.metric << ',';
            if (e.n > 0) {
                char buf[64];
                std::snprintf(buf, sizeof buf, "%.9g", e.value);
                os << buf;
            } else {
                os << "nan";
            }
            os << ',' << e.n << '\n';
        }
}

/// JSON emission: nested dataset -> qf -> channel -> domain -> metric, each
/// leaf carrying {value|null, n, flagged}; per-report skip list alongside.
inline nlohmann::json report_json(const std::vector<correlation_report>& reports) {
    nlohmann::json root = nlohmann::json::object();
    for (const correlation_report& rep : reports) {
        nlohmann::json& ds = root[rep.dataset];
        nlohmann::json& at = ds["results"][std::to_string(rep.qf)];
        for (const report_entry& e : rep.entries) {
            nlohmann::json leaf;
            if (e.n > 0)
                leaf["value"] = e.value;
            else
                leaf["value"] = nullptr;
            leaf["n"] = e.n;
            leaf["flagged"] = e.flagged;
            at[e.channel][e.domain][e.metric] = leaf;
        }
        nlohmann::json& sk = ds["skipped"][std::to_string(rep.qf)];
        sk = nlohmann::json::array();
        for (const skipped_file& s : rep.skipped) sk.push_back({{"file", s.name}, {"error", s.reason}});
        ds["analyzed"][std::to_string(rep.qf)] = rep.analyzed;
    }
    return root;
}

}  // namespace jpegdct::analysis
