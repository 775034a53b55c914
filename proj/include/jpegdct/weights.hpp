#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "common.hpp"
#include "pnm.hpp"

namespace jpegdct::enhance {

/// Named real-valued tensors for forward-only inference, serialized as JSON:
/// { "name": { "shape": [ints], "data": [row-major numbers] }, ... }.
struct weight_bundle {
    struct tensor {
        std::vector<int> shape;
        std::vector<double> data;

        int64_t element_count() const {
            int64_t n = 1;
            for (int d : shape) n *= d;
            return n;
        }
    };

    std::map<std::string, tensor> tensors;

    bool has(const std::string& name) const { return tensors.count(name) != 0; }

    const tensor& get(const std::string& name) const {
        auto it = tensors.find(name);
        require(it != tensors.end(), errc::missing_weights, "weight tensor '" + name + "' not in bundle");
        return it->second;
    }

    /// Fetch a 2-D tensor as a matrix, enforcing its shape.
    matrix get_matrix(const std::string& name, int rows, int cols) const {
        const tensor& t = get(name);
        require(t.shape.size() == 2 && t.shape[0] == rows && t.shape[1] == cols,
                errc::shape_mismatch,
                "weight tensor '" + name + "' must have shape [" + std::to_string(rows) + ", " +
                    std::to_string(cols) + "]");
        matrix m(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int c = 0; c < cols; ++c) m(r, c) = t.data[static_cast<size_t>(r) * cols + c];
        return m;
    }

    /// Fetch a 1-D tensor, enforcing its length.
    std::vector<double> get_vector(const std::string& name, int n) const {
        const tensor& t = get(name);
        require(t.shape.size() == 1 && t.shape[0] == n, errc::shape_mismatch,
                "weight tensor '" + name + "' must have shape [" + std::to_string(n) + "]");
        return t.data;
    }

    void put(const std::string& name, std::vector<int> shape, std::vector<double> data) {
        tensor t{std::move(shape), std::move(data)};
        require(t.element_count() == static_cast<int64_t>(t.data.size()), errc::shape_mismatch,
                "tensor '" + name + "' data length does not match its shape");
        tensors[name] = std::move(t);
    }

    void put_matrix(const std::string& name, const matrix& m) {
        put(name, {m.rows(), m.cols()}, std::vector<double>(m.data(), m.data() + m.size()));
    }

    static weight_bundle from_json(const nlohmann::json& j) {
        require(j.is_object(), errc::bad_format, "weight bundle must be a JSON object");
        weight_bundle b;
        for (auto it = j.begin(); it != j.end(); ++it) {
            const nlohmann::json& e = it.value();
            require(e.is_object() && e.contains("shape") && e.contains("data"), errc::bad_format,
                    "tensor '" + it.key() + "' needs 'shape' and 'data'");
            tensor t;
            for (const auto& d : e["shape"]) {
                require(d.is_number_integer() && d.template get<int64_t>() > 0, errc::bad_format,
                        "tensor '" + it.key() + "' has a non-positive dimension");
                t.shape.push_back(d.template get<int>());
            }
            t.data.reserve(e["data"].size());
            for (const auto& v : e["data"]) {
                require(v.is_number(), errc::bad_format, "tensor '" + it.key() + "' has non-numeric data");
                t.data.push_back(v.template get<double>());
            }
            require(t.element_count() == static_cast<int64_t>(t.data.size()), errc::bad_format,
                    "tensor '" + it.key() + "' data length does not match its shape");
            b.tensors[it.key()] = std::move(t);
        }
        return b;
    }

    nlohmann::json to_json() const {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [name, t] : tensors) j[name] = {{"shape", t.shape}, {"data", t.data}};
        return j;
    }

    static weight_bundle load(const std::string& path) {
        const std::vector<uint8_t> bytes = read_file(path);
        nlohmann::json j = nlohmann::json::parse(bytes.begin(), bytes.end(), nullptr, false);
        require(!j.is_discarded(), errc::bad_format, "weight bundle is not valid JSON: " + path);
        return from_json(j);
    }

    void save(const std::string& path) const {
        const std::string text = to_json().dump();
        write_file(path, std::vector<uint8_t>(text.begin(), text.end()));
    }
};

}  // namespace jpegdct::enhance
