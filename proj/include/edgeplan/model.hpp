#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/common.hpp"

namespace edgeplan {

enum class LayerKind {
    Convolutional,
    Relu,
    Pooling,
    LocalResponseNormalization,
    Dropout,
    FullyConnected,
};

inline const std::vector<LayerKind>& all_layer_kinds() {
    static const std::vector<LayerKind> kinds = {
        LayerKind::Convolutional,
        LayerKind::Relu,
        LayerKind::Pooling,
        LayerKind::LocalResponseNormalization,
        LayerKind::Dropout,
        LayerKind::FullyConnected,
    };
    return kinds;
}

inline std::string to_string(LayerKind k) {
    switch (k) {
        case LayerKind::Convolutional: return "Convolutional";
        case LayerKind::Relu: return "Relu";
        case LayerKind::Pooling: return "Pooling";
        case LayerKind::LocalResponseNormalization: return "LocalResponseNormalization";
        case LayerKind::Dropout: return "Dropout";
        case LayerKind::FullyConnected: return "FullyConnected";
    }
    throw validation_error("unknown layer kind value");
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    for (LayerKind k : all_layer_kinds())
        if (to_string(k) == s) return k;
    throw parse_error("unknown layer kind '" + s + "'");
}

// Regression features expected for each layer kind, in canonical order.
inline const std::vector<std::string>& feature_names(LayerKind k) {
    static const std::vector<std::string> conv = {"input_feature_maps", "filter_compute"};
    static const std::vector<std::string> size_only = {"input_size"};
    static const std::vector<std::string> in_out = {"input_size", "output_size"};
    switch (k) {
        case LayerKind::Convolutional: return conv;
        case LayerKind::Relu:
        case LayerKind::LocalResponseNormalization:
        case LayerKind::Dropout: return size_only;
        case LayerKind::Pooling:
        case LayerKind::FullyConnected: return in_out;
    }
    throw validation_error("unknown layer kind value");
}

struct LayerSpec {
    int id = 0;  // 1-based position within its branch
    LayerKind kind = LayerKind::Relu;
    std::map<std::string, double> features;
    std::int64_t output_bytes = 0;

    double feature(const std::string& name) const {
        auto it = features.find(name);
        if (it == features.end())
            throw validation_error("layer " + std::to_string(id) + " (" + to_string(kind) +
                                   ") has no feature '" + name + "'");
        return it->second;
    }
};

// One early-exit branch, stored as its complete layer chain from the input.
struct ExitBranch {
    int exit_index = 0;  // 1 = shortest branch
    double accuracy = 0.0;
    std::vector<LayerSpec> layers;
};

struct BranchyModel {
    std::string name;
    std::int64_t input_bytes = 0;
    std::vector<ExitBranch> branches;  // ordered by exit_index

    int exit_count() const { return static_cast<int>(branches.size()); }

    const ExitBranch& branch(int exit_index) const {
        if (exit_index < 1 || exit_index > exit_count())
            throw validation_error("exit index " + std::to_string(exit_index) +
                                   " out of range 1.." + std::to_string(exit_count()));
        return branches[static_cast<std::size_t>(exit_index - 1)];
    }
};

inline void validate_model(const BranchyModel& m) {
    if (m.branches.empty()) throw validation_error("model has no branches");
    if (m.input_bytes < 0) throw validation_error("input_bytes must be >= 0");
    for (std::size_t b = 0; b < m.branches.size(); ++b) {
        const ExitBranch& br = m.branches[b];
        std::string where = "branch " + std::to_string(b + 1);
        if (br.exit_index != static_cast<int>(b + 1))
            throw validation_error(where + ": exit_index must be " + std::to_string(b + 1) +
                                   ", got " + std::to_string(br.exit_index));
        if (br.accuracy < 0.0 || br.accuracy > 1.0)
            throw validation_error(where + ": accuracy must be in [0,1]");
        if (br.layers.empty()) throw validation_error(where + " has no layers");
        if (b > 0) {
            if (br.accuracy < m.branches[b - 1].accuracy)
                throw validation_error(where + ": accuracy decreases against branch " +
                                       std::to_string(b));
            if (br.layers.size() < m.branches[b - 1].layers.size())
                throw validation_error(where + ": layer count decreases against branch " +
                                       std::to_string(b));
        }
        for (std::size_t l = 0; l < br.layers.size(); ++l) {
            const LayerSpec& layer = br.layers[l];
            std::string lwhere = where + " layer " + std::to_string(l + 1);
            if (layer.id != static_cast<int>(l + 1))
                throw validation_error(lwhere + ": id must be " + std::to_string(l + 1));
            if (layer.output_bytes < 0)
                throw validation_error(lwhere + ": output_bytes must be >= 0");
            const auto& expected = feature_names(layer.kind);
            if (layer.features.size() != expected.size())
                throw validation_error(lwhere + ": expected " + std::to_string(expected.size()) +
                                       " features for " + to_string(layer.kind));
            for (const auto& name : expected) {
                auto it = layer.features.find(name);
                if (it == layer.features.end())
                    throw validation_error(lwhere + ": missing feature '" + name + "'");
                if (it->second < 0.0)
                    throw validation_error(lwhere + ": feature '" + name + "' must be >= 0");
            }
        }
    }
}

inline nlohmann::ordered_json model_to_json(const BranchyModel& m) {
    nlohmann::ordered_json j;
    j["name"] = m.name;
    j["input_bytes"] = m.input_bytes;
    j["branches"] = nlohmann::ordered_json::array();
    for (const ExitBranch& br : m.branches) {
        nlohmann::ordered_json jb;
        jb["exit_index"] = br.exit_index;
        jb["accuracy"] = br.accuracy;
        jb["layers"] = nlohmann::ordered_json::array();
        for (const LayerSpec& layer : br.layers) {
            nlohmann::ordered_json jl;
            jl["kind"] = to_string(layer.kind);
            jl["features"] = nlohmann::ordered_json::object();
            for (const auto& name : feature_names(layer.kind))
                jl["features"][name] = layer.feature(name);
            jl["output_bytes"] = layer.output_bytes;
            jb["layers"].push_back(std::move(jl));
        }
        j["branches"].push_back(std::move(jb));
    }
    return j;
}

inline BranchyModel model_from_json(const nlohmann::json& j) {
    BranchyModel m;
    try {
        m.name = j.at("name").get<std::string>();
        m.input_bytes = j.at("input_bytes").get<std::int64_t>();
        for (const auto& jb : j.at("branches")) {
            ExitBranch br;
            br.exit_index = jb.at("exit_index").get<int>();
            br.accuracy = jb.at("accuracy").get<double>();
            int id = 0;
            for (const auto& jl : jb.at("layers")) {
                LayerSpec layer;
                layer.id = ++id;
                layer.kind = layer_kind_from_string(jl.at("kind").get<std::string>());
                for (const auto& [key, value] : jl.at("features").items())
                    layer.features[key] = value.get<double>();
                layer.output_bytes = jl.at("output_bytes").get<std::int64_t>();
                br.layers.push_back(std::move(layer));
            }
            m.branches.push_back(std::move(br));
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad model JSON: ") + e.what());
    }
    validate_model(m);
    return m;
}

inline BranchyModel load_model(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return model_from_json(j);
}

inline void write_model(const BranchyModel& m, const std::string& path) {
    validate_model(m);
    write_text_file(path, model_to_json(m).dump(2) + "\n");
}

}  // namespace edgeplan
