#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "edgeplan/common.hpp"
#include "edgeplan/model.hpp"

namespace edgeplan {

enum class Side { Device, Edge };

inline std::string to_string(Side s) {
    return s == Side::Device ? "Device" : "Edge";
}

inline Side side_from_string(const std::string& s) {
    if (s == "Device") return Side::Device;
    if (s == "Edge") return Side::Edge;
    throw parse_error("unknown side '" + s + "'");
}

// One profiled layer execution.
struct ProfileRecord {
    LayerKind kind = LayerKind::Relu;
    Side side = Side::Device;
    std::map<std::string, double> features;
    double latency_ms = 0.0;
};

// Linear model for one (kind, side) pair: latency = intercept + w . features.
struct LayerRegression {
    double intercept = 0.0;
    std::vector<double> weights;  // aligned with feature_names(kind)
    double rmse = 0.0;
    int samples = 0;
};

struct SkippedPair {
    LayerKind kind;
    Side side;
    int samples;
};

struct predict_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct fit_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

class LatencyPredictor {
  public:
    void set(LayerKind kind, Side side, LayerRegression reg) {
        table_[key(kind, side)] = std::move(reg);
    }

    bool has(LayerKind kind, Side side) const {
        return table_.find(key(kind, side)) != table_.end();
    }

    const LayerRegression& regression(LayerKind kind, Side side) const {
        auto it = table_.find(key(kind, side));
        if (it == table_.end())
            throw predict_error("no regression model for (" + to_string(kind) + ", " +
                                to_string(side) + ")");
        return it->second;
    }

    // Predicted layer latency in ms, clamped at zero.
    double predict(const LayerSpec& layer, Side side) const {
        const LayerRegression& reg = regression(layer.kind, side);
        const auto& names = feature_names(layer.kind);
        double v = reg.intercept;
        for (std::size_t i = 0; i < names.size(); ++i)
            v += reg.weights[i] * layer.feature(names[i]);
        return std::max(0.0, v);
    }

    std::vector<SkippedPair> skipped;  // pairs with too few samples to fit

  private:
    static std::pair<int, int> key(LayerKind kind, Side side) {
        return {static_cast<int>(kind), static_cast<int>(side)};
    }
    std::map<std::pair<int, int>, LayerRegression> table_;
};

// --- ordinary least squares ------------------------------------------------

namespace detail {

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// Returns false if the matrix is numerically singular.
inline bool solve_linear(std::vector<std::vector<double>>& a, std::vector<double>& b) {
    const std::size_t n = a.size();
    double scale = 0.0;
    for (const auto& row : a)
        for (double v : row) scale = std::max(scale, std::fabs(v));
    if (scale == 0.0) return false;
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t pivot = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::fabs(a[r][col]) > std::fabs(a[pivot][col])) pivot = r;
        if (std::fabs(a[pivot][col]) <= 1e-12 * scale) return false;
        std::swap(a[col], a[pivot]);
        std::swap(b[col], b[pivot]);
        for (std::size_t r = col + 1; r < n; ++r) {
            double f = a[r][col] / a[col][col];
            for (std::size_t c = col; c < n; ++c) a[r][c] -= f * a[col][c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = n; i-- > 0;) {
        double v = b[i];
        for (std::size_t c = i + 1; c < n; ++c) v -= a[i][c] * b[c];
        b[i] = v / a[i][i];
    }
    return true;
}

}  // namespace detail

// Fits one linear model per (kind, side) pair present in the records.
// Pairs with fewer than (#features + 2) samples are skipped and reported on
// the returned predictor. A degenerate design matrix (collinear or constant
// feature columns) is an error naming the offending pair.
inline LatencyPredictor fit(const std::vector<ProfileRecord>& records) {
    std::map<std::pair<int, int>, std::vector<const ProfileRecord*>> groups;
    for (const ProfileRecord& r : records)
        groups[{static_cast<int>(r.kind), static_cast<int>(r.side)}].push_back(&r);

    LatencyPredictor pred;
    for (const auto& [k, rows] : groups) {
        LayerKind kind = static_cast<LayerKind>(k.first);
        Side side = static_cast<Side>(k.second);
        const auto& names = feature_names(kind);
        const std::size_t nf = names.size();
        const std::size_t n = rows.size();
        if (n < nf + 2) {
            pred.skipped.push_back({kind, side, static_cast<int>(n)});
            continue;
        }

        // Center columns before forming the normal equations; this keeps the
        // Gram matrix well conditioned for large size features.
        std::vector<double> xmean(nf, 0.0);
        double ymean = 0.0;
        for (const ProfileRecord* r : rows) {
            for (std::size_t f = 0; f < nf; ++f) {
                auto it = r->features.find(names[f]);
                if (it == r->features.end())
                    throw fit_error("profile record for (" + to_string(kind) + ", " +
                                    to_string(side) + ") missing feature '" + names[f] + "'");
                xmean[f] += it->second;
            }
            ymean += r->latency_ms;
        }
        for (double& v : xmean) v /= static_cast<double>(n);
        ymean /= static_cast<double>(n);

        std::vector<std::vector<double>> gram(nf, std::vector<double>(nf, 0.0));
        std::vector<double> rhs(nf, 0.0);
        for (const ProfileRecord* r : rows) {
            std::array<double, 8> cx{};
            for (std::size_t f = 0; f < nf; ++f)
                cx[f] = r->features.at(names[f]) - xmean[f];
            double cy = r->latency_ms - ymean;
            for (std::size_t i = 0; i < nf; ++i) {
                for (std::size_t j = 0; j < nf; ++j) gram[i][j] += cx[i] * cx[j];
                rhs[i] += cx[i] * cy;
            }
        }

        if (!detail::solve_linear(gram, rhs))
            throw fit_error("degenerate feature matrix for (" + to_string(kind) + ", " +
                            to_string(side) + "): columns " + names[0] +
                            (nf > 1 ? ("/" + names[1]) : std::string()) +
                            " are collinear or constant");

        LayerRegression reg;
        reg.weights = rhs;
        reg.intercept = ymean;
        for (std::size_t f = 0; f < nf; ++f) reg.intercept -= reg.weights[f] * xmean[f];
        reg.samples = static_cast<int>(n);

        double sse = 0.0;
        for (const ProfileRecord* r : rows) {
            double fitv = reg.intercept;
            for (std::size_t f = 0; f < nf; ++f)
                fitv += reg.weights[f] * r->features.at(names[f]);
            double e = r->latency_ms - fitv;
            sse += e * e;
        }
        reg.rmse = std::sqrt(sse / static_cast<double>(n));
        pred.set(kind, side, std::move(reg));
    }
    return pred;
}

// --- profile CSV -----------------------------------------------------------

inline const std::string kProfileHeader = "kind,side,latency_ms,features";

inline std::string profiles_to_csv(const std::vector<ProfileRecord>& records) {
    std::string out = kProfileHeader + "\n";
    for (const ProfileRecord& r : records) {
        out += to_string(r.kind) + "," + to_string(r.side) + "," + format_double(r.latency_ms) + ",";
        const auto& names = feature_names(r.kind);
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) out += ";";
            auto it = r.features.find(names[i]);
            if (it == r.features.end())
                throw validation_error("profile record missing feature '" + names[i] + "'");
            out += names[i] + "=" + format_double(it->second);
        }
        out += "\n";
    }
    return out;
}

inline std::vector<ProfileRecord> profiles_from_csv(const std::string& content) {
    std::vector<ProfileRecord> records;
    auto lines = read_lines(content);
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == kProfileHeader) start = 1;
    for (std::size_t ln = start; ln < lines.size(); ++ln) {
        std::string line = trim(lines[ln]);
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 4)
            throw parse_error("profiles line " + std::to_string(ln + 1) + ": expected 4 columns");
        ProfileRecord r;
        r.kind = layer_kind_from_string(trim(cols[0]));
        r.side = side_from_string(trim(cols[1]));
        r.latency_ms = parse_double(trim(cols[2]), "latency_ms");
        if (r.latency_ms <= 0.0)
            throw validation_error("profiles line " + std::to_string(ln + 1) +
                                   ": latency_ms must be > 0");
        for (const auto& item : split(cols[3], ';')) {
            auto kv = split(trim(item), '=');
            if (kv.size() != 2)
                throw parse_error("profiles line " + std::to_string(ln + 1) +
                                  ": bad feature item '" + item + "'");
            r.features[trim(kv[0])] = parse_double(trim(kv[1]), kv[0]);
        }
        records.push_back(std::move(r));
    }
    return records;
}

inline std::vector<ProfileRecord> load_profiles(const std::string& path) {
    return profiles_from_csv(read_text_file(path));
}

inline void write_profiles(const std::vector<ProfileRecord>& records, const std::string& path) {
    write_text_file(path, profiles_to_csv(records));
}

// --- predictor JSON --------------------------------------------------------

inline nlohmann::ordered_json predictor_to_json(const LatencyPredictor& pred) {
    nlohmann::ordered_json j;
    j["models"] = nlohmann::ordered_json::array();
    for (LayerKind kind : all_layer_kinds()) {
        for (Side side : {Side::Device, Side::Edge}) {
            if (!pred.has(kind, side)) continue;
            const LayerRegression& reg = pred.regression(kind, side);
            nlohmann::ordered_json jm;
            jm["kind"] = to_string(kind);
            jm["side"] = to_string(side);
            jm["intercept"] = reg.intercept;
            jm["weights"] = nlohmann::ordered_json::object();
            const auto& names = feature_names(kind);
            for (std::size_t i = 0; i < names.size(); ++i) jm["weights"][names[i]] = reg.weights[i];
            jm["samples"] = reg.samples;
            jm["rmse"] = reg.rmse;
            j["models"].push_back(std::move(jm));
        }
    }
    j["skipped"] = nlohmann::ordered_json::array();
    for (const SkippedPair& s : pred.skipped) {
        nlohmann::ordered_json js;
        js["kind"] = to_string(s.kind);
        js["side"] = to_string(s.side);
        js["samples"] = s.samples;
        j["skipped"].push_back(std::move(js));
    }
    return j;
}

inline LatencyPredictor predictor_from_json(const nlohmann::json& j) {
    LatencyPredictor pred;
    try {
        for (const auto& jm : j.at("models")) {
            LayerKind kind = layer_kind_from_string(jm.at("kind").get<std::string>());
            Side side = side_from_string(jm.at("side").get<std::string>());
            LayerRegression reg;
            reg.intercept = jm.at("intercept").get<double>();
            const auto& names = feature_names(kind);
            for (const auto& name : names)
                reg.weights.push_back(jm.at("weights").at(name).get<double>());
            reg.samples = jm.value("samples", 0);
            reg.rmse = jm.value("rmse", 0.0);
            pred.set(kind, side, std::move(reg));
        }
        if (j.contains("skipped")) {
            for (const auto& js : j.at("skipped"))
                pred.skipped.push_back({layer_kind_from_string(js.at("kind").get<std::string>()),
                                        side_from_string(js.at("side").get<std::string>()),
                                        js.at("samples").get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad predictor JSON: ") + e.what());
    }
    return pred;
}

inline LatencyPredictor load_predictor(const std::string& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(path + ": " + e.what());
    }
    return predictor_from_json(j);
}

inline void write_predictor(const LatencyPredictor& pred, const std::string& path) {
    write_text_file(path, predictor_to_json(pred).dump(2) + "\n");
}

// --- synthetic profile generation ------------------------------------------

// Ground-truth linear coefficients used to synthesize profiling data.
struct GroundTruthTable {
    std::map<std::pair<int, int>, LayerRegression> coeffs;

    void set(LayerKind kind, Side side, double intercept, std::vector<double> weights) {
        LayerRegression reg;
        reg.intercept = intercept;
        reg.weights = std::move(weights);
        coeffs[{static_cast<int>(kind), static_cast<int>(side)}] = std::move(reg);
    }

    const LayerRegression& at(LayerKind kind, Side side) const {
        auto it = coeffs.find({static_cast<int>(kind), static_cast<int>(side)});
        if (it == coeffs.end())
            throw validation_error("ground truth table missing (" + to_string(kind) + ", " +
                                   to_string(side) + ")");
        return it->second;
    }

    LatencyPredictor as_predictor() const {
        LatencyPredictor pred;
        for (const auto& [k, reg] : coeffs)
            pred.set(static_cast<LayerKind>(k.first), static_cast<Side>(k.second), reg);
        return pred;
    }
};

// Default calibration: a fast edge server with a fixed per-layer dispatch
// overhead, and a device whose per-unit compute cost is 20x the edge's.
inline GroundTruthTable ground_truth_default() {
    GroundTruthTable t;
    t.set(LayerKind::Convolutional, Side::Edge, 0.30, {5e-4, 8e-4});
    t.set(LayerKind::Relu, Side::Edge, 0.10, {4e-6});
    t.set(LayerKind::Pooling, Side::Edge, 0.12, {5e-6, 5e-6});
    t.set(LayerKind::LocalResponseNormalization, Side::Edge, 0.15, {1e-5});
    t.set(LayerKind::Dropout, Side::Edge, 0.10, {2e-6});
    t.set(LayerKind::FullyConnected, Side::Edge, 0.20, {2e-5, 2e-4});

    t.set(LayerKind::Convolutional, Side::Device, 0.50, {1e-2, 1.6e-2});
    t.set(LayerKind::Relu, Side::Device, 0.08, {8e-5});
    t.set(LayerKind::Pooling, Side::Device, 0.10, {1e-4, 1e-4});
    t.set(LayerKind::LocalResponseNormalization, Side::Device, 0.12, {2e-4});
    t.set(LayerKind::Dropout, Side::Device, 0.08, {4e-5});
    t.set(LayerKind::FullyConnected, Side::Device, 0.15, {4e-4, 4e-3});
    return t;
}

// Alternate calibration where every device coefficient is exactly 20x its
// edge counterpart; yields a device-only latency above 2 s on the bundled
// model, for deadline-sweep studies.
inline GroundTruthTable ground_truth_device20x() {
    GroundTruthTable t;
    t.set(LayerKind::Convolutional, Side::Edge, 1.0, {2e-3, 1.3e-2});
    t.set(LayerKind::Relu, Side::Edge, 0.10, {2e-5});
    t.set(LayerKind::Pooling, Side::Edge, 0.15, {2e-5, 2e-5});
    t.set(LayerKind::LocalResponseNormalization, Side::Edge, 0.15, {5e-5});
    t.set(LayerKind::Dropout, Side::Edge, 0.10, {1e-5});
    t.set(LayerKind::FullyConnected, Side::Edge, 0.20, {1e-4, 1e-3});
    for (LayerKind kind : all_layer_kinds()) {
        const LayerRegression& e = t.at(kind, Side::Edge);
        std::vector<double> w = e.weights;
        for (double& v : w) v *= 20.0;
        t.set(kind, Side::Device, e.intercept * 20.0, std::move(w));
    }
    return t;
}

inline GroundTruthTable ground_truth_preset(const std::string& name) {
    if (name == "default") return ground_truth_default();
    if (name == "device20x") return ground_truth_device20x();
    throw validation_error("unknown ground truth preset '" + name + "'");
}

namespace detail {

struct FeatureRange {
    double lo, hi;
};

inline FeatureRange feature_range(LayerKind kind, const std::string& name) {
    switch (kind) {
        case LayerKind::Convolutional:
            return name == "input_feature_maps" ? FeatureRange{3, 512} : FeatureRange{50, 5000};
        case LayerKind::Pooling:
            return name == "input_size" ? FeatureRange{1024, 131072} : FeatureRange{256, 32768};
        case LayerKind::FullyConnected:
            return name == "input_size" ? FeatureRange{64, 8192} : FeatureRange{10, 4096};
        default:
            return FeatureRange{256, 131072};
    }
}

}  // namespace detail

// Draws per-kind features uniformly from plausible ranges and labels them
// with noisy ground-truth latencies (noise ~ N(0, noise_sd), result clamped
// to stay positive). Reproducible for a fixed seed.
inline std::vector<ProfileRecord> generate_synthetic_profiles(const GroundTruthTable& truth,
                                                              int samples_per_pair,
                                                              double noise_sd,
                                                              std::uint64_t seed) {
    if (samples_per_pair < 0) throw validation_error("samples_per_pair must be >= 0");
    if (noise_sd < 0.0) throw validation_error("noise_sd must be >= 0");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    std::vector<ProfileRecord> out;
    for (LayerKind kind : all_layer_kinds()) {
        for (Side side : {Side::Device, Side::Edge}) {
            const LayerRegression& reg = truth.at(kind, side);
            const auto& names = feature_names(kind);
            for (int s = 0; s < samples_per_pair; ++s) {
                ProfileRecord r;
                r.kind = kind;
                r.side = side;
                double v = reg.intercept;
                for (std::size_t f = 0; f < names.size(); ++f) {
                    auto range = detail::feature_range(kind, names[f]);
                    std::uniform_real_distribution<double> u(range.lo, range.hi);
                    double x = u(rng);
                    r.features[names[f]] = x;
                    v += reg.weights[f] * x;
                }
                if (noise_sd > 0.0) v += noise_sd * noise(rng);
                r.latency_ms = std::max(v, 1e-6);
                out.push_back(std::move(r));
            }
        }
    }
    return out;
}

}  // namespace edgeplan
