#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "edgeplan/config_map.hpp"
#include "edgeplan/online.hpp"
#include "edgeplan/planner.hpp"
#include "edgeplan/trace.hpp"

namespace edgeplan {

enum class ReplayMode { Static, Dynamic, DeviceOnly, EdgeOnly, PartitionOnly };

inline std::string to_string(ReplayMode m) {
    switch (m) {
        case ReplayMode::Static: return "static";
        case ReplayMode::Dynamic: return "dynamic";
        case ReplayMode::DeviceOnly: return "device_only";
        case ReplayMode::EdgeOnly: return "edge_only";
        case ReplayMode::PartitionOnly: return "partition_only";
    }
    throw validation_error("unknown replay mode value");
}

inline ReplayMode replay_mode_from_string(const std::string& s) {
    for (ReplayMode m : {ReplayMode::Static, ReplayMode::Dynamic, ReplayMode::DeviceOnly,
                         ReplayMode::EdgeOnly, ReplayMode::PartitionOnly})
        if (to_string(m) == s) return m;
    throw validation_error("unknown replay mode '" + s + "'");
}

struct ReplayConfig {
    ReplayMode mode = ReplayMode::Static;
    double latency_requirement_ms = 0.0;
    std::int64_t measurement_interval_ms = 1000;
    std::optional<ConfigurationMap> map;          // dynamic mode only
    DetectorConfig detector;                      // dynamic mode only
};

struct ReplayStep {
    std::int64_t timestamp_ms = 0;
    double bandwidth_kbps = 0.0;   // bandwidth in effect while the step ran
    double measured_kbps = 0.0;    // measurement the decision was based on
    Strategy strategy;
    double latency_ms = 0.0;
    double throughput_fps = 0.0;
    double reward = 0.0;
    bool feasible = false;
    bool switched = false;         // dynamic mode: map lookup happened
    double state_kbps = 0.0;       // dynamic mode: detector state estimate
};

// Identification of a replay, carried along so comparisons can refuse to
// line up reports from different experiments.
struct ReplayMeta {
    std::string trace_source;
    std::size_t trace_samples = 0;
    std::string model_name;
    double latency_requirement_ms = 0.0;
    std::int64_t measurement_interval_ms = 1000;
    std::string mode;
};

constexpr int kCdfPoints = 100;

struct ReplayReport {
    ReplayMeta meta;
    std::vector<ReplayStep> steps;
    double mean_throughput_fps = 0.0;
    double median_throughput_fps = 0.0;
    double feasible_fraction = 0.0;
    int strategy_switches = 0;  // steps whose strategy differs from the previous step
    std::vector<double> throughput_cdf;  // value at quantile k/100, k = 1..100
    std::vector<double> reward_cdf;
};

// Empirical quantile on the fixed 100-point grid (nearest-rank rule).
inline std::vector<double> quantile_grid(std::vector<double> values) {
    if (values.empty()) throw validation_error("no values for quantile grid");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    std::vector<double> grid;
    grid.reserve(kCdfPoints);
    for (int k = 1; k <= kCdfPoints; ++k) {
        std::size_t rank = (static_cast<std::size_t>(k) * n + kCdfPoints - 1) / kCdfPoints;
        grid.push_back(values[rank - 1]);
    }
    return grid;
}

namespace detail {

// Most latency-favorable strategy overall; used when no strategy meets the
// requirement but the replay still has to run something.
inline Strategy fastest_strategy(const BranchyModel& model,
                                 const LatencyPredictor& pred,
                                 double bandwidth_kbps) {
    Strategy best;
    double best_lat = std::numeric_limits<double>::infinity();
    for (int i = 1; i <= model.exit_count(); ++i) {
        const int n = static_cast<int>(model.branch(i).layers.size());
        for (int p = 0; p <= n; ++p) {
            double lat = estimate_latency(model, pred, i, p, bandwidth_kbps);
            if (lat < best_lat) {
                best_lat = lat;
                best = {i, p};
            }
        }
    }
    return best;
}

}  // namespace detail

// Replays a bandwidth trace at a fixed measurement interval. The trace is
// step-interpolated (each sample holds until the next). Decisions at step k
// see the bandwidth measured over the previous interval; the step's metrics
// are evaluated at the bandwidth actually in effect, so a configurator that
// chases stale measurements pays for it.
inline ReplayReport replay(const BranchyModel& model,
                           const LatencyPredictor& pred,
                           const BandwidthTrace& trace,
                           const ReplayConfig& cfg) {
    validate_trace(trace);
    if (cfg.latency_requirement_ms <= 0.0)
        throw validation_error("latency requirement must be > 0 ms");
    if (cfg.measurement_interval_ms <= 0)
        throw validation_error("measurement interval must be > 0 ms");
    if (cfg.mode == ReplayMode::Dynamic && !cfg.map)
        throw validation_error("dynamic replay needs a configuration map");

    std::optional<OnlineOptimizer> optimizer;
    if (cfg.mode == ReplayMode::Dynamic) optimizer.emplace(*cfg.map, cfg.detector);

    ReplayReport report;
    report.meta.trace_source = trace.source;
    report.meta.trace_samples = trace.samples.size();
    report.meta.model_name = model.name;
    report.meta.latency_requirement_ms = cfg.latency_requirement_ms;
    report.meta.measurement_interval_ms = cfg.measurement_interval_ms;
    report.meta.mode = to_string(cfg.mode);

    const int top_exit = model.exit_count();
    const int top_layers = static_cast<int>(model.branch(top_exit).layers.size());

    std::size_t cursor = 0;  // index of the sample currently in effect
    double prev_bandwidth = trace.samples.front().bandwidth_kbps;
    for (std::int64_t t = trace.samples.front().timestamp_ms;
         t <= trace.samples.back().timestamp_ms; t += cfg.measurement_interval_ms) {
        while (cursor + 1 < trace.samples.size() && trace.samples[cursor + 1].timestamp_ms <= t)
            ++cursor;
        const double actual = trace.samples[cursor].bandwidth_kbps;
        const double measured = report.steps.empty() ? actual : prev_bandwidth;

        ReplayStep step;
        step.timestamp_ms = t;
        step.bandwidth_kbps = actual;
        step.measured_kbps = measured;
        switch (cfg.mode) {
            case ReplayMode::Static: {
                auto plan = plan_static(model, pred, measured, cfg.latency_requirement_ms);
                step.strategy = plan ? Strategy{plan->exit_point, plan->partition_point}
                                     : detail::fastest_strategy(model, pred, measured);
                break;
            }
            case ReplayMode::Dynamic: {
                OnlineStep os = optimizer->step(measured);
                step.strategy = os.strategy;
                step.switched = os.switched;
                step.state_kbps = os.state_kbps;
                break;
            }
            case ReplayMode::DeviceOnly:
                step.strategy = {top_exit, 0};
                break;
            case ReplayMode::EdgeOnly:
                step.strategy = {top_exit, top_layers};
                break;
            case ReplayMode::PartitionOnly: {
                CoInferencePlan p = best_partition(model, pred, top_exit, measured);
                step.strategy = {p.exit_point, p.partition_point};
                break;
            }
        }

        RewardBreakdown rb =
            compute_reward(model, pred, step.strategy, actual, cfg.latency_requirement_ms);
        step.latency_ms = rb.latency_ms;
        step.throughput_fps = rb.throughput_fps;
        step.reward = rb.reward;
        step.feasible = rb.feasible;
        report.steps.push_back(step);
        prev_bandwidth = actual;
    }

    std::vector<double> tps, rewards;
    tps.reserve(report.steps.size());
    rewards.reserve(report.steps.size());
    double tp_sum = 0.0;
    std::size_t feasible_count = 0;
    for (std::size_t i = 0; i < report.steps.size(); ++i) {
        const ReplayStep& s = report.steps[i];
        tps.push_back(s.throughput_fps);
        rewards.push_back(s.reward);
        tp_sum += s.throughput_fps;
        if (s.feasible) ++feasible_count;
        if (i > 0 && s.strategy != report.steps[i - 1].strategy) ++report.strategy_switches;
    }
    report.mean_throughput_fps = tp_sum / static_cast<double>(tps.size());
    report.throughput_cdf = quantile_grid(tps);
    report.reward_cdf = quantile_grid(rewards);
    report.median_throughput_fps = report.throughput_cdf[kCdfPoints / 2 - 1];
    report.feasible_fraction =
        static_cast<double>(feasible_count) / static_cast<double>(report.steps.size());
    return report;
}

// --- comparison -------------------------------------------------------------

struct CdfComparison {
    double dominance_fraction = 0.0;  // share of quantile points where a >= b
    double max_gap = 0.0;             // max |a - b| over the grid
    double max_gap_relative = 0.0;    // max gap divided by the larger CDF value seen
    std::vector<double> delta;        // a - b per quantile point
};

struct ReplayComparison {
    ReplayMeta a, b;
    CdfComparison throughput;
    CdfComparison reward;
};

namespace detail {

inline CdfComparison compare_grids(const std::vector<double>& a, const std::vector<double>& b) {
    CdfComparison c;
    int wins = 0;
    double scale = 0.0;
    for (int k = 0; k < kCdfPoints; ++k) {
        double d = a[static_cast<std::size_t>(k)] - b[static_cast<std::size_t>(k)];
        c.delta.push_back(d);
        if (d >= 0.0) ++wins;
        c.max_gap = std::max(c.max_gap, std::fabs(d));
        scale = std::max({scale, std::fabs(a[static_cast<std::size_t>(k)]),
                          std::fabs(b[static_cast<std::size_t>(k)])});
    }
    c.dominance_fraction = static_cast<double>(wins) / kCdfPoints;
    c.max_gap_relative = scale > 0.0 ? c.max_gap / scale : 0.0;
    return c;
}

}  // namespace detail

// Quantile-by-quantile comparison of two replays of the same experiment.
inline ReplayComparison compare(const ReplayReport& a, const ReplayReport& b) {
    auto same = [](const ReplayMeta& x, const ReplayMeta& y) {
        return x.trace_source == y.trace_source && x.trace_samples == y.trace_samples &&
               x.model_name == y.model_name &&
               x.latency_requirement_ms == y.latency_requirement_ms &&
               x.measurement_interval_ms == y.measurement_interval_ms;
    };
    if (!same(a.meta, b.meta))
        throw validation_error("replays cover different experiments (trace, model, requirement "
                               "and interval must match)");
    ReplayComparison cmp;
    cmp.a = a.meta;
    cmp.b = b.meta;
    cmp.throughput = detail::compare_grids(a.throughput_cdf, b.throughput_cdf);
    cmp.reward = detail::compare_grids(a.reward_cdf, b.reward_cdf);
    return cmp;
}

// --- deadline sweep ---------------------------------------------------------

struct DeadlineRow {
    double deadline_ms = 0.0;
    std::string method;
    bool feasible = false;
    double accuracy = 0.0;
    double latency_ms = 0.0;
    int exit_point = 0;
    int partition_point = 0;
};

// Feasibility and achieved accuracy per deadline for the joint planner and
// the three restricted baselines, all at one bandwidth.
inline std::vector<DeadlineRow> accuracy_vs_deadline(const BranchyModel& model,
                                                     const LatencyPredictor& pred,
                                                     double bandwidth_kbps,
                                                     const std::vector<double>& deadlines_ms) {
    if (deadlines_ms.empty()) throw validation_error("no deadlines given");
    const int top_exit = model.exit_count();
    const int top_layers = static_cast<int>(model.branch(top_exit).layers.size());
    std::vector<DeadlineRow> rows;
    for (double deadline : deadlines_ms) {
        if (deadline <= 0.0) throw validation_error("deadlines must be > 0 ms");
        {
            DeadlineRow r;
            r.deadline_ms = deadline;
            r.method = "joint";
            auto plan = plan_static(model, pred, bandwidth_kbps, deadline);
            if (plan) {
                r.feasible = true;
                r.accuracy = plan->accuracy;
                r.latency_ms = plan->predicted_latency_ms;
                r.exit_point = plan->exit_point;
                r.partition_point = plan->partition_point;
            }
            rows.push_back(r);
        }
        auto fixed = [&](const std::string& method, Strategy s) {
            DeadlineRow r;
            r.deadline_ms = deadline;
            r.method = method;
            r.latency_ms = estimate_latency(model, pred, s.exit_point, s.partition_point,
                                            bandwidth_kbps);
            r.feasible = r.latency_ms <= deadline;
            r.accuracy = model.branch(s.exit_point).accuracy;
            r.exit_point = s.exit_point;
            r.partition_point = s.partition_point;
            rows.push_back(r);
        };
        fixed("device_only", {top_exit, 0});
        fixed("edge_only", {top_exit, top_layers});
        CoInferencePlan bp = best_partition(model, pred, top_exit, bandwidth_kbps);
        fixed("partition_only", {bp.exit_point, bp.partition_point});
    }
    return rows;
}

// --- serialization ----------------------------------------------------------

inline std::string replay_steps_to_csv(const ReplayReport& r) {
    std::string out =
        "timestamp_ms,bandwidth_kbps,exit_point,partition_point,latency_ms,throughput_fps,reward,"
        "feasible\n";
    for (const ReplayStep& s : r.steps) {
        out += std::to_string(s.timestamp_ms) + "," + format_double(s.bandwidth_kbps) + "," +
               std::to_string(s.strategy.exit_point) + "," +
               std::to_string(s.strategy.partition_point) + "," + format_double(s.latency_ms) +
               "," + format_double(s.throughput_fps) + "," + format_double(s.reward) + "," +
               (s.feasible ? "1" : "0") + "\n";
    }
    return out;
}

inline std::string replay_cdf_to_csv(const ReplayReport& r) {
    std::string out = "quantile,throughput_fps,reward\n";
    for (int k = 0; k < kCdfPoints; ++k) {
        out += format_double((k + 1) / static_cast<double>(kCdfPoints)) + "," +
               format_double(r.throughput_cdf[static_cast<std::size_t>(k)]) + "," +
               format_double(r.reward_cdf[static_cast<std::size_t>(k)]) + "\n";
    }
    return out;
}

// Dynamic-mode decision log.
inline std::string replay_decisions_to_csv(const ReplayReport& r) {
    std::string out = "timestamp_ms,sample_kbps,state_kbps,exit_point,partition_point,switched\n";
    for (const ReplayStep& s : r.steps) {
        out += std::to_string(s.timestamp_ms) + "," + format_double(s.measured_kbps) + "," +
               format_double(s.state_kbps) + "," + std::to_string(s.strategy.exit_point) + "," +
               std::to_string(s.strategy.partition_point) + "," + (s.switched ? "1" : "0") + "\n";
    }
    return out;
}

inline nlohmann::ordered_json meta_to_json(const ReplayMeta& m) {
    nlohmann::ordered_json j;
    j["trace_source"] = m.trace_source;
    j["trace_samples"] = m.trace_samples;
    j["model_name"] = m.model_name;
    j["latency_requirement_ms"] = m.latency_requirement_ms;
    j["measurement_interval_ms"] = m.measurement_interval_ms;
    j["mode"] = m.mode;
    return j;
}

inline ReplayMeta meta_from_json(const nlohmann::json& j) {
    ReplayMeta m;
    try {
        m.trace_source = j.at("trace_source").get<std::string>();
        m.trace_samples = j.at("trace_samples").get<std::size_t>();
        m.model_name = j.at("model_name").get<std::string>();
        m.latency_requirement_ms = j.at("latency_requirement_ms").get<double>();
        m.measurement_interval_ms = j.at("measurement_interval_ms").get<std::int64_t>();
        m.mode = j.at("mode").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad replay meta JSON: ") + e.what());
    }
    return m;
}

inline nlohmann::ordered_json replay_summary_to_json(const ReplayReport& r) {
    nlohmann::ordered_json j;
    j["meta"] = meta_to_json(r.meta);
    j["steps"] = r.steps.size();
    j["mean_throughput_fps"] = r.mean_throughput_fps;
    j["median_throughput_fps"] = r.median_throughput_fps;
    j["feasible_fraction"] = r.feasible_fraction;
    j["strategy_switches"] = r.strategy_switches;
    j["throughput_cdf"] = r.throughput_cdf;
    j["reward_cdf"] = r.reward_cdf;
    return j;
}

// Rebuilds the comparison-relevant part of a report (meta, summary, CDFs)
// from a saved summary; per-step data is not restored.
inline ReplayReport replay_summary_from_json(const nlohmann::json& j) {
    ReplayReport r;
    try {
        r.meta = meta_from_json(j.at("meta"));
        r.mean_throughput_fps = j.at("mean_throughput_fps").get<double>();
        r.median_throughput_fps = j.at("median_throughput_fps").get<double>();
        r.feasible_fraction = j.at("feasible_fraction").get<double>();
        r.strategy_switches = j.at("strategy_switches").get<int>();
        r.throughput_cdf = j.at("throughput_cdf").get<std::vector<double>>();
        r.reward_cdf = j.at("reward_cdf").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(std::string("bad replay summary JSON: ") + e.what());
    }
    if (r.throughput_cdf.size() != static_cast<std::size_t>(kCdfPoints) ||
        r.reward_cdf.size() != static_cast<std::size_t>(kCdfPoints))
        throw validation_error("replay summary CDF grids must have " +
                               std::to_string(kCdfPoints) + " points");
    return r;
}

inline nlohmann::ordered_json comparison_to_json(const ReplayComparison& c) {
    auto side = [](const CdfComparison& g) {
        nlohmann::ordered_json j;
        j["dominance_fraction"] = g.dominance_fraction;
        j["max_gap"] = g.max_gap;
        j["max_gap_relative"] = g.max_gap_relative;
        j["delta"] = g.delta;
        return j;
    };
    nlohmann::ordered_json j;
    j["a"] = meta_to_json(c.a);
    j["b"] = meta_to_json(c.b);
    j["throughput"] = side(c.throughput);
    j["reward"] = side(c.reward);
    return j;
}

inline std::string deadline_rows_to_csv(const std::vector<DeadlineRow>& rows) {
    std::string out = "deadline_ms,method,feasible,accuracy,latency_ms,exit_point,partition_point\n";
    for (const DeadlineRow& r : rows) {
        out += format_double(r.deadline_ms) + "," + r.method + "," + (r.feasible ? "1" : "0") +
               "," + format_double(r.accuracy) + "," + format_double(r.latency_ms) + "," +
               std::to_string(r.exit_point) + "," + std::to_string(r.partition_point) + "\n";
    }
    return out;
}

}  // namespace edgeplan
