// Command line front end for the co-inference planning library.
//
// Exit status: 0 on success, 1 when a plan is infeasible, 2 on bad input,
// 3 on internal failure.

#include <cmath>
#include <filesystem>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "edgeplan/bocpd.hpp"
#include "edgeplan/config_map.hpp"
#include "edgeplan/latency.hpp"
#include "edgeplan/model.hpp"
#include "edgeplan/online.hpp"
#include "edgeplan/planner.hpp"
#include "edgeplan/replay.hpp"
#include "edgeplan/trace.hpp"

namespace fs = std::filesystem;
using namespace edgeplan;

namespace {

std::vector<double> parse_list(const std::string& csv, const std::string& what) {
    std::vector<double> out;
    for (const auto& item : split(csv, ',')) {
        std::string v = trim(item);
        if (v.empty()) continue;
        out.push_back(parse_double(v, what));
    }
    if (out.empty()) throw validation_error("empty list for " + what);
    return out;
}

int cmd_gen_profiles(const std::string& out, const std::string& preset, int samples,
                     double noise_sd, std::uint64_t seed) {
    auto records = generate_synthetic_profiles(ground_truth_preset(preset), samples, noise_sd, seed);
    write_profiles(records, out);
    std::cout << "wrote " << records.size() << " profile records to " << out << "\n";
    return 0;
}

int cmd_fit(const std::string& profiles_path, const std::string& out) {
    auto records = load_profiles(profiles_path);
    if (records.empty()) throw validation_error(profiles_path + ": no profile records");
    LatencyPredictor pred = fit(records);
    write_predictor(pred, out);
    std::cout << "wrote predictor to " << out;
    if (!pred.skipped.empty()) std::cout << " (" << pred.skipped.size() << " pairs skipped)";
    std::cout << "\n";
    return 0;
}

int cmd_plan(const std::string& model_path, const std::string& predictor_path,
             double bandwidth_kbps, double latency_ms) {
    BranchyModel model = load_model(model_path);
    LatencyPredictor pred = load_predictor(predictor_path);
    auto plan = plan_static(model, pred, bandwidth_kbps, latency_ms);
    if (!plan) {
        std::cout << "infeasible\n";
        return 1;
    }
    std::cout << plan_to_json(*plan).dump(2) << "\n";
    return 0;
}

int cmd_build_map(const std::string& model_path, const std::string& predictor_path,
                  const std::string& states_path, const std::string& oboe_dir, double latency_ms,
                  const std::string& out) {
    if (states_path.empty() == oboe_dir.empty())
        throw validation_error("exactly one of --states or --oboe-dir is required");
    BranchyModel model = load_model(model_path);
    LatencyPredictor pred = load_predictor(predictor_path);
    std::vector<double> states;
    if (!states_path.empty()) {
        states = load_states(states_path);
    } else {
        std::vector<StateTrace> traces;
        std::vector<fs::path> files;
        if (!fs::is_directory(oboe_dir))
            throw validation_error(oboe_dir + " is not a directory");
        for (const auto& entry : fs::directory_iterator(oboe_dir))
            if (entry.is_regular_file() && entry.path().extension() == ".csv")
                files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& f : files) traces.push_back(load_state_trace(f.string()));
        if (traces.empty()) throw validation_error(oboe_dir + ": no .csv state traces found");
        states = extract_states(traces);
    }
    ConfigurationMap map = build_map(model, pred, states, latency_ms);
    write_map(map, out);
    std::cout << "wrote " << map.entries.size() << " map entries to " << out << "\n";
    return 0;
}

int cmd_detect(const std::string& trace_path, const std::string& format, double lambda,
               double threshold, const std::string& out) {
    BandwidthTrace trace = load_trace(trace_path, format);
    DetectorConfig cfg;
    cfg.hazard_lambda = lambda;
    cfg.map_drop_threshold = threshold;
    ChangepointDetector detector(cfg);
    std::string csv = "timestamp_ms,sample_kbps,state_kbps,changed\n";
    for (const BandwidthSample& s : trace.samples) {
        DetectorObservation obs = detector.observe(s.bandwidth_kbps);
        csv += std::to_string(s.timestamp_ms) + "," + format_double(s.bandwidth_kbps) + "," +
               format_double(obs.state_kbps) + "," + (obs.changed ? "1" : "0") + "\n";
    }
    write_text_file(out, csv);
    std::cout << "wrote detection log to " << out << "\n";
    return 0;
}

int cmd_simulate(const std::string& mode_name, const std::string& model_path,
                 const std::string& predictor_path, const std::string& trace_path,
                 const std::string& format, const std::string& map_path, double latency_ms,
                 std::int64_t interval_ms, double lambda, double threshold,
                 const std::string& out_dir) {
    ReplayConfig cfg;
    cfg.mode = replay_mode_from_string(mode_name);
    cfg.latency_requirement_ms = latency_ms;
    cfg.measurement_interval_ms = interval_ms;
    cfg.detector.hazard_lambda = lambda;
    cfg.detector.map_drop_threshold = threshold;
    if (cfg.mode == ReplayMode::Dynamic) {
        if (map_path.empty())
            throw validation_error("--map is required for --mode dynamic");
        cfg.map = load_map(map_path);
    } else if (!map_path.empty()) {
        throw validation_error("--map only applies to --mode dynamic");
    }
    BranchyModel model = load_model(model_path);
    LatencyPredictor pred = load_predictor(predictor_path);
    BandwidthTrace trace = load_trace(trace_path, format);

    ReplayReport report = replay(model, pred, trace, cfg);
    fs::create_directories(out_dir);
    write_text_file((fs::path(out_dir) / "steps.csv").string(), replay_steps_to_csv(report));
    write_text_file((fs::path(out_dir) / "cdf.csv").string(), replay_cdf_to_csv(report));
    write_text_file((fs::path(out_dir) / "summary.json").string(),
                    replay_summary_to_json(report).dump(2) + "\n");
    if (cfg.mode == ReplayMode::Dynamic)
        write_text_file((fs::path(out_dir) / "decisions.csv").string(),
                        replay_decisions_to_csv(report));
    double fps2 = std::round(report.mean_throughput_fps * 100.0) / 100.0;
    std::cout << "replayed " << report.steps.size() << " steps into " << out_dir
              << " (mean " << format_double(fps2) << " fps)\n";
    return 0;
}

ReplayReport load_report_dir(const std::string& dir) {
    fs::path p = fs::path(dir) / "summary.json";
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(read_text_file(p.string()));
    } catch (const nlohmann::json::exception& e) {
        throw parse_error(p.string() + ": " + e.what());
    }
    return replay_summary_from_json(j);
}

int cmd_compare(const std::string& a_dir, const std::string& b_dir, const std::string& out) {
    ReplayComparison cmp = compare(load_report_dir(a_dir), load_report_dir(b_dir));
    write_text_file(out, comparison_to_json(cmp).dump(2) + "\n");
    std::cout << "throughput dominance " << format_double(cmp.throughput.dominance_fraction)
              << ", reward dominance " << format_double(cmp.reward.dominance_fraction) << "\n";
    return 0;
}

int cmd_sweep(const std::string& model_path, const std::string& predictor_path,
              const std::string& bandwidths, const std::string& deadlines, double latency_ms,
              double bandwidth_kbps, bool baselines, const std::string& out) {
    if (bandwidths.empty() == deadlines.empty())
        throw validation_error("exactly one of --bandwidths or --deadlines is required");
    BranchyModel model = load_model(model_path);
    LatencyPredictor pred = load_predictor(predictor_path);
    std::string csv;
    if (!bandwidths.empty()) {
        if (latency_ms <= 0.0)
            throw validation_error("--latency-ms is required with --bandwidths");
        csv = "bandwidth_kbps,feasible,exit_point,partition_point,predicted_latency_ms,accuracy\n";
        for (double b : parse_list(bandwidths, "bandwidth_kbps")) {
            auto plan = plan_static(model, pred, b, latency_ms);
            csv += format_double(b) + ",";
            if (plan)
                csv += "1," + std::to_string(plan->exit_point) + "," +
                       std::to_string(plan->partition_point) + "," +
                       format_double(plan->predicted_latency_ms) + "," +
                       format_double(plan->accuracy) + "\n";
            else
                csv += "0,0,0,0,0\n";
        }
    } else if (baselines) {
        if (bandwidth_kbps <= 0.0)
            throw validation_error("--bandwidth-kbps is required with --deadlines");
        csv = deadline_rows_to_csv(
            accuracy_vs_deadline(model, pred, bandwidth_kbps, parse_list(deadlines, "deadline_ms")));
    } else {
        if (bandwidth_kbps <= 0.0)
            throw validation_error("--bandwidth-kbps is required with --deadlines");
        csv = "deadline_ms,feasible,exit_point,partition_point,predicted_latency_ms,accuracy\n";
        for (double d : parse_list(deadlines, "deadline_ms")) {
            auto plan = plan_static(model, pred, bandwidth_kbps, d);
            csv += format_double(d) + ",";
            if (plan)
                csv += "1," + std::to_string(plan->exit_point) + "," +
                       std::to_string(plan->partition_point) + "," +
                       format_double(plan->predicted_latency_ms) + "," +
                       format_double(plan->accuracy) + "\n";
            else
                csv += "0,0,0,0,0\n";
        }
    }
    write_text_file(out, csv);
    std::cout << "wrote sweep to " << out << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"planning and replay toolkit for device-edge co-inference"};
    app.require_subcommand(1);
    std::function<int()> action;

    {
        auto* c = app.add_subcommand("gen-profiles", "generate synthetic layer profiling data");
        auto out = std::make_shared<std::string>();
        auto preset = std::make_shared<std::string>("default");
        auto samples = std::make_shared<int>(100);
        auto noise = std::make_shared<double>(0.01);
        auto seed = std::make_shared<std::uint64_t>(1);
        c->add_option("--out", *out, "output profiles CSV")->required();
        c->add_option("--preset", *preset, "ground truth preset (default|device20x)");
        c->add_option("--samples", *samples, "samples per (kind, side) pair");
        c->add_option("--noise-sd", *noise, "latency noise standard deviation in ms");
        c->add_option("--seed", *seed, "random seed");
        c->callback([=, &action] {
            action = [=] { return cmd_gen_profiles(*out, *preset, *samples, *noise, *seed); };
        });
    }
    {
        auto* c = app.add_subcommand("fit", "fit per-layer latency regressions from profiles");
        auto profiles = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--profiles", *profiles, "input profiles CSV")->required();
        c->add_option("--out", *out, "output predictor JSON")->required();
        c->callback([=, &action] { action = [=] { return cmd_fit(*profiles, *out); }; });
    }
    {
        auto* c = app.add_subcommand("plan", "pick exit and partition for one bandwidth");
        auto model = std::make_shared<std::string>();
        auto pred = std::make_shared<std::string>();
        auto bw = std::make_shared<double>(0.0);
        auto lat = std::make_shared<double>(0.0);
        c->add_option("--model", *model, "model JSON")->required();
        c->add_option("--predictor", *pred, "predictor JSON")->required();
        c->add_option("--bandwidth-kbps", *bw, "uplink bandwidth in kbps")->required();
        c->add_option("--latency-ms", *lat, "latency requirement in ms")->required();
        c->callback([=, &action] { action = [=] { return cmd_plan(*model, *pred, *bw, *lat); }; });
    }
    {
        auto* c = app.add_subcommand("build-map", "precompute optimal strategies per state");
        auto model = std::make_shared<std::string>();
        auto pred = std::make_shared<std::string>();
        auto states = std::make_shared<std::string>();
        auto oboe = std::make_shared<std::string>();
        auto lat = std::make_shared<double>(0.0);
        auto out = std::make_shared<std::string>();
        c->add_option("--model", *model, "model JSON")->required();
        c->add_option("--predictor", *pred, "predictor JSON")->required();
        c->add_option("--states", *states, "state list CSV (state_kbps)");
        c->add_option("--oboe-dir", *oboe, "directory of chunked state traces");
        c->add_option("--latency-ms", *lat, "latency requirement in ms")->required();
        c->add_option("--out", *out, "output map JSON")->required();
        c->callback([=, &action] {
            action = [=] { return cmd_build_map(*model, *pred, *states, *oboe, *lat, *out); };
        });
    }
    {
        auto* c = app.add_subcommand("detect", "run changepoint detection over a trace");
        auto trace = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("canonical");
        auto lambda = std::make_shared<double>(100.0);
        auto threshold = std::make_shared<double>(0.5);
        auto out = std::make_shared<std::string>();
        c->add_option("--trace", *trace, "bandwidth trace CSV")->required();
        c->add_option("--format", *format, "trace format (canonical|raw)");
        c->add_option("--lambda", *lambda, "expected run length (hazard = 1/lambda)");
        c->add_option("--threshold", *threshold, "MAP run-length drop threshold");
        c->add_option("--out", *out, "output detection CSV")->required();
        c->callback([=, &action] {
            action = [=] { return cmd_detect(*trace, *format, *lambda, *threshold, *out); };
        });
    }
    {
        auto* c = app.add_subcommand("simulate", "replay a bandwidth trace under one mode");
        auto mode = std::make_shared<std::string>();
        auto model = std::make_shared<std::string>();
        auto pred = std::make_shared<std::string>();
        auto trace = std::make_shared<std::string>();
        auto format = std::make_shared<std::string>("canonical");
        auto map = std::make_shared<std::string>();
        auto lat = std::make_shared<double>(0.0);
        auto interval = std::make_shared<std::int64_t>(1000);
        auto lambda = std::make_shared<double>(100.0);
        auto threshold = std::make_shared<double>(0.5);
        auto out_dir = std::make_shared<std::string>();
        c->add_option("--mode", *mode,
                      "static|dynamic|device_only|edge_only|partition_only")
            ->required();
        c->add_option("--model", *model, "model JSON")->required();
        c->add_option("--predictor", *pred, "predictor JSON")->required();
        c->add_option("--trace", *trace, "bandwidth trace CSV")->required();
        c->add_option("--format", *format, "trace format (canonical|raw)");
        c->add_option("--map", *map, "configuration map JSON (dynamic mode)");
        c->add_option("--latency-ms", *lat, "latency requirement in ms")->required();
        c->add_option("--interval-ms", *interval, "measurement interval in ms");
        c->add_option("--lambda", *lambda, "detector expected run length");
        c->add_option("--threshold", *threshold, "detector MAP drop threshold");
        c->add_option("--out-dir", *out_dir, "output directory")->required();
        c->callback([=, &action] {
            action = [=] {
                return cmd_simulate(*mode, *model, *pred, *trace, *format, *map, *lat, *interval,
                                    *lambda, *threshold, *out_dir);
            };
        });
    }
    {
        auto* c = app.add_subcommand("compare", "compare two replay output directories");
        auto a = std::make_shared<std::string>();
        auto b = std::make_shared<std::string>();
        auto out = std::make_shared<std::string>();
        c->add_option("--a", *a, "first replay directory")->required();
        c->add_option("--b", *b, "second replay directory")->required();
        c->add_option("--out", *out, "output comparison JSON")->required();
        c->callback([=, &action] { action = [=] { return cmd_compare(*a, *b, *out); }; });
    }
    {
        auto* c = app.add_subcommand("sweep", "tabulate plans across bandwidths or deadlines");
        auto model = std::make_shared<std::string>();
        auto pred = std::make_shared<std::string>();
        auto bandwidths = std::make_shared<std::string>();
        auto deadlines = std::make_shared<std::string>();
        auto lat = std::make_shared<double>(0.0);
        auto bw = std::make_shared<double>(0.0);
        auto baselines = std::make_shared<bool>(false);
        auto out = std::make_shared<std::string>();
        c->add_option("--model", *model, "model JSON")->required();
        c->add_option("--predictor", *pred, "predictor JSON")->required();
        c->add_option("--bandwidths", *bandwidths, "comma separated bandwidths in kbps");
        c->add_option("--deadlines", *deadlines, "comma separated deadlines in ms");
        c->add_option("--latency-ms", *lat, "latency requirement for a bandwidth sweep");
        c->add_option("--bandwidth-kbps", *bw, "bandwidth for a deadline sweep");
        c->add_flag("--baselines", *baselines, "include restricted baselines per deadline");
        c->add_option("--out", *out, "output CSV")->required();
        c->callback([=, &action] {
            action = [=] {
                return cmd_sweep(*model, *pred, *bandwidths, *deadlines, *lat, *bw, *baselines,
                                 *out);
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        return action();
    } catch (const parse_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const validation_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const predict_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const fit_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
