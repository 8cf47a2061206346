#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "edgeplan/common.hpp"

namespace edgeplan {

struct BandwidthSample {
    std::int64_t timestamp_ms = 0;
    double bandwidth_kbps = 0.0;
};

struct BandwidthTrace {
    std::string source;
    std::vector<BandwidthSample> samples;  // timestamps strictly increasing
};

inline void validate_trace(const BandwidthTrace& t) {
    if (t.samples.empty()) throw validation_error("trace has no samples");
    for (std::size_t i = 0; i < t.samples.size(); ++i) {
        if (t.samples[i].bandwidth_kbps <= 0.0)
            throw validation_error("trace sample " + std::to_string(i + 1) +
                                   ": bandwidth must be > 0 kbps");
        if (i > 0 && t.samples[i].timestamp_ms <= t.samples[i - 1].timestamp_ms)
            throw validation_error("trace sample " + std::to_string(i + 1) +
                                   ": timestamps must be strictly increasing");
    }
}

inline const std::string kTraceHeader = "timestamp_ms,bandwidth_kbps";

// Canonical trace CSV: timestamp_ms,bandwidth_kbps.
inline BandwidthTrace trace_from_csv(const std::string& content, const std::string& source) {
    BandwidthTrace t;
    t.source = source;
    auto lines = read_lines(content);
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == kTraceHeader) start = 1;
    for (std::size_t ln = start; ln < lines.size(); ++ln) {
        std::string line = trim(lines[ln]);
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 2)
            throw parse_error(source + " line " + std::to_string(ln + 1) + ": expected 2 columns");
        BandwidthSample s;
        s.timestamp_ms = parse_int(trim(cols[0]), "timestamp_ms");
        s.bandwidth_kbps = parse_double(trim(cols[1]), "bandwidth_kbps");
        t.samples.push_back(s);
    }
    validate_trace(t);
    return t;
}

// Adapter for raw cellular logs shaped as timestamp_ms,bytes,interval_ms;
// bandwidth follows as bytes*8/interval_ms kbps.
inline BandwidthTrace trace_from_raw_log(const std::string& content, const std::string& source) {
    BandwidthTrace t;
    t.source = source;
    auto lines = read_lines(content);
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == "timestamp_ms,bytes,interval_ms") start = 1;
    for (std::size_t ln = start; ln < lines.size(); ++ln) {
        std::string line = trim(lines[ln]);
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 3)
            throw parse_error(source + " line " + std::to_string(ln + 1) + ": expected 3 columns");
        BandwidthSample s;
        s.timestamp_ms = parse_int(trim(cols[0]), "timestamp_ms");
        double bytes = parse_double(trim(cols[1]), "bytes");
        double interval = parse_double(trim(cols[2]), "interval_ms");
        if (interval <= 0.0)
            throw validation_error(source + " line " + std::to_string(ln + 1) +
                                   ": interval_ms must be > 0");
        s.bandwidth_kbps = bytes * 8.0 / interval;
        t.samples.push_back(s);
    }
    validate_trace(t);
    return t;
}

inline BandwidthTrace load_trace(const std::string& path, const std::string& format = "canonical") {
    if (format == "canonical") return trace_from_csv(read_text_file(path), path);
    if (format == "raw") return trace_from_raw_log(read_text_file(path), path);
    throw validation_error("unknown trace format '" + format + "'");
}

inline std::string trace_to_csv(const BandwidthTrace& t) {
    std::string out = kTraceHeader + "\n";
    for (const BandwidthSample& s : t.samples)
        out += std::to_string(s.timestamp_ms) + "," + format_double(s.bandwidth_kbps) + "\n";
    return out;
}

inline void write_trace(const BandwidthTrace& t, const std::string& path) {
    validate_trace(t);
    write_text_file(path, trace_to_csv(t));
}

// --- chunked state traces ---------------------------------------------------

// One throughput chunk of a session trace: mean bandwidth over [start_s, end_s).
struct StateChunk {
    double start_s = 0.0;
    double end_s = 0.0;
    double avg_bandwidth_kbps = 0.0;
};

struct StateTrace {
    std::string source;
    std::vector<StateChunk> chunks;
};

inline const std::string kStateTraceHeader = "start_s,end_s,avg_bandwidth_kbps";

inline StateTrace state_trace_from_csv(const std::string& content, const std::string& source) {
    StateTrace t;
    t.source = source;
    auto lines = read_lines(content);
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == kStateTraceHeader) start = 1;
    for (std::size_t ln = start; ln < lines.size(); ++ln) {
        std::string line = trim(lines[ln]);
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() != 3)
            throw parse_error(source + " line " + std::to_string(ln + 1) + ": expected 3 columns");
        StateChunk c;
        c.start_s = parse_double(trim(cols[0]), "start_s");
        c.end_s = parse_double(trim(cols[1]), "end_s");
        c.avg_bandwidth_kbps = parse_double(trim(cols[2]), "avg_bandwidth_kbps");
        if (c.end_s <= c.start_s)
            throw validation_error(source + " line " + std::to_string(ln + 1) +
                                   ": end_s must be > start_s");
        if (c.avg_bandwidth_kbps <= 0.0)
            throw validation_error(source + " line " + std::to_string(ln + 1) +
                                   ": avg_bandwidth_kbps must be > 0");
        t.chunks.push_back(c);
    }
    if (t.chunks.empty()) throw validation_error(source + ": state trace has no chunks");
    return t;
}

inline StateTrace load_state_trace(const std::string& path) {
    return state_trace_from_csv(read_text_file(path), path);
}

// Collapses each session trace to its mean chunk bandwidth, then dedups
// exact duplicates and sorts ascending. The result is the bandwidth state
// list a configuration map is built over.
inline std::vector<double> extract_states(const std::vector<StateTrace>& traces) {
    std::vector<double> states;
    states.reserve(traces.size());
    for (const StateTrace& t : traces) {
        double sum = 0.0;
        for (const StateChunk& c : t.chunks) sum += c.avg_bandwidth_kbps;
        states.push_back(sum / static_cast<double>(t.chunks.size()));
    }
    std::sort(states.begin(), states.end());
    states.erase(std::unique(states.begin(), states.end()), states.end());
    return states;
}

// Plain state list file: one header line then one state per row.
inline std::vector<double> states_from_csv(const std::string& content, const std::string& source) {
    std::vector<double> states;
    auto lines = read_lines(content);
    std::size_t start = 0;
    if (!lines.empty() && trim(lines[0]) == "state_kbps") start = 1;
    for (std::size_t ln = start; ln < lines.size(); ++ln) {
        std::string line = trim(lines[ln]);
        if (line.empty()) continue;
        double v = parse_double(line, "state_kbps");
        if (v <= 0.0)
            throw validation_error(source + " line " + std::to_string(ln + 1) +
                                   ": state_kbps must be > 0");
        states.push_back(v);
    }
    if (states.empty()) throw validation_error(source + ": no states");
    return states;
}

inline std::vector<double> load_states(const std::string& path) {
    return states_from_csv(read_text_file(path), path);
}

// --- trace shaping ----------------------------------------------------------

// Affine min-max rescale of the bandwidth values into [lo_kbps, hi_kbps].
// A constant trace maps to the midpoint of the target range.
inline BandwidthTrace rescale_trace(const BandwidthTrace& t, double lo_kbps, double hi_kbps) {
    if (!(0.0 < lo_kbps && lo_kbps < hi_kbps))
        throw validation_error("rescale range must satisfy 0 < lo < hi");
    validate_trace(t);
    double mn = t.samples[0].bandwidth_kbps;
    double mx = mn;
    for (const BandwidthSample& s : t.samples) {
        mn = std::min(mn, s.bandwidth_kbps);
        mx = std::max(mx, s.bandwidth_kbps);
    }
    BandwidthTrace out = t;
    if (mn == mx) {
        double mid = (lo_kbps + hi_kbps) / 2.0;
        for (BandwidthSample& s : out.samples) s.bandwidth_kbps = mid;
        return out;
    }
    double scale = (hi_kbps - lo_kbps) / (mx - mn);
    for (BandwidthSample& s : out.samples)
        s.bandwidth_kbps = lo_kbps + (s.bandwidth_kbps - mn) * scale;
    return out;
}

// Clamps bandwidth values into [lo_kbps, hi_kbps] without rescaling.
inline BandwidthTrace clamp_trace(const BandwidthTrace& t, double lo_kbps, double hi_kbps) {
    if (!(0.0 < lo_kbps && lo_kbps < hi_kbps))
        throw validation_error("clamp range must satisfy 0 < lo < hi");
    validate_trace(t);
    BandwidthTrace out = t;
    for (BandwidthSample& s : out.samples)
        s.bandwidth_kbps = std::clamp(s.bandwidth_kbps, lo_kbps, hi_kbps);
    return out;
}

}  // namespace edgeplan
