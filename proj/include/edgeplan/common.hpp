#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace edgeplan {

// Input that could not be parsed (bad syntax, wrong column count, ...).
struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input that parsed but violates a documented precondition or invariant.
struct validation_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Shortest round-trip decimal form, locale independent.
inline std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string_view strip_ws(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view raw, const std::string& what) {
    std::string_view s = strip_ws(raw);
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw parse_error("bad number for " + what + ": '" + std::string(raw) + "'");
    return v;
}

inline std::int64_t parse_int(std::string_view raw, const std::string& what) {
    std::string_view s = strip_ws(raw);
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size())
        throw parse_error("bad integer for " + what + ": '" + std::string(raw) + "'");
    return v;
}

inline std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        std::size_t pos = line.find(sep, start);
        if (pos == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

inline std::string trim(std::string_view s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw parse_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw validation_error("cannot write " + path);
    out << content;
    if (!out) throw validation_error("short write to " + path);
}

// Splits file content into lines, tolerating trailing newline and CRLF.
inline std::vector<std::string> read_lines(const std::string& content) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= content.size()) {
        std::size_t pos = content.find('\n', start);
        if (pos == std::string::npos) {
            if (start < content.size()) lines.emplace_back(content.substr(start));
            break;
        }
        std::string line = content.substr(start, pos - start);
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
        start = pos + 1;
    }
    return lines;
}

}  // namespace edgeplan
