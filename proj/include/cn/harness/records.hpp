#pragma once

#include <cn/analysis.hpp>
#include <cn/error.hpp>
#include <cn/schedule.hpp>

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace cn::harness {

using json = nlohmann::ordered_json;

// JSON has no infinity; non-finite reals are written as null.
inline json real_to_json(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline double real_from_json(const json& j) {
    return j.is_null() ? std::numeric_limits<double>::infinity() : j.get<double>();
}

/// wall_clock_ms is always the last key so it can be cut off for byte comparisons.
inline json to_json(const RunRecord& r) {
    json out = json::array();
    for (double v : r.network_output) out.push_back(real_to_json(v));
    json params = json::object();
    for (const auto& [k, v] : r.parameter_snapshot) params[k] = real_to_json(v);
    return json{{"slow_step", r.slow_step},
                {"best_value", real_to_json(r.best_value)},
                {"network_output", std::move(out)},
                {"parameter_snapshot", std::move(params)},
                {"wall_clock_ms", r.wall_clock_ms}};
}

inline RunRecord record_from_json(const json& j) {
    RunRecord r;
    r.slow_step = j.at("slow_step").get<std::size_t>();
    r.best_value = real_from_json(j.at("best_value"));
    for (const auto& v : j.at("network_output")) r.network_output.push_back(real_from_json(v));
    for (const auto& [k, v] : j.at("parameter_snapshot").items()) r.parameter_snapshot[k] = real_from_json(v);
    r.wall_clock_ms = j.value("wall_clock_ms", 0.0);
    return r;
}

/// JSON Lines: one header object carrying the resolved config, then one record per line.
inline void write_records(std::ostream& out, const json& header_config, const std::vector<RunRecord>& records) {
    out << json{{"header", header_config}}.dump() << '\n';
    for (const auto& r : records) out << to_json(r).dump() << '\n';
}

inline void write_records(const std::filesystem::path& path, const json& header_config,
                          const std::vector<RunRecord>& records) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    write_records(out, header_config, records);
    if (!out) throw io_error("write to '" + path.string() + "' failed");
}

struct RecordFile {
    json header;
    std::vector<RunRecord> records;
};

inline RecordFile read_records(std::istream& in, const std::string& name = "records") {
    RecordFile f;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw config_error(name + " line " + std::to_string(lineno) + ": " + e.what());
        }
        if (lineno == 1) {
            if (!j.contains("header")) throw config_error(name + ": first line is not a header");
            f.header = j.at("header");
            continue;
        }
        try {
            f.records.push_back(record_from_json(j));
        } catch (const json::exception& e) {
            throw config_error(name + " line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    if (lineno == 0) throw config_error(name + ": empty record file");
    return f;
}

inline RecordFile read_records(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    return read_records(in, path.string());
}

/// File contents with the trailing wall_clock_ms field of every line removed.
inline std::string without_wall_clock(const std::string& text) {
    static const std::string key = ",\"wall_clock_ms\":";
    std::ostringstream out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto pos = line.rfind(key);
        if (pos != std::string::npos) line = line.substr(0, pos) + "}";
        out << line << '\n';
    }
    return out.str();
}

inline std::string slurp(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Node states over time from the records' network outputs, discretized.
inline analysis::StateTrace trace_from_records(const std::vector<RunRecord>& records,
                                               std::size_t bins = analysis::default_bins) {
    std::vector<std::vector<double>> rows;
    for (const auto& r : records) rows.push_back(r.network_output);
    return analysis::discretize(rows, bins);
}

struct SummaryRow {
    std::string path;
    std::string architecture;
    std::uint64_t seed = 0;
    double final_best = 0.0;
    std::size_t iterations = 0;
    double wall_ms = 0.0;
};

inline SummaryRow summarize_file(const std::filesystem::path& path) {
    const auto f = read_records(path);
    SummaryRow row;
    row.path = path.generic_string();
    const auto& cfg = f.header.contains("config") ? f.header.at("config") : f.header;
    row.architecture = cfg.value("architecture", std::string("unknown"));
    row.seed = cfg.value("seed", std::uint64_t{0});
    if (!f.records.empty()) {
        row.final_best = f.records.back().best_value;
        row.iterations = f.records.back().slow_step;
    }
    for (const auto& r : f.records) row.wall_ms += r.wall_clock_ms;
    return row;
}

/// CSV with one row per file, sorted by path.
inline void write_summary(std::ostream& out, std::vector<SummaryRow> rows) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.path < b.path; });
    out << "path,architecture,seed,final_best,iterations,wall_ms\n";
    for (const auto& r : rows) {
        out << r.path << ',' << r.architecture << ',' << r.seed << ',' << real_to_json(r.final_best).dump() << ','
            << r.iterations << ',' << json(r.wall_ms).dump() << '\n';
    }
}

/// Expands '*' and '?' in the file-name part of a pattern; the directory part is literal.
inline std::vector<std::filesystem::path> expand_glob(const std::string& pattern) {
    namespace fs = std::filesystem;
    const fs::path p(pattern);
    const fs::path dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
    const std::string name = p.filename().string();
    auto match = [](const std::string& pat, const std::string& s) {
        std::size_t pi = 0, si = 0, star = std::string::npos, mark = 0;
        while (si < s.size()) {
            if (pi < pat.size() && (pat[pi] == '?' || pat[pi] == s[si])) {
                ++pi;
                ++si;
            } else if (pi < pat.size() && pat[pi] == '*') {
                star = pi++;
                mark = si;
            } else if (star != std::string::npos) {
                pi = star + 1;
                si = ++mark;
            } else {
                return false;
            }
        }
        while (pi < pat.size() && pat[pi] == '*') ++pi;
        return pi == pat.size();
    };
    std::vector<fs::path> out;
    if (name.find_first_of("*?") == std::string::npos) {
        if (fs::exists(p)) out.push_back(p);
        return out;
    }
    std::error_code ec;
    for (const auto& entry : fs::directory_iterator(dir, ec))
        if (entry.is_regular_file() && match(name, entry.path().filename().string()))
            out.push_back(p.has_parent_path() ? entry.path() : entry.path().filename());
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace cn::harness
