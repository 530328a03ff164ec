#pragma once

#include <cn/aco.hpp>
#include <cn/ann.hpp>
#include <cn/error.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cn::harness {

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

/// Parses a real; accepts "inf"/"infinity" (any case) for a missing link.
inline double parse_real(const std::string& field, const std::string& where) {
    std::string lower;
    for (char c : field) lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    if (lower == "inf" || lower == "infinity" || lower == "+inf") return std::numeric_limits<double>::infinity();
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (ec != std::errc{} || ptr != end || field.empty())
        throw config_error(where + ": '" + field + "' is not a number");
    return v;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open '" + path.string() + "'");
    return in;
}

/// CSV dataset: the header names the columns, inputs first ("x..."), then
/// targets ("y..."). One sample per following row.
inline ann::Dataset read_dataset(std::istream& in, const std::string& name = "dataset") {
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!trim(line).empty()) break;
    }
    if (trim(line).empty()) throw config_error(name + ": missing header row");
    const auto header = split_csv_line(line);
    ann::Dataset ds;
    for (const auto& col : header) {
        if (col.empty()) throw config_error(name + ": empty column name in header");
        if (col[0] == 'x') {
            if (ds.target_arity > 0)
                throw config_error(name + ": input column '" + col + "' after a target column");
            ++ds.input_arity;
        } else if (col[0] == 'y') {
            ++ds.target_arity;
        } else {
            throw config_error(name + ": header column '" + col + "' must start with x (input) or y (target)");
        }
    }
    if (ds.input_arity == 0 || ds.target_arity == 0)
        throw config_error(name + ": header must declare at least one input and one target column");
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        const std::string where = name + " line " + std::to_string(lineno);
        if (fields.size() != header.size())
            throw config_error(where + ": expected " + std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
        ann::Sample s;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            const double v = parse_real(fields[k], where);
            if (!std::isfinite(v)) throw config_error(where + ": dataset values must be finite");
            (k < ds.input_arity ? s.input : s.target).push_back(v);
        }
        ds.samples.push_back(std::move(s));
    }
    if (ds.samples.empty()) throw config_error(name + ": no samples");
    return ds;
}

inline ann::Dataset read_dataset(const std::filesystem::path& path) {
    auto in = open_input(path);
    return read_dataset(in, path.string());
}

enum class GraphFormat { coordinates, matrix };

inline GraphFormat parse_graph_format(std::string_view s) {
    if (s == "coordinates") return GraphFormat::coordinates;
    if (s == "matrix") return GraphFormat::matrix;
    throw config_error("unknown graph_format '" + std::string(s) + "'");
}

inline const char* to_string(GraphFormat f) noexcept {
    return f == GraphFormat::matrix ? "matrix" : "coordinates";
}

/// Coordinates: header "id,x,y" then one row per city, ids 0..n-1 in any order.
/// Matrix: n rows of n costs, "inf" for cities that are not linked.
inline aco::TspInstance read_graph(std::istream& in, GraphFormat format, const std::string& name = "graph") {
    std::string line;
    std::size_t lineno = 0;
    if (format == GraphFormat::coordinates) {
        std::vector<std::pair<std::size_t, std::pair<double, double>>> rows;
        bool header_seen = false;
        while (std::getline(in, line)) {
            ++lineno;
            if (trim(line).empty()) continue;
            const auto fields = split_csv_line(line);
            const std::string where = name + " line " + std::to_string(lineno);
            if (!header_seen) {
                header_seen = true;
                if (fields == std::vector<std::string>{"id", "x", "y"}) continue;
                throw config_error(where + ": coordinate file must start with the header id,x,y");
            }
            if (fields.size() != 3) throw config_error(where + ": expected id,x,y");
            const double id = parse_real(fields[0], where);
            if (id < 0 || id != std::floor(id)) throw config_error(where + ": id must be a non-negative integer");
            rows.push_back({static_cast<std::size_t>(id), {parse_real(fields[1], where), parse_real(fields[2], where)}});
        }
        std::vector<std::pair<double, double>> pts(rows.size());
        std::vector<bool> seen(rows.size(), false);
        for (const auto& [id, p] : rows) {
            if (id >= rows.size() || seen[id])
                throw config_error(name + ": city ids must be exactly 0..n-1");
            seen[id] = true;
            pts[id] = p;
        }
        auto inst = aco::TspInstance::from_coordinates(pts);
        inst.validate();
        return inst;
    }
    aco::TspInstance inst;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        const auto fields = split_csv_line(line);
        std::vector<double> row;
        for (const auto& f : fields) row.push_back(parse_real(f, name + " line " + std::to_string(lineno)));
        inst.cost.push_back(std::move(row));
    }
    inst.validate();
    return inst;
}

inline aco::TspInstance read_graph(const std::filesystem::path& path, GraphFormat format) {
    auto in = open_input(path);
    return read_graph(in, format, path.string());
}

} // namespace cn::harness
