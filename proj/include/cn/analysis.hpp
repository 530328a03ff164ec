#pragma once

#include <cn/error.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

namespace cn::analysis {

/// Time x node matrix of discrete states, row-major.
class StateTrace {
public:
    StateTrace(std::size_t steps, std::size_t nodes) : steps_(steps), nodes_(nodes), data_(steps * nodes, 0) {
        if (steps == 0 || nodes == 0) throw config_error("state trace needs T >= 1 and n >= 1");
    }

    template <class RowRange>
    static StateTrace from_rows(const RowRange& rows) {
        if (rows.empty()) throw config_error("state trace needs T >= 1");
        StateTrace t(rows.size(), rows.front().size());
        std::size_t r = 0;
        for (const auto& row : rows) {
            if (row.size() != t.nodes_) throw config_error("state trace rows have different widths");
            std::copy(row.begin(), row.end(), t.data_.begin() + static_cast<std::ptrdiff_t>(r * t.nodes_));
            ++r;
        }
        return t;
    }

    std::size_t steps() const noexcept { return steps_; }
    std::size_t nodes() const noexcept { return nodes_; }

    int& at(std::size_t t, std::size_t i) { return data_[t * nodes_ + i]; }
    int at(std::size_t t, std::size_t i) const { return data_[t * nodes_ + i]; }

    std::span<const int> row(std::size_t t) const { return {data_.data() + t * nodes_, nodes_}; }

private:
    std::size_t steps_;
    std::size_t nodes_;
    std::vector<int> data_;
};

inline constexpr std::size_t default_bins = 16;

/// Equal-width bins over the observed range of all values. A constant matrix maps to bin 0.
inline StateTrace discretize(const std::vector<std::vector<double>>& rows, std::size_t bins = default_bins) {
    if (bins < 1) throw config_error("bin count must be >= 1");
    if (rows.empty() || rows.front().empty()) throw config_error("state trace needs T >= 1 and n >= 1");
    double lo = rows.front().front(), hi = lo;
    for (const auto& r : rows)
        for (double v : r) {
            if (!std::isfinite(v)) throw numeric_error("cannot discretize a non-finite state");
            lo = std::min(lo, v);
            hi = std::max(hi, v);
        }
    StateTrace t(rows.size(), rows.front().size());
    const double width = (hi - lo) / static_cast<double>(bins);
    for (std::size_t s = 0; s < rows.size(); ++s) {
        if (rows[s].size() != t.nodes()) throw config_error("state trace rows have different widths");
        for (std::size_t i = 0; i < t.nodes(); ++i) {
            int b = 0;
            if (width > 0.0)
                b = static_cast<int>(std::min<double>(static_cast<double>(bins - 1), std::floor((rows[s][i] - lo) / width)));
            t.at(s, i) = b;
        }
    }
    return t;
}

/// Plug-in Shannon entropy in bits of the empirical distribution given by counts.
template <class Counts>
double entropy_bits(const Counts& counts, std::size_t total) {
    double h = 0.0;
    const double n = static_cast<double>(total);
    for (const auto& [_, c] : counts) {
        const double p = static_cast<double>(c) / n;
        h -= p * std::log2(p);
    }
    return h == 0.0 ? 0.0 : h; // no -0.0
}

/// Sum over nodes of the entropy of each node's time series.
inline double node_scale_info(const StateTrace& trace) {
    double total = 0.0;
    for (std::size_t i = 0; i < trace.nodes(); ++i) {
        std::map<int, std::size_t> counts;
        for (std::size_t t = 0; t < trace.steps(); ++t) ++counts[trace.at(t, i)];
        total += entropy_bits(counts, trace.steps());
    }
    return total;
}

/// Entropy of whole-network rows treated as joint symbols.
inline double network_scale_info(const StateTrace& trace) {
    std::map<std::vector<int>, std::size_t> counts;
    for (std::size_t t = 0; t < trace.steps(); ++t) {
        const auto r = trace.row(t);
        ++counts[std::vector<int>(r.begin(), r.end())];
    }
    return entropy_bits(counts, trace.steps());
}

/// What the per-node description misses because nodes interact:
/// node_scale_info - network_scale_info (total correlation), >= 0 up to rounding.
inline double interaction_excess(const StateTrace& trace) {
    return node_scale_info(trace) - network_scale_info(trace);
}

} // namespace cn::analysis
