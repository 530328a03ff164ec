#pragma once

#include <cn/error.hpp>
#include <cn/network.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace cn::eca {

using Cell = std::uint8_t;
using Row = std::vector<Cell>;
using Grid = std::vector<Row>;

enum class Boundary { fixed_zero, periodic };

inline Boundary parse_boundary(std::string_view s) {
    if (s == "fixed-zero") return Boundary::fixed_zero;
    if (s == "periodic") return Boundary::periodic;
    throw config_error("unknown boundary '" + std::string(s) + "'");
}

inline const char* to_string(Boundary b) noexcept {
    return b == Boundary::periodic ? "periodic" : "fixed-zero";
}

/// Next state indexed by the neighborhood read as a 3-bit number (left is the high bit).
struct RuleTable {
    std::array<Cell, 8> next{};

    Cell operator()(Cell left, Cell self, Cell right) const noexcept {
        return next[(left << 2) | (self << 1) | right];
    }

    bool operator==(const RuleTable&) const = default;
};

/// Wolfram numbering: bit k of the rule number is the output for neighborhood k.
inline RuleTable rule_table(int rule_number) {
    if (rule_number < 0 || rule_number > 255)
        throw config_error("eca.rule must be in 0..255, got " + std::to_string(rule_number));
    RuleTable t;
    for (int k = 0; k < 8; ++k) t.next[k] = static_cast<Cell>((rule_number >> k) & 1);
    return t;
}

struct Tape {
    Row cells;
    Boundary boundary = Boundary::fixed_zero;

    void validate() const {
        if (cells.size() < 3) throw config_error("tape needs at least 3 cells");
        for (auto c : cells)
            if (c > 1) throw config_error("tape cells must be 0 or 1");
    }

    /// A single 1 at the center (index width / 2).
    static Tape single_one(std::size_t width, Boundary boundary = Boundary::fixed_zero) {
        Tape t{Row(width, 0), boundary};
        t.validate();
        t.cells[width / 2] = 1;
        return t;
    }

    static Tape random(std::size_t width, RngStream& rng, Boundary boundary = Boundary::fixed_zero) {
        Tape t{Row(width, 0), boundary};
        t.validate();
        for (auto& c : t.cells) c = static_cast<Cell>(rng() >> 63);
        return t;
    }

    Cell left_of(std::size_t i) const noexcept {
        if (i > 0) return cells[i - 1];
        return boundary == Boundary::periodic ? cells.back() : Cell{0};
    }

    Cell right_of(std::size_t i) const noexcept {
        if (i + 1 < cells.size()) return cells[i + 1];
        return boundary == Boundary::periodic ? cells.front() : Cell{0};
    }

    bool operator==(const Tape&) const = default;
};

/// Synchronous update: every cell reads the pre-step tape.
inline Tape step(const Tape& tape, const RuleTable& rule) {
    tape.validate();
    Tape next{Row(tape.cells.size()), tape.boundary};
    for (std::size_t i = 0; i < tape.cells.size(); ++i)
        next.cells[i] = rule(tape.left_of(i), tape.cells[i], tape.right_of(i));
    return next;
}

/// Space-time diagram, rows 0..steps.
inline Grid evolve(const Tape& initial, const RuleTable& rule, long long steps) {
    if (steps < 0) throw config_error("eca.steps must be >= 0");
    Grid grid;
    grid.reserve(static_cast<std::size_t>(steps) + 1);
    Tape t = initial;
    t.validate();
    grid.push_back(t.cells);
    for (long long s = 0; s < steps; ++s) {
        t = step(t, rule);
        grid.push_back(t.cells);
    }
    return grid;
}

inline void write_text(std::ostream& out, const Grid& grid) {
    for (const auto& row : grid) {
        for (auto c : row) out.put(c ? '1' : '0');
        out.put('\n');
    }
}

/// Plain PBM (P1). In PBM a 1 is drawn black.
inline void write_pbm(std::ostream& out, const Grid& grid) {
    const std::size_t width = grid.empty() ? 0 : grid.front().size();
    out << "P1\n" << width << ' ' << grid.size() << '\n';
    for (const auto& row : grid) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out.put(' ');
            out.put(row[i] ? '1' : '0');
        }
        out.put('\n');
    }
}

/// Reads the text format back; blank lines are skipped.
inline Grid read_text(std::istream& in) {
    Grid grid;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        Row row;
        row.reserve(line.size());
        for (char ch : line) {
            if (ch != '0' && ch != '1')
                throw config_error("grid line " + std::to_string(grid.size() + 1) + " has a character other than 0/1");
            row.push_back(static_cast<Cell>(ch - '0'));
        }
        if (!grid.empty() && row.size() != grid.front().size())
            throw config_error("grid rows have different widths");
        grid.push_back(std::move(row));
    }
    return grid;
}

/// The automaton as a computing network: each cell is a node, each cell's
/// neighborhood (left, self, right) is a directed hyperedge ending at the cell.
class Automaton {
public:
    struct CellPayload {
        Cell state = 0;
    };
    struct NeighborhoodPayload {};
    using network_type = ComputingNetwork<CellPayload, NeighborhoodPayload>;

    struct Feedback {};

    Automaton(const Tape& tape, RuleTable rule, UpdateMode updating = UpdateMode::synchronous)
        : rule_(rule), boundary_(tape.boundary), net_(updating, true) {
        tape.validate();
        const std::size_t n = tape.cells.size();
        for (auto c : tape.cells) net_.add_node({c});
        // under fixed-zero boundaries the two end cells get a two-endpoint edge
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<std::size_t> ends;
            if (i > 0) ends.push_back(i - 1);
            else if (boundary_ == Boundary::periodic) ends.push_back(n - 1);
            ends.push_back(i);
            if (i + 1 < n) ends.push_back(i + 1);
            else if (boundary_ == Boundary::periodic) ends.push_back(0);
            net_.add_edge(std::move(ends), true, {});
        }
    }

    const network_type& network() const noexcept { return net_; }

    Tape tape() const {
        Tape t{Row(net_.node_count()), boundary_};
        for (std::size_t i = 0; i < net_.node_count(); ++i) t.cells[i] = net_.node_payload(i).state;
        return t;
    }

    /// One CA step through the network's updating mode.
    void update(RngStream& rng) {
        const std::size_t n = net_.node_count();
        net_.update_nodes(
            [&](const network_type& net, std::size_t i) {
                const auto& ends = net.edge(i).endpoints;
                Cell l = 0, r = 0;
                const bool has_left = i > 0 || boundary_ == Boundary::periodic;
                const bool has_right = i + 1 < n || boundary_ == Boundary::periodic;
                std::size_t k = 0;
                if (has_left) l = net.node_payload(ends[k++]).state;
                const Cell s = net.node_payload(ends[k++]).state;
                if (has_right) r = net.node_payload(ends[k]).state;
                return CellPayload{rule_(l, s, r)};
            },
            rng);
    }

    std::size_t input_arity() const noexcept { return 0; }
    std::vector<double> next_input() const { return {}; }

    std::vector<double> fast_step(std::span<const double>, Feedback&, RngStream& rng) {
        update(rng);
        return readout();
    }

    // Nothing adapts: the rule is fixed.
    void slow_step(const Feedback&, RngStream&) {}

    std::vector<double> readout() const {
        std::vector<double> out(net_.node_count());
        for (std::size_t i = 0; i < out.size(); ++i) out[i] = net_.node_payload(i).state;
        return out;
    }

    /// Number of live cells.
    double best_value() const {
        double live = 0;
        for (const auto& n : net_.nodes()) live += n.payload.state;
        return live;
    }

    ParameterMap parameters() const {
        int number = 0;
        for (int k = 0; k < 8; ++k) number |= rule_.next[k] << k;
        return {{"rule", static_cast<double>(number)}};
    }

private:
    RuleTable rule_;
    Boundary boundary_;
    network_type net_;
};

} // namespace cn::eca
