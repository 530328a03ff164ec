#pragma once

#include <cn/error.hpp>
#include <cn/rng.hpp>

#include <cstddef>
#include <numeric>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cn {

enum class UpdateMode {
    synchronous,
    asynchronous_fixed_order,
    asynchronous_random_order,
};

inline UpdateMode parse_update_mode(std::string_view s) {
    if (s == "synchronous") return UpdateMode::synchronous;
    if (s == "asynchronous-fixed-order") return UpdateMode::asynchronous_fixed_order;
    if (s == "asynchronous-random-order") return UpdateMode::asynchronous_random_order;
    throw config_error("unknown updating mode '" + std::string(s) + "'");
}

inline const char* to_string(UpdateMode m) noexcept {
    switch (m) {
    case UpdateMode::synchronous: return "synchronous";
    case UpdateMode::asynchronous_fixed_order: return "asynchronous-fixed-order";
    case UpdateMode::asynchronous_random_order: return "asynchronous-random-order";
    }
    return "synchronous";
}

template <class Payload>
struct NodeState {
    std::size_t id = 0;
    Payload payload{};
};

template <class Payload>
struct EdgeState {
    std::size_t id = 0;
    std::vector<std::size_t> endpoints; // size > 2 marks a hyperedge
    bool directed = false;
    Payload payload{};

    bool is_hyperedge() const noexcept { return endpoints.size() > 2; }
};

/// Generic container of nodes and (hyper)edges with architecture-specific payloads.
///
/// Topology is append-only during construction and never changes afterwards:
/// only payloads are mutable through the public surface. Node and edge ids are
/// their positions, so ordering is stable across steps.
template <class NodePayload, class EdgePayload>
class ComputingNetwork {
public:
    using node_type = NodeState<NodePayload>;
    using edge_type = EdgeState<EdgePayload>;

    explicit ComputingNetwork(UpdateMode updating = UpdateMode::synchronous,
                              bool allow_hyperedges = false)
        : updating_(updating), allow_hyperedges_(allow_hyperedges) {}

    std::size_t add_node(NodePayload payload) {
        const std::size_t id = nodes_.size();
        nodes_.push_back({id, std::move(payload)});
        incident_.emplace_back();
        return id;
    }

    std::size_t add_edge(std::vector<std::size_t> endpoints, bool directed, EdgePayload payload) {
        if (endpoints.size() < 2)
            throw config_error("edge needs at least two endpoints");
        if (endpoints.size() > 2 && !allow_hyperedges_)
            throw config_error("hyperedge with " + std::to_string(endpoints.size()) +
                               " endpoints in a network without hyperedge support");
        for (auto e : endpoints)
            if (e >= nodes_.size())
                throw config_error("edge endpoint " + std::to_string(e) + " refers to no node");
        const std::size_t id = edges_.size();
        for (auto e : endpoints)
            if (incident_[e].empty() || incident_[e].back() != id) incident_[e].push_back(id);
        edges_.push_back({id, std::move(endpoints), directed, std::move(payload)});
        return id;
    }

    std::size_t node_count() const noexcept { return nodes_.size(); }
    std::size_t edge_count() const noexcept { return edges_.size(); }

    const std::vector<node_type>& nodes() const noexcept { return nodes_; }
    const std::vector<edge_type>& edges() const noexcept { return edges_; }

    const node_type& node(std::size_t i) const { return nodes_.at(i); }
    const edge_type& edge(std::size_t i) const { return edges_.at(i); }

    NodePayload& node_payload(std::size_t i) { return nodes_.at(i).payload; }
    const NodePayload& node_payload(std::size_t i) const { return nodes_.at(i).payload; }
    EdgePayload& edge_payload(std::size_t i) { return edges_.at(i).payload; }
    const EdgePayload& edge_payload(std::size_t i) const { return edges_.at(i).payload; }

    /// Ids of edges touching node i, ascending.
    const std::vector<std::size_t>& incident_edges(std::size_t i) const { return incident_.at(i); }

    UpdateMode updating() const noexcept { return updating_; }
    void set_updating(UpdateMode m) noexcept { updating_ = m; }
    bool allows_hyperedges() const noexcept { return allow_hyperedges_; }

    /// Replaces every node payload with `rule(network, node_id)`.
    ///
    /// Synchronous: every call reads the pre-step network. Asynchronous modes
    /// write each result back immediately, in index order or in an order
    /// drawn from `rng`.
    template <class Rule>
    void update_nodes(Rule&& rule, RngStream& rng) {
        switch (updating_) {
        case UpdateMode::synchronous: {
            std::vector<NodePayload> next;
            next.reserve(nodes_.size());
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                next.push_back(rule(std::as_const(*this), i));
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                nodes_[i].payload = std::move(next[i]);
            break;
        }
        case UpdateMode::asynchronous_fixed_order:
            for (std::size_t i = 0; i < nodes_.size(); ++i)
                nodes_[i].payload = rule(std::as_const(*this), i);
            break;
        case UpdateMode::asynchronous_random_order: {
            std::vector<std::size_t> order(nodes_.size());
            std::iota(order.begin(), order.end(), std::size_t{0});
            rng.shuffle(std::span<std::size_t>(order));
            for (auto i : order)
                nodes_[i].payload = rule(std::as_const(*this), i);
            break;
        }
        }
    }

private:
    UpdateMode updating_;
    bool allow_hyperedges_;
    std::vector<node_type> nodes_;
    std::vector<edge_type> edges_;
    std::vector<std::vector<std::size_t>> incident_;
};

} // namespace cn
