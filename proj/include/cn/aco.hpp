#pragma once

#include <cn/error.hpp>
#include <cn/network.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cn::aco {

inline constexpr double no_edge = std::numeric_limits<double>::infinity();

/// Symmetric travelling-salesman instance. An infinite cost means the cities are not linked.
struct TspInstance {
    std::vector<std::vector<double>> cost;

    std::size_t size() const noexcept { return cost.size(); }

    void validate() const {
        const std::size_t n = cost.size();
        if (n < 3) throw Error(ErrorCategory::malformed_instance, "TSP instance needs at least 3 cities");
        for (std::size_t i = 0; i < n; ++i) {
            if (cost[i].size() != n)
                throw Error(ErrorCategory::malformed_instance,
                            "cost matrix row " + std::to_string(i) + " has " +
                                std::to_string(cost[i].size()) + " entries, expected " + std::to_string(n));
        }
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double c = cost[i][j];
                if (std::isnan(c) || c <= 0.0)
                    throw Error(ErrorCategory::malformed_instance,
                                "cost(" + std::to_string(i) + "," + std::to_string(j) + ") must be positive");
                if (c != cost[j][i])
                    throw Error(ErrorCategory::malformed_instance,
                                "cost matrix is not symmetric at (" + std::to_string(i) + "," +
                                    std::to_string(j) + ")");
            }
    }

    static TspInstance from_coordinates(std::span<const std::pair<double, double>> points) {
        TspInstance inst;
        const std::size_t n = points.size();
        inst.cost.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                if (i != j)
                    inst.cost[i][j] = std::hypot(points[i].first - points[j].first,
                                                 points[i].second - points[j].second);
        return inst;
    }

    /// n cities uniform in the unit square.
    static TspInstance random_euclidean(std::size_t n, RngStream& rng) {
        std::vector<std::pair<double, double>> pts(n);
        for (auto& p : pts) {
            p.first = rng.uniform();
            p.second = rng.uniform();
        }
        return from_coordinates(pts);
    }
};

/// Length of the closed tour through `path` (last city links back to the first).
inline double tour_length(const TspInstance& inst, std::span<const std::size_t> path) {
    double len = 0.0;
    for (std::size_t k = 0; k < path.size(); ++k)
        len += inst.cost[path[k]][path[(k + 1) % path.size()]];
    return len;
}

struct Tour {
    std::vector<std::size_t> path;
    double length = no_edge;

    bool operator==(const Tour&) const = default;
};

struct AntState {
    std::vector<std::size_t> path;
    double length = 0.0;
    std::vector<bool> visited;
};

struct LocationPayload {
    std::vector<std::size_t> resident_ants;
};

struct TrailPayload {
    double cost = 1.0;
    double heuristic = 1.0; // 1 / cost
    double pheromone = 1.0;
};

enum class Demon { off, two_opt };

inline Demon parse_demon(std::string_view s) {
    if (s == "off") return Demon::off;
    if (s == "two-opt") return Demon::two_opt;
    throw config_error("unknown demon '" + std::string(s) + "'");
}

inline const char* to_string(Demon d) noexcept { return d == Demon::off ? "off" : "two-opt"; }

struct AcoParams {
    double alpha = 1.0;
    double beta = 2.0;
    double rho = 0.1;
    double q = 1.0;
    std::size_t ants = 10;
    double tau0 = 1.0;
    double tau_min = 1e-9;
    Demon demon = Demon::off;

    void validate() const {
        if (!(alpha >= 0.0)) throw config_error("aco.alpha must be >= 0");
        if (!(beta >= 0.0)) throw config_error("aco.beta must be >= 0");
        if (!(rho >= 0.0 && rho <= 1.0)) throw config_error("aco.rho must be in [0, 1]");
        if (!(q > 0.0)) throw config_error("aco.q must be > 0");
        if (ants < 1) throw config_error("aco.ants must be >= 1");
        if (!(tau0 > 0.0)) throw config_error("aco.tau0 must be > 0");
        if (!(tau_min >= 0.0)) throw config_error("aco.tau_min must be >= 0");
    }

    bool operator==(const AcoParams&) const = default;
};

/// tau^alpha * eta^beta normalised over the candidates. If every weight
/// underflows to zero the choice falls back to uniform.
inline std::vector<double> transition_probabilities(std::span<const double> pheromone,
                                                    std::span<const double> heuristic,
                                                    double alpha, double beta) {
    std::vector<double> w(pheromone.size());
    double total = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) {
        w[k] = std::pow(pheromone[k], alpha) * std::pow(heuristic[k], beta);
        total += w[k];
    }
    if (!(total > 0.0) || !std::isfinite(total)) {
        std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(w.size()));
        return w;
    }
    for (auto& x : w) x /= total;
    return w;
}

/// Index drawn from a discrete distribution (one uniform draw).
inline std::size_t sample_index(std::span<const double> probabilities, RngStream& rng) {
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t k = 0; k < probabilities.size(); ++k) {
        acc += probabilities[k];
        if (u < acc) return k;
    }
    return probabilities.size() - 1;
}

/// 2-opt until no segment reversal shortens the tour.
inline Tour two_opt(const TspInstance& inst, Tour tour) {
    auto& p = tour.path;
    const std::size_t n = p.size();
    if (n < 4) {
        tour.length = tour_length(inst, p);
        return tour;
    }
    const auto& d = inst.cost;
    bool improved = true;
    while (improved) {
        improved = false;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            for (std::size_t j = i + 2; j < n; ++j) {
                if (i == 0 && j == n - 1) continue; // same two edges
                const std::size_t a = p[i], b = p[i + 1], c = p[j], e = p[(j + 1) % n];
                const double before = d[a][b] + d[c][e];
                const double after = d[a][c] + d[b][e];
                if (std::isfinite(after) && after < before - 1e-12) {
                    std::reverse(p.begin() + static_cast<std::ptrdiff_t>(i + 1),
                                 p.begin() + static_cast<std::ptrdiff_t>(j + 1));
                    improved = true;
                }
            }
        }
    }
    tour.length = tour_length(inst, p);
    return tour;
}

/// Ant colony over a TSP graph. Cities are nodes, links are undirected edges
/// carrying cost, heuristic and pheromone.
class Colony {
public:
    using network_type = ComputingNetwork<LocationPayload, TrailPayload>;

    struct Feedback {
        std::vector<Tour> solutions;
    };

    static constexpr std::size_t max_restarts = 10;

    Colony(TspInstance instance, AcoParams params)
        : instance_(std::move(instance)), params_(params) {
        instance_.validate();
        params_.validate();
        const std::size_t n = instance_.size();
        edge_index_.assign(n, std::vector<std::optional<std::size_t>>(n));
        for (std::size_t i = 0; i < n; ++i) net_.add_node({});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) {
                const double c = instance_.cost[i][j];
                if (!std::isfinite(c)) continue;
                const auto id = net_.add_edge({i, j}, false, TrailPayload{c, 1.0 / c, params_.tau0});
                edge_index_[i][j] = id;
                edge_index_[j][i] = id;
            }
    }

    const TspInstance& instance() const noexcept { return instance_; }
    const AcoParams& params() const noexcept { return params_; }
    const network_type& network() const noexcept { return net_; }
    network_type& network() noexcept { return net_; }

    std::optional<std::size_t> edge_between(std::size_t i, std::size_t j) const {
        return edge_index_.at(i).at(j);
    }

    double pheromone(std::size_t i, std::size_t j) const {
        const auto e = edge_between(i, j);
        if (!e) throw config_error("no edge between " + std::to_string(i) + " and " + std::to_string(j));
        return net_.edge_payload(*e).pheromone;
    }

    double min_pheromone() const {
        double m = no_edge;
        for (const auto& e : net_.edges()) m = std::min(m, e.payload.pheromone);
        return m;
    }

    /// Samples the next city among unvisited neighbours of the ant's current city.
    std::size_t choose_next(const AntState& ant, RngStream& rng) const {
        const std::size_t here = ant.path.back();
        std::vector<std::size_t> cand;
        std::vector<double> tau, eta;
        for (std::size_t j = 0; j < instance_.size(); ++j) {
            if (ant.visited[j]) continue;
            const auto e = edge_index_[here][j];
            if (!e) continue;
            cand.push_back(j);
            tau.push_back(net_.edge_payload(*e).pheromone);
            eta.push_back(net_.edge_payload(*e).heuristic);
        }
        if (cand.empty())
            throw Error(ErrorCategory::dead_end, "ant at city " + std::to_string(here) + " has no unvisited neighbour");
        const auto probs = transition_probabilities(tau, eta, params_.alpha, params_.beta);
        return cand[sample_index(probs, rng)];
    }

    /// One tour per ant. A dead-ended ant restarts from a fresh city, at most
    /// `max_restarts` times.
    std::vector<Tour> construct_solutions(RngStream& rng) {
        const std::size_t n = instance_.size();
        std::vector<Tour> tours;
        tours.reserve(params_.ants);
        for (auto& node : net_.nodes()) net_.node_payload(node.id).resident_ants.clear();
        for (std::size_t k = 0; k < params_.ants; ++k) {
            std::optional<AntState> done;
            for (std::size_t attempt = 0; attempt <= max_restarts && !done; ++attempt) {
                AntState ant;
                ant.visited.assign(n, false);
                const auto start = static_cast<std::size_t>(rng.below(n));
                ant.path.push_back(start);
                ant.visited[start] = true;
                try {
                    while (ant.path.size() < n) {
                        const std::size_t next = choose_next(ant, rng);
                        ant.length += instance_.cost[ant.path.back()][next];
                        ant.path.push_back(next);
                        ant.visited[next] = true;
                    }
                } catch (const Error& e) {
                    if (e.category() != ErrorCategory::dead_end) throw;
                    continue;
                }
                if (!edge_index_[ant.path.back()][start]) continue;
                ant.length += instance_.cost[ant.path.back()][start];
                done = std::move(ant);
            }
            if (!done)
                throw Error(ErrorCategory::dead_end,
                            "ant " + std::to_string(k) + " dead-ended " + std::to_string(max_restarts + 1) + " times");
            net_.node_payload(done->path.back()).resident_ants.push_back(k);
            tours.push_back({std::move(done->path), done->length});
        }
        for (const auto& t : tours) offer(t);
        return tours;
    }

    void evaporate() { evaporate(params_.rho); }

    /// tau <- max(tau_min, (1 - rho) tau) on every edge.
    void evaporate(double rho) {
        if (!(rho >= 0.0 && rho <= 1.0)) throw config_error("evaporation rate must be in [0, 1]");
        for (std::size_t e = 0; e < net_.edge_count(); ++e) {
            auto& tau = net_.edge_payload(e).pheromone;
            tau = std::max(params_.tau_min, (1.0 - rho) * tau);
        }
    }

    void deposit(std::span<const Tour> solutions) { deposit(solutions, params_.q); }

    /// Every edge of a tour of length L gains q / L.
    void deposit(std::span<const Tour> solutions, double q) {
        for (const auto& t : solutions) {
            if (!(t.length > 0.0))
                throw Error(ErrorCategory::malformed_instance, "tour length must be positive to deposit");
            const double amount = q / t.length;
            for (std::size_t k = 0; k < t.path.size(); ++k) {
                const auto e = edge_index_[t.path[k]][t.path[(k + 1) % t.path.size()]];
                if (!e) throw Error(ErrorCategory::malformed_instance, "tour uses a missing edge");
                net_.edge_payload(*e).pheromone += amount;
            }
        }
    }

    /// Shortest complete tour found so far; empty path before the first construction.
    const Tour& best_path() const noexcept { return best_; }

    std::size_t input_arity() const noexcept { return 0; }
    std::vector<double> next_input() const { return {}; }

    std::vector<double> fast_step(std::span<const double>, Feedback& fb, RngStream& rng) {
        auto tours = construct_solutions(rng);
        fb.solutions.insert(fb.solutions.end(), std::make_move_iterator(tours.begin()),
                            std::make_move_iterator(tours.end()));
        return readout();
    }

    /// Demon (2-opt on the iteration best), then evaporation and deposit.
    void slow_step(Feedback& fb, RngStream&) {
        if (params_.demon == Demon::two_opt && !fb.solutions.empty()) {
            auto it = std::min_element(fb.solutions.begin(), fb.solutions.end(),
                                       [](const Tour& a, const Tour& b) { return a.length < b.length; });
            *it = two_opt(instance_, *it);
            offer(*it);
        }
        evaporate();
        deposit(fb.solutions);
    }

    double best_value() const noexcept { return best_.length; }

    std::vector<double> readout() const { return {best_.path.begin(), best_.path.end()}; }

    ParameterMap parameters() const {
        return {{"alpha", params_.alpha}, {"beta", params_.beta}, {"rho", params_.rho},
                {"q", params_.q},         {"ants", static_cast<double>(params_.ants)},
                {"tau0", params_.tau0}};
    }

private:
    void offer(const Tour& t) {
        if (t.length < best_.length) best_ = t;
    }

    TspInstance instance_;
    AcoParams params_;
    network_type net_;
    std::vector<std::vector<std::optional<std::size_t>>> edge_index_;
    Tour best_;
};

} // namespace cn::aco
