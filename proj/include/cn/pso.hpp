#pragma once

#include <cn/error.hpp>
#include <cn/network.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace cn::pso {

using Objective = std::function<double(std::span<const double>)>;

inline double sphere(std::span<const double> x) {
    double s = 0.0;
    for (double v : x) s += v * v;
    return s;
}

inline double rosenbrock(std::span<const double> x) {
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) {
        const double a = x[i + 1] - x[i] * x[i];
        const double b = 1.0 - x[i];
        s += 100.0 * a * a + b * b;
    }
    return s;
}

inline double rastrigin(std::span<const double> x) {
    double s = 10.0 * static_cast<double>(x.size());
    for (double v : x) s += v * v - 10.0 * std::cos(2.0 * std::numbers::pi * v);
    return s;
}

/// Named benchmark objective.
inline Objective objective_by_name(std::string_view name) {
    if (name == "sphere") return sphere;
    if (name == "rosenbrock") return rosenbrock;
    if (name == "rastrigin") return rastrigin;
    throw config_error("unknown objective '" + std::string(name) + "'");
}

enum class Topology { ring, global, custom };

inline Topology parse_topology(std::string_view s) {
    if (s == "ring") return Topology::ring;
    if (s == "global") return Topology::global;
    if (s == "custom") return Topology::custom;
    throw config_error("unknown topology '" + std::string(s) + "'");
}

inline const char* to_string(Topology t) noexcept {
    switch (t) {
    case Topology::ring: return "ring";
    case Topology::global: return "global";
    case Topology::custom: return "custom";
    }
    return "ring";
}

struct PsoParams {
    double inertia = 0.72;
    double cognitive = 1.49;
    double social = 1.49;
    double v_max = 0.0; // 0 = unclamped
    std::size_t swarm_size = 30;
    Topology topology = Topology::ring;
    std::vector<std::vector<std::size_t>> neighborhoods; // Topology::custom only

    void validate() const {
        if (!(inertia >= 0.0)) throw config_error("pso.inertia must be >= 0");
        if (!(cognitive >= 0.0)) throw config_error("pso.cognitive must be >= 0");
        if (!(social >= 0.0)) throw config_error("pso.social must be >= 0");
        if (!(v_max >= 0.0)) throw config_error("pso.v_max must be >= 0");
        if (swarm_size < 1) throw config_error("pso.swarm_size must be >= 1");
        if (topology == Topology::custom && neighborhoods.empty())
            throw config_error("pso.neighborhoods is required for a custom topology");
    }

    bool operator==(const PsoParams&) const = default;
};

/// Search box, one interval per dimension.
struct Bounds {
    std::vector<double> lower;
    std::vector<double> upper;

    static Bounds uniform(std::size_t dim, double lo, double hi) {
        return {std::vector<double>(dim, lo), std::vector<double>(dim, hi)};
    }

    std::size_t dimension() const noexcept { return lower.size(); }

    void validate() const {
        if (lower.empty()) throw config_error("pso.dimension must be >= 1");
        if (lower.size() != upper.size()) throw config_error("pso bounds have different lengths");
        for (std::size_t d = 0; d < lower.size(); ++d)
            if (!(lower[d] <= upper[d])) throw config_error("pso lower bound exceeds upper bound");
    }
};

struct ParticlePayload {
    std::vector<double> position;
    std::vector<double> velocity;
    std::vector<double> best_position;
    double best_value = std::numeric_limits<double>::infinity();
    double value = std::numeric_limits<double>::infinity();
};

/// Best personal best among a neighborhood's members.
struct NeighborhoodPayload {
    std::vector<double> position;
    double value = std::numeric_limits<double>::infinity();
    std::size_t source = 0; // particle index that holds it
};

/// Velocity and position update for one particle, given its social attractor and
/// the uniform draws for each dimension.
inline void move_particle(ParticlePayload& p, std::span<const double> attractor,
                          const PsoParams& params, std::span<const double> r1,
                          std::span<const double> r2) {
    for (std::size_t d = 0; d < p.position.size(); ++d) {
        double v = params.inertia * p.velocity[d] +
                   params.cognitive * r1[d] * (p.best_position[d] - p.position[d]) +
                   params.social * r2[d] * (attractor[d] - p.position[d]);
        if (params.v_max > 0.0) v = std::clamp(v, -params.v_max, params.v_max);
        p.velocity[d] = v;
        p.position[d] += v;
    }
}

/// Particle swarm as a hypernetwork: particles are nodes, every neighborhood is
/// one (hyper)edge carrying the best personal best among its members.
class Swarm {
public:
    using network_type = ComputingNetwork<ParticlePayload, NeighborhoodPayload>;

    struct Feedback {
        std::size_t evaluations = 0;
    };

    /// Positions uniform in the box, velocities uniform in +-(hi - lo) / 10.
    Swarm(Objective objective, Bounds bounds, PsoParams params, RngStream& rng)
        : objective_(std::move(objective)), bounds_(std::move(bounds)), params_(std::move(params)),
          net_(UpdateMode::synchronous, true) {
        bounds_.validate();
        params_.validate();
        const std::size_t dim = bounds_.dimension();
        for (std::size_t i = 0; i < params_.swarm_size; ++i) {
            ParticlePayload p;
            p.position.resize(dim);
            p.velocity.resize(dim);
            for (std::size_t d = 0; d < dim; ++d) {
                const double lo = bounds_.lower[d], hi = bounds_.upper[d];
                p.position[d] = rng.uniform(lo, hi);
                const double span = (hi - lo) / 10.0;
                p.velocity[d] = rng.uniform(-span, span);
            }
            p.best_position = p.position;
            net_.add_node(std::move(p));
        }
        build_neighborhoods();
    }

    /// Swarm with caller-supplied particle states (tests, fixed points).
    Swarm(Objective objective, std::vector<ParticlePayload> particles, PsoParams params)
        : objective_(std::move(objective)), params_(std::move(params)), net_(UpdateMode::synchronous, true) {
        params_.swarm_size = particles.size();
        params_.validate();
        const std::size_t dim = particles.front().position.size();
        bounds_ = Bounds::uniform(dim, 0.0, 0.0);
        for (auto& p : particles) {
            if (p.position.size() != dim || p.velocity.size() != dim || p.best_position.size() != dim)
                throw config_error("particle vectors must all have the swarm dimension");
            net_.add_node(std::move(p));
        }
        build_neighborhoods();
        refresh_neighborhoods();
    }

    const network_type& network() const noexcept { return net_; }
    const PsoParams& params() const noexcept { return params_; }
    std::size_t dimension() const noexcept { return net_.node_payload(0).position.size(); }
    const ParticlePayload& particle(std::size_t i) const { return net_.node_payload(i); }

    /// Computes y(x) for every particle in index order and takes strict improvements
    /// into the personal bests, then refreshes the neighborhood edges.
    void evaluate() {
        for (std::size_t i = 0; i < net_.node_count(); ++i) {
            auto& p = net_.node_payload(i);
            const double y = objective_(p.position);
            if (!std::isfinite(y))
                throw numeric_error("particle " + std::to_string(i) + " has a non-finite objective value");
            p.value = y;
            if (y < p.best_value) {
                p.best_value = y;
                p.best_position = p.position;
            }
        }
        refresh_neighborhoods();
    }

    /// Minimum personal best over the members; ties go to the lowest index.
    static NeighborhoodPayload neighborhood_best(std::span<const std::size_t> members,
                                                 const network_type& net) {
        NeighborhoodPayload best;
        bool first = true;
        for (auto m : members) {
            const auto& p = net.node_payload(m);
            if (first || p.best_value < best.value ||
                (p.best_value == best.value && m < best.source)) {
                best.value = p.best_value;
                best.position = p.best_position;
                best.source = m;
                first = false;
            }
        }
        return best;
    }

    void refresh_neighborhoods() {
        for (std::size_t e = 0; e < net_.edge_count(); ++e)
            net_.edge_payload(e) = neighborhood_best(net_.edge(e).endpoints, net_);
    }

    /// Best neighborhood payload over the edges incident to particle i; a particle in
    /// no neighborhood is attracted to its own personal best.
    NeighborhoodPayload attractor(std::size_t i) const {
        NeighborhoodPayload best;
        best.value = net_.node_payload(i).best_value;
        best.position = net_.node_payload(i).best_position;
        best.source = i;
        for (auto e : net_.incident_edges(i)) {
            const auto& l = net_.edge_payload(e);
            if (l.value < best.value || (l.value == best.value && l.source < best.source)) best = l;
        }
        return best;
    }

    /// Velocity/position update for every particle, reading the current
    /// neighborhood payloads. Draws r1, r2 per dimension in particle-index order.
    void move(RngStream& rng) {
        const std::size_t dim = dimension();
        std::vector<double> r1(dim), r2(dim);
        std::vector<std::vector<double>> targets(net_.node_count());
        for (std::size_t i = 0; i < net_.node_count(); ++i) targets[i] = attractor(i).position;
        for (std::size_t i = 0; i < net_.node_count(); ++i) {
            for (std::size_t d = 0; d < dim; ++d) {
                r1[d] = rng.uniform();
                r2[d] = rng.uniform();
            }
            auto& p = net_.node_payload(i);
            move_particle(p, targets[i], params_, r1, r2);
            for (std::size_t d = 0; d < dim; ++d)
                if (!std::isfinite(p.position[d]))
                    throw numeric_error("particle " + std::to_string(i) + " diverged");
        }
    }

    /// f of the swarm: minimum over personal bests, lowest index on ties.
    std::pair<std::vector<double>, double> global_best() const {
        std::size_t best = 0;
        for (std::size_t i = 1; i < net_.node_count(); ++i)
            if (net_.node_payload(i).best_value < net_.node_payload(best).best_value) best = i;
        return {net_.node_payload(best).best_position, net_.node_payload(best).best_value};
    }

    std::size_t input_arity() const noexcept { return 0; }
    std::vector<double> next_input() const { return {}; }

    std::vector<double> fast_step(std::span<const double>, Feedback& fb, RngStream&) {
        evaluate();
        fb.evaluations += net_.node_count();
        return global_best().first;
    }

    void slow_step(const Feedback&, RngStream& rng) { move(rng); }

    double best_value() const { return global_best().second; }

    ParameterMap parameters() const {
        return {{"inertia", params_.inertia},
                {"cognitive", params_.cognitive},
                {"social", params_.social},
                {"v_max", params_.v_max},
                {"swarm_size", static_cast<double>(params_.swarm_size)}};
    }

private:
    void build_neighborhoods() {
        const std::size_t n = net_.node_count();
        switch (params_.topology) {
        case Topology::ring:
            // pairwise edges (i, i+1): a particle's incident edges cover radius 1
            if (n == 2) net_.add_edge({0, 1}, false, {});
            else if (n > 2)
                for (std::size_t i = 0; i < n; ++i) net_.add_edge({i, (i + 1) % n}, false, {});
            break;
        case Topology::global:
            if (n >= 2) {
                std::vector<std::size_t> all(n);
                for (std::size_t i = 0; i < n; ++i) all[i] = i;
                net_.add_edge(std::move(all), false, {});
            }
            break;
        case Topology::custom:
            for (const auto& members : params_.neighborhoods) net_.add_edge(members, false, {});
            break;
        }
    }

    Objective objective_;
    Bounds bounds_;
    PsoParams params_;
    network_type net_;
};

} // namespace cn::pso
