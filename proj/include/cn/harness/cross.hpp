#pragma once

#include <cn/ann.hpp>
#include <cn/error.hpp>
#include <cn/pso.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <memory>
#include <string>
#include <vector>

namespace cn::harness {

struct CrossResult {
    ann::FeedforwardNet net;
    double mse = 0.0;
    std::vector<RunRecord> records;
};

/// PSO over the flattened weight vector of an ANN; a particle's objective is the
/// network's batch MSE at that weight vector. Returns the network set to the
/// swarm's global best.
inline CrossResult cross_train(const ann::LayeredTopology& topology, const ann::Dataset& data,
                               const pso::PsoParams& params, pso::Bounds bounds, const ScaleSchedule& schedule,
                               RngStream& rng) {
    topology.validate();
    if (bounds.dimension() != topology.parameter_count())
        throw config_error("cross: PSO dimension " + std::to_string(bounds.dimension()) +
                           " does not match the ANN weight count " + std::to_string(topology.parameter_count()));
    if (data.samples.empty()) throw config_error("cross: dataset is empty");
    if (data.input_arity != topology.layers.front() || data.target_arity != topology.layers.back())
        throw config_error("cross: dataset arities do not match the ANN layers");

    auto scratch = std::make_shared<ann::FeedforwardNet>(topology);
    auto samples = std::make_shared<const std::vector<ann::Sample>>(data.samples);
    pso::Objective objective = [scratch, samples](std::span<const double> w) {
        scratch->set_parameters(w);
        return ann::mean_squared_error(*scratch, *samples);
    };

    pso::Swarm swarm(objective, std::move(bounds), params, rng);
    auto records = run(swarm, schedule, rng);

    ann::FeedforwardNet net(topology);
    net.set_parameters(swarm.global_best().first);
    const double mse = swarm.global_best().second;
    return {std::move(net), mse, std::move(records)};
}

} // namespace cn::harness
