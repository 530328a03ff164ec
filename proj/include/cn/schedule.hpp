#pragma once

#include <cn/error.hpp>
#include <cn/rng.hpp>

#include <chrono>
#include <concepts>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace cn {

using ParameterMap = std::map<std::string, double>;

/// How the fast and slow scales interleave. meta_generations > 0 adds a third scale.
struct ScaleSchedule {
    std::size_t fast_steps_per_slow = 1;
    std::size_t slow_steps = 0;
    std::size_t meta_generations = 0;

    void validate() const {
        if (fast_steps_per_slow < 1) throw config_error("schedule.fast_steps_per_slow must be >= 1");
    }

    bool operator==(const ScaleSchedule&) const = default;
};

struct RunRecord {
    std::size_t slow_step = 0;
    double best_value = 0.0;
    std::vector<double> network_output;
    ParameterMap parameter_snapshot;
    double wall_clock_ms = 0.0;
};

/// What an architecture has to provide to be driven by `run`.
///
/// `Feedback` collects what fast steps observed; the slow step consumes it.
template <class Net>
concept Instantiation = requires(Net& net, const Net& cnet, std::span<const double> input,
                                 typename Net::Feedback& feedback, RngStream& rng) {
    typename Net::Feedback;
    { cnet.input_arity() } -> std::convertible_to<std::size_t>;
    { net.next_input() } -> std::convertible_to<std::vector<double>>;
    { net.fast_step(input, feedback, rng) } -> std::same_as<std::vector<double>>;
    { net.slow_step(feedback, rng) };
    { cnet.best_value() } -> std::convertible_to<double>;
    { cnet.parameters() } -> std::convertible_to<ParameterMap>;
};

/// Two-scale driver.
///
/// Record 0 is the initial evaluation: one pass of fast steps, no adaptation.
/// Each following record s is one slow step (fed by the previous pass) and a
/// fresh pass of fast steps, so `slow_steps` slow steps give slow_steps + 1
/// records and every record reflects an evaluated network.
template <Instantiation Net>
std::vector<RunRecord> run(Net& net, const ScaleSchedule& schedule, RngStream& rng) {
    schedule.validate();
    if (schedule.meta_generations > 0)
        throw config_error("meta_generations > 0 needs the meta driver, not the two-scale run");

    using clock = std::chrono::steady_clock;
    std::vector<RunRecord> records;
    records.reserve(schedule.slow_steps + 1);

    typename Net::Feedback feedback{};
    auto fast_pass = [&](std::size_t slow) {
        feedback = typename Net::Feedback{};
        std::vector<double> output;
        for (std::size_t k = 0; k < schedule.fast_steps_per_slow; ++k) {
            try {
                const std::vector<double> input = net.next_input();
                if (input.size() != net.input_arity())
                    throw config_error("input arity " + std::to_string(input.size()) +
                                       " does not match declared arity " +
                                       std::to_string(net.input_arity()));
                output = net.fast_step(input, feedback, rng);
            } catch (const Error& e) {
                throw e.annotated("slow step " + std::to_string(slow) + ", fast step " +
                                  std::to_string(k));
            }
        }
        return output;
    };

    for (std::size_t s = 0; s <= schedule.slow_steps; ++s) {
        const auto start = clock::now();
        if (s > 0) {
            try {
                net.slow_step(feedback, rng);
            } catch (const Error& e) {
                throw e.annotated("slow step " + std::to_string(s));
            }
        }
        RunRecord rec;
        rec.slow_step = s;
        rec.network_output = fast_pass(s);
        rec.best_value = net.best_value();
        rec.parameter_snapshot = net.parameters();
        rec.wall_clock_ms =
            std::chrono::duration<double, std::milli>(clock::now() - start).count();
        records.push_back(std::move(rec));
    }
    return records;
}

} // namespace cn
