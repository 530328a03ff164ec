#pragma once

#include <cn/aco.hpp>
#include <cn/ann.hpp>
#include <cn/eca.hpp>
#include <cn/error.hpp>
#include <cn/harness/config.hpp>
#include <cn/harness/cross.hpp>
#include <cn/harness/io.hpp>
#include <cn/harness/records.hpp>
#include <cn/meta.hpp>
#include <cn/pso.hpp>
#include <cn/rng.hpp>
#include <cn/schedule.hpp>

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace cn::harness {

struct RunOutcome {
    std::filesystem::path output;
    std::vector<RunRecord> records;
    std::optional<meta::MetaResult> meta;
};

inline std::filesystem::path output_path(const RunConfig& c) {
    if (!c.output.empty()) return c.output;
    return std::string(to_string(c.architecture)) + "-" + std::to_string(c.seed) + ".jsonl";
}

/// TSP instance of an ACO run; generated instances depend only on the seed.
inline aco::TspInstance make_instance(const AcoSection& s, std::uint64_t seed) {
    if (s.random_cities > 0) {
        RngStream rng = RngStream(seed).derive(0);
        return aco::TspInstance::random_euclidean(s.random_cities, rng);
    }
    return read_graph(std::filesystem::path(s.graph), s.graph_format);
}

inline eca::Tape initial_tape(const EcaSection& s, std::uint64_t seed) {
    if (s.initial == "single") return eca::Tape::single_one(s.width, s.boundary);
    if (s.initial == "random") {
        RngStream rng(seed);
        return eca::Tape::random(s.width, rng, s.boundary);
    }
    eca::Tape t{eca::Row(s.initial.size()), s.boundary};
    for (std::size_t i = 0; i < s.initial.size(); ++i) t.cells[i] = static_cast<eca::Cell>(s.initial[i] - '0');
    t.validate();
    return t;
}

inline pso::Bounds pso_bounds(const PsoSection& s) { return pso::Bounds::uniform(s.dimension, s.lower, s.upper); }

/// Final best value of a two-scale ACO run.
inline double aco_final_best(const aco::TspInstance& inst, const aco::AcoParams& p, const ScaleSchedule& schedule,
                             std::uint64_t seed) {
    aco::Colony colony(inst, p);
    RngStream rng(seed);
    const ScaleSchedule two_scale{schedule.fast_steps_per_slow, schedule.slow_steps, 0};
    return run(colony, two_scale, rng).back().best_value;
}

inline double pso_final_best(const PsoSection& s, const pso::PsoParams& p, const ScaleSchedule& schedule,
                             std::uint64_t seed) {
    RngStream rng(seed);
    pso::Swarm swarm(pso::objective_by_name(s.objective), pso_bounds(s), p, rng);
    const ScaleSchedule two_scale{schedule.fast_steps_per_slow, schedule.slow_steps, 0};
    return run(swarm, two_scale, rng).back().best_value;
}

/// One record per GA generation: best fitness and best genome.
inline std::vector<RunRecord> meta_records(const meta::MetaResult& r) {
    std::vector<RunRecord> out;
    for (std::size_t g = 0; g < r.trace.size(); ++g) {
        RunRecord rec;
        rec.slow_step = g;
        rec.best_value = r.trace[g];
        rec.parameter_snapshot = ParameterMap(r.best_genomes[g].begin(), r.best_genomes[g].end());
        for (const auto& [_, v] : r.best_genomes[g]) rec.network_output.push_back(v);
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::vector<RunRecord> eca_records(const EcaSection& s, std::uint64_t seed) {
    using clock = std::chrono::steady_clock;
    const auto tape = initial_tape(s, seed);
    eca::Automaton automaton(tape, eca::rule_table(s.rule), s.updating);
    RngStream rng(seed);
    std::vector<RunRecord> out;
    for (std::size_t t = 0; t <= s.steps; ++t) {
        const auto start = clock::now();
        if (t > 0) automaton.update(rng);
        RunRecord rec;
        rec.slow_step = t;
        rec.network_output = automaton.readout();
        rec.best_value = automaton.best_value();
        rec.parameter_snapshot = automaton.parameters();
        rec.wall_clock_ms = std::chrono::duration<double, std::milli>(clock::now() - start).count();
        out.push_back(std::move(rec));
    }
    return out;
}

/// Runs one validated config and writes its record file (header + records).
inline RunOutcome execute(const RunConfig& c) {
    RunOutcome outcome;
    outcome.output = output_path(c);

    switch (c.architecture) {
    case Architecture::eca:
        outcome.records = eca_records(*c.eca, c.seed);
        break;
    case Architecture::ann: {
        RngStream rng(c.seed);
        auto net = ann::FeedforwardNet::random(c.ann->topology, rng);
        ann::BackpropTrainer trainer(std::move(net), read_dataset(std::filesystem::path(c.ann->dataset)),
                                     c.ann->learning_rate);
        outcome.records = run(trainer, c.schedule, rng);
        break;
    }
    case Architecture::aco: {
        if (c.meta) {
            const auto& section = *c.aco;
            auto inner = [&](const meta::ParamGenome& g, std::uint64_t s) {
                return aco_final_best(make_instance(section, s), meta::apply(section.params, g), c.schedule, s);
            };
            RngStream rng(c.seed);
            outcome.meta = meta::meta_run(c.meta->config, c.meta->search_box, inner, rng,
                                          meta::genome_of(section.params, c.meta->search_box));
            outcome.records = meta_records(*outcome.meta);
        } else {
            aco::Colony colony(make_instance(*c.aco, c.seed), c.aco->params);
            RngStream rng(c.seed);
            outcome.records = run(colony, c.schedule, rng);
        }
        break;
    }
    case Architecture::pso: {
        if (c.cross) {
            RngStream rng(c.seed);
            const auto data = read_dataset(std::filesystem::path(c.cross->dataset));
            auto result = cross_train(c.cross->topology, data, c.pso->params, pso_bounds(*c.pso), c.schedule, rng);
            outcome.records = std::move(result.records);
        } else if (c.meta) {
            const auto& section = *c.pso;
            auto inner = [&](const meta::ParamGenome& g, std::uint64_t s) {
                return pso_final_best(section, meta::apply(section.params, g), c.schedule, s);
            };
            RngStream rng(c.seed);
            outcome.meta = meta::meta_run(c.meta->config, c.meta->search_box, inner, rng,
                                          meta::genome_of(section.params, c.meta->search_box));
            outcome.records = meta_records(*outcome.meta);
        } else {
            RngStream rng(c.seed);
            pso::Swarm swarm(pso::objective_by_name(c.pso->objective), pso_bounds(*c.pso), c.pso->params, rng);
            outcome.records = run(swarm, c.schedule, rng);
        }
        break;
    }
    }

    write_records(outcome.output, json{{"config", config_to_json(c)}, {"rng", RngStream::algorithm}},
                  outcome.records);
    return outcome;
}

/// Space-time grid of an eca config.
inline eca::Grid render_grid(const RunConfig& c) {
    if (c.architecture != Architecture::eca) throw config_error("eca-render needs an eca config");
    return eca::evolve(initial_tape(*c.eca, c.seed), eca::rule_table(c.eca->rule),
                       static_cast<long long>(c.eca->steps));
}

} // namespace cn::harness
