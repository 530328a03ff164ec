#pragma once

#include <cn/aco.hpp>
#include <cn/error.hpp>
#include <cn/pso.hpp>
#include <cn/rng.hpp>

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <future>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cn::meta {

using ParamGenome = std::map<std::string, double>;

struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    double width() const noexcept { return hi - lo; }
    double clip(double v) const noexcept { return std::clamp(v, lo, hi); }

    bool operator==(const Interval&) const = default;
};

using SearchBox = std::map<std::string, Interval>;

inline void validate(const SearchBox& box) {
    if (box.empty()) throw config_error("meta.search_box is empty");
    for (const auto& [key, iv] : box)
        if (!(iv.lo <= iv.hi))
            throw config_error("meta.search_box." + key + " is empty (lo > hi)");
}

inline bool inside(const ParamGenome& g, const SearchBox& box) {
    for (const auto& [key, iv] : box) {
        const auto it = g.find(key);
        if (it == g.end() || it->second < iv.lo || it->second > iv.hi) return false;
    }
    return g.size() == box.size();
}

struct MetaConfig {
    std::size_t population = 10;
    std::size_t generations = 10;
    std::size_t tournament = 3;
    double mutation_stddev = 0.1; // fraction of the box width
    double crossover_rate = 0.5;  // per-gene swap probability of uniform crossover
    std::vector<std::uint64_t> seeds{1};
    std::size_t threads = 1;

    void validate() const {
        if (population < 2) throw config_error("meta.population must be >= 2");
        if (generations < 1) throw config_error("meta generations must be >= 1");
        if (tournament < 1) throw config_error("meta.tournament must be >= 1");
        if (!(mutation_stddev >= 0.0)) throw config_error("meta.mutation_stddev must be >= 0");
        if (!(crossover_rate >= 0.0 && crossover_rate <= 1.0))
            throw config_error("meta.crossover_rate must be in [0, 1]");
        if (seeds.empty()) throw config_error("meta.seeds needs at least one seed");
        if (threads < 1) throw config_error("meta.threads must be >= 1");
    }

    bool operator==(const MetaConfig&) const = default;
};

/// Mean over `seeds` of the final best value of one inner run per seed.
/// `inner(genome, seed)` returns that run's final best (lower is better).
template <class InnerRun>
double evaluate_genome(const ParamGenome& genome, InnerRun&& inner, std::span<const std::uint64_t> seeds) {
    if (seeds.empty()) throw config_error("evaluate_genome needs at least one seed");
    double total = 0.0;
    for (auto s : seeds) total += static_cast<double>(inner(genome, s));
    return total / static_cast<double>(seeds.size());
}

struct MetaResult {
    ParamGenome best;
    double best_fitness = 0.0;
    std::vector<double> trace;             // best fitness per generation
    std::vector<ParamGenome> best_genomes; // best genome per generation
};

/// Generational GA: tournament selection, uniform crossover, Gaussian mutation
/// clipped to the box, one elite carried over unchanged.
///
/// If `start` is given it occupies slot 0 of the first generation (clipped to
/// the box), so the result is never worse than that genome on the same seeds.
template <class InnerRun>
MetaResult meta_run(const MetaConfig& config, const SearchBox& box, InnerRun&& inner, RngStream& rng,
                    const std::optional<ParamGenome>& start = std::nullopt) {
    config.validate();
    validate(box);

    auto evaluate_all = [&](const std::vector<ParamGenome>& pop, std::size_t from) {
        std::vector<double> fit(pop.size());
        if (config.threads <= 1) {
            for (std::size_t i = from; i < pop.size(); ++i) fit[i] = evaluate_genome(pop[i], inner, config.seeds);
            return fit;
        }
        std::vector<std::future<double>> jobs;
        for (std::size_t i = from; i < pop.size(); ++i)
            jobs.push_back(std::async(std::launch::async, [&, i] {
                return evaluate_genome(pop[i], inner, config.seeds);
            }));
        for (std::size_t i = from; i < pop.size(); ++i) fit[i] = jobs[i - from].get();
        return fit;
    };

    std::vector<ParamGenome> pop(config.population);
    for (std::size_t i = 0; i < pop.size(); ++i)
        for (const auto& [key, iv] : box) pop[i][key] = rng.uniform(iv.lo, iv.hi);
    if (start)
        for (const auto& [key, iv] : box) {
            const auto it = start->find(key);
            if (it == start->end()) throw config_error("start genome has no value for '" + key + "'");
            pop[0][key] = iv.clip(it->second);
        }
    std::vector<double> fit = evaluate_all(pop, 0);

    auto argbest = [](const std::vector<double>& f) {
        return static_cast<std::size_t>(std::min_element(f.begin(), f.end()) - f.begin());
    };
    auto tournament = [&]() -> const ParamGenome& {
        std::size_t winner = static_cast<std::size_t>(rng.below(pop.size()));
        for (std::size_t k = 1; k < config.tournament; ++k) {
            const auto c = static_cast<std::size_t>(rng.below(pop.size()));
            if (fit[c] < fit[winner]) winner = c;
        }
        return pop[winner];
    };

    MetaResult result;
    std::size_t b = argbest(fit);
    result.trace.push_back(fit[b]);
    result.best_genomes.push_back(pop[b]);

    for (std::size_t gen = 1; gen < config.generations; ++gen) {
        std::vector<ParamGenome> next;
        next.reserve(pop.size());
        next.push_back(pop[b]);
        while (next.size() < pop.size()) {
            const ParamGenome& a = tournament();
            const ParamGenome& c = tournament();
            ParamGenome child;
            for (const auto& [key, iv] : box) {
                double v = rng.uniform() < config.crossover_rate ? c.at(key) : a.at(key);
                v += rng.normal() * config.mutation_stddev * iv.width();
                child[key] = iv.clip(v);
            }
            next.push_back(std::move(child));
        }
        std::vector<double> next_fit = evaluate_all(next, 1);
        next_fit[0] = fit[b];
        pop = std::move(next);
        fit = std::move(next_fit);
        b = argbest(fit);
        result.trace.push_back(fit[b]);
        result.best_genomes.push_back(pop[b]);
    }
    result.best = pop[b];
    result.best_fitness = fit[b];
    return result;
}

/// Overrides the AcoParams fields named in the genome.
inline aco::AcoParams apply(aco::AcoParams p, const ParamGenome& g) {
    for (const auto& [key, v] : g) {
        if (key == "alpha") p.alpha = v;
        else if (key == "beta") p.beta = v;
        else if (key == "rho") p.rho = v;
        else if (key == "q") p.q = v;
        else if (key == "tau0") p.tau0 = v;
        else throw config_error("'" + key + "' is not a tunable ACO parameter");
    }
    return p;
}

inline pso::PsoParams apply(pso::PsoParams p, const ParamGenome& g) {
    for (const auto& [key, v] : g) {
        if (key == "inertia") p.inertia = v;
        else if (key == "cognitive") p.cognitive = v;
        else if (key == "social") p.social = v;
        else if (key == "v_max") p.v_max = v;
        else throw config_error("'" + key + "' is not a tunable PSO parameter");
    }
    return p;
}

inline ParamGenome genome_of(const aco::AcoParams& p, const SearchBox& box) {
    const ParamGenome all{{"alpha", p.alpha}, {"beta", p.beta}, {"rho", p.rho}, {"q", p.q}, {"tau0", p.tau0}};
    ParamGenome g;
    for (const auto& [key, iv] : box) {
        const auto it = all.find(key);
        if (it == all.end()) throw config_error("'" + key + "' is not a tunable ACO parameter");
        g[key] = it->second;
    }
    return g;
}

inline ParamGenome genome_of(const pso::PsoParams& p, const SearchBox& box) {
    const ParamGenome all{{"inertia", p.inertia}, {"cognitive", p.cognitive}, {"social", p.social}, {"v_max", p.v_max}};
    ParamGenome g;
    for (const auto& [key, iv] : box) {
        const auto it = all.find(key);
        if (it == all.end()) throw config_error("'" + key + "' is not a tunable PSO parameter");
        g[key] = it->second;
    }
    return g;
}

} // namespace cn::meta
