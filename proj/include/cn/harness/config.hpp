#pragma once

#include <cn/aco.hpp>
#include <cn/ann.hpp>
#include <cn/eca.hpp>
#include <cn/error.hpp>
#include <cn/harness/io.hpp>
#include <cn/meta.hpp>
#include <cn/network.hpp>
#include <cn/pso.hpp>
#include <cn/schedule.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace cn::harness {

using json = nlohmann::ordered_json;

enum class Architecture { ann, aco, pso, eca };

inline const char* to_string(Architecture a) noexcept {
    switch (a) {
    case Architecture::ann: return "ann";
    case Architecture::aco: return "aco";
    case Architecture::pso: return "pso";
    case Architecture::eca: return "eca";
    }
    return "ann";
}

struct AnnSection {
    ann::LayeredTopology topology{{2, 2, 1}, ann::Activation::tanh, ann::Activation::tanh};
    double learning_rate = 0.5;
    std::string dataset;

    bool operator==(const AnnSection&) const = default;
};

struct AcoSection {
    aco::AcoParams params;
    std::string graph;           // empty when the instance is generated
    GraphFormat graph_format = GraphFormat::coordinates;
    std::size_t random_cities = 0; // > 0: uniform cities in the unit square, drawn from the seed

    bool operator==(const AcoSection&) const = default;
};

struct PsoSection {
    pso::PsoParams params;
    std::string objective = "sphere"; // "ann-mse" when a cross section drives it
    std::size_t dimension = 2;
    double lower = -5.12;
    double upper = 5.12;

    bool operator==(const PsoSection&) const = default;
};

struct EcaSection {
    int rule = 110;
    std::size_t width = 129;
    std::size_t steps = 64;
    eca::Boundary boundary = eca::Boundary::fixed_zero;
    std::string initial = "single"; // "single", "random" or an explicit 0/1 string
    UpdateMode updating = UpdateMode::synchronous;
    std::string render_format = "text"; // "text" or "pbm"

    bool operator==(const EcaSection&) const = default;
};

/// Third scale. The GA's generation count is schedule.meta_generations and
/// its inner-run budget is the rest of the schedule.
struct MetaSection {
    meta::MetaConfig config;
    meta::SearchBox search_box;

    bool operator==(const MetaSection&) const = default;
};

/// PSO (outer) trains an ANN (inner): a particle position is the flattened weight vector.
struct CrossSection {
    ann::LayeredTopology topology{{2, 2, 1}, ann::Activation::tanh, ann::Activation::tanh};
    std::string dataset;

    bool operator==(const CrossSection&) const = default;
};

struct RunConfig {
    Architecture architecture = Architecture::eca;
    std::optional<AnnSection> ann;
    std::optional<AcoSection> aco;
    std::optional<PsoSection> pso;
    std::optional<EcaSection> eca;
    ScaleSchedule schedule;
    std::uint64_t seed = 1;
    std::string output; // empty: "<architecture>-<seed>.jsonl"
    std::optional<MetaSection> meta;
    std::optional<CrossSection> cross;

    bool operator==(const RunConfig&) const = default;
};

namespace detail {

inline void check_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
    if (!obj.is_object()) throw config_error(where + ": expected an object");
    for (const auto& [key, _] : obj.items())
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw config_error(where.empty() ? "unknown key '" + key + "'" : where + ": unknown key '" + key + "'");
}

inline std::string path_of(const std::string& where, const std::string& key) {
    return where.empty() ? key : where + "." + key;
}

inline double real(const json& obj, const std::string& where, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number()) throw config_error(path_of(where, key) + ": expected a number");
    return v.get<double>();
}

inline std::uint64_t count(const json& obj, const std::string& where, const std::string& key, std::uint64_t fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) throw config_error(path_of(where, key) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
}

inline std::string text(const json& obj, const std::string& where, const std::string& key, std::string fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& v = obj.at(key);
    if (!v.is_string()) throw config_error(path_of(where, key) + ": expected a string");
    return v.get<std::string>();
}

inline std::string resolve_path(const std::string& p, const std::filesystem::path& base, const std::string& field) {
    if (p.empty()) throw config_error(field + ": path is required");
    std::filesystem::path fp(p);
    if (fp.is_relative()) fp = std::filesystem::absolute(base / fp);
    fp = fp.lexically_normal();
    if (!std::filesystem::exists(fp)) throw config_error(field + ": file '" + fp.string() + "' does not exist");
    return fp.string();
}

template <class F>
auto wrap(const std::string& field, F&& f) {
    try {
        return f();
    } catch (const Error& e) {
        if (e.category() == ErrorCategory::io) throw;
        throw config_error(field + ": " + e.what());
    }
}

inline ann::LayeredTopology parse_topology(const json& obj, const std::string& where) {
    ann::LayeredTopology t{{2, 2, 1}, ann::Activation::tanh, ann::Activation::tanh};
    if (obj.contains("layers")) {
        const auto& l = obj.at("layers");
        if (!l.is_array()) throw config_error(where + ".layers: expected an array");
        t.layers.clear();
        for (const auto& n : l) {
            if (!n.is_number_unsigned()) throw config_error(where + ".layers: expected positive integers");
            t.layers.push_back(n.get<std::size_t>());
        }
    }
    t.hidden = wrap(where + ".hidden_activation",
                    [&] { return ann::parse_activation(text(obj, where, "hidden_activation", "tanh")); });
    t.output = wrap(where + ".output_activation",
                    [&] { return ann::parse_activation(text(obj, where, "output_activation", "tanh")); });
    wrap(where + ".layers", [&] { t.validate(); return 0; });
    return t;
}

inline json topology_json(const ann::LayeredTopology& t) {
    return json{{"layers", t.layers}, {"hidden_activation", ann::to_string(t.hidden)},
                {"output_activation", ann::to_string(t.output)}};
}

inline ann::Dataset load_dataset_for(const ann::LayeredTopology& t, const std::string& path, const std::string& field) {
    auto ds = read_dataset(std::filesystem::path(path));
    if (ds.input_arity != t.layers.front() || ds.target_arity != t.layers.back())
        throw config_error(field + ": dataset has " + std::to_string(ds.input_arity) + " inputs and " +
                           std::to_string(ds.target_arity) + " targets, layers need " +
                           std::to_string(t.layers.front()) + " and " + std::to_string(t.layers.back()));
    return ds;
}

inline std::pair<double, double> default_box(std::string_view objective) {
    if (objective == "rosenbrock") return {-2.048, 2.048};
    if (objective == "ann-mse") return {-5.0, 5.0};
    return {-5.12, 5.12};
}

} // namespace detail

/// Parses and validates a config document. Relative paths resolve against
/// `base_dir`; `env_seed` is used only when the document has no seed.
inline RunConfig parse_config(const json& doc, const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> env_seed = std::nullopt) {
    using namespace detail;
    check_keys(doc, "", {"architecture", "seed", "output", "schedule", "ann", "aco", "pso", "eca", "meta", "cross"});

    RunConfig cfg;
    int sections = 0;
    for (const char* s : {"ann", "aco", "pso", "eca"}) sections += doc.contains(s) ? 1 : 0;
    if (sections != 1)
        throw config_error(sections == 0 ? "config needs one of the sections ann, aco, pso, eca"
                                         : "config has more than one architecture section");
    if (doc.contains("ann")) cfg.architecture = Architecture::ann;
    if (doc.contains("aco")) cfg.architecture = Architecture::aco;
    if (doc.contains("pso")) cfg.architecture = Architecture::pso;
    if (doc.contains("eca")) cfg.architecture = Architecture::eca;
    if (doc.contains("architecture")) {
        const auto a = text(doc, "", "architecture", "");
        if (a != to_string(cfg.architecture))
            throw config_error("architecture: '" + a + "' does not match the '" + to_string(cfg.architecture) +
                               "' section");
    }

    if (doc.contains("seed")) cfg.seed = count(doc, "", "seed", 1);
    else if (env_seed) cfg.seed = *env_seed;
    cfg.output = text(doc, "", "output", "");

    const bool has_meta = doc.contains("meta");
    const bool has_cross = doc.contains("cross");
    if (has_meta && has_cross) throw config_error("meta and cross sections cannot be combined");
    if (has_meta && cfg.architecture != Architecture::aco && cfg.architecture != Architecture::pso)
        throw config_error("meta: only aco and pso parameters can be searched");
    if (has_cross && cfg.architecture != Architecture::pso)
        throw config_error("cross: the outer architecture must be pso");

    std::size_t default_fast = 1, default_slow = 100;

    switch (cfg.architecture) {
    case Architecture::ann: {
        const auto& j = doc.at("ann");
        check_keys(j, "ann", {"layers", "hidden_activation", "output_activation", "learning_rate", "dataset"});
        AnnSection s;
        s.topology = parse_topology(j, "ann");
        s.learning_rate = real(j, "ann", "learning_rate", 0.5);
        if (!(s.learning_rate >= 0.0)) throw config_error("ann.learning_rate: must be >= 0");
        s.dataset = resolve_path(text(j, "ann", "dataset", ""), base_dir, "ann.dataset");
        default_fast = load_dataset_for(s.topology, s.dataset, "ann.dataset").samples.size();
        default_slow = 1000;
        cfg.ann = std::move(s);
        break;
    }
    case Architecture::aco: {
        const auto& j = doc.at("aco");
        check_keys(j, "aco", {"alpha", "beta", "rho", "q", "ants", "tau0", "tau_min", "demon", "graph",
                              "graph_format", "random_cities"});
        AcoSection s;
        auto& p = s.params;
        p.alpha = real(j, "aco", "alpha", p.alpha);
        p.beta = real(j, "aco", "beta", p.beta);
        p.rho = real(j, "aco", "rho", p.rho);
        p.q = real(j, "aco", "q", p.q);
        p.ants = count(j, "aco", "ants", p.ants);
        p.tau0 = real(j, "aco", "tau0", p.tau0);
        p.tau_min = real(j, "aco", "tau_min", p.tau_min);
        p.demon = wrap("aco.demon", [&] { return aco::parse_demon(text(j, "aco", "demon", "off")); });
        p.validate();
        s.graph_format = wrap("aco.graph_format", [&] { return parse_graph_format(text(j, "aco", "graph_format", "coordinates")); });
        s.random_cities = count(j, "aco", "random_cities", 0);
        const bool has_graph = j.contains("graph");
        if (has_graph == (s.random_cities > 0))
            throw config_error("aco: give exactly one of graph and random_cities");
        if (has_graph) {
            s.graph = resolve_path(text(j, "aco", "graph", ""), base_dir, "aco.graph");
            wrap("aco.graph", [&] { return read_graph(std::filesystem::path(s.graph), s.graph_format).size(); });
        } else if (s.random_cities < 3) {
            throw config_error("aco.random_cities: needs at least 3 cities");
        } else {
            s.graph_format = GraphFormat::coordinates;
        }
        default_slow = 100;
        cfg.aco = std::move(s);
        break;
    }
    case Architecture::pso: {
        const auto& j = doc.at("pso");
        check_keys(j, "pso", {"inertia", "cognitive", "social", "v_max", "swarm_size", "topology", "neighborhoods",
                              "objective", "dimension", "lower", "upper"});
        PsoSection s;
        auto& p = s.params;
        p.inertia = real(j, "pso", "inertia", p.inertia);
        p.cognitive = real(j, "pso", "cognitive", p.cognitive);
        p.social = real(j, "pso", "social", p.social);
        p.v_max = real(j, "pso", "v_max", p.v_max);
        p.swarm_size = count(j, "pso", "swarm_size", p.swarm_size);
        p.topology = wrap("pso.topology", [&] { return pso::parse_topology(text(j, "pso", "topology", "ring")); });
        if (j.contains("neighborhoods")) {
            if (p.topology != pso::Topology::custom)
                throw config_error("pso.neighborhoods: only valid with topology 'custom'");
            const auto& nb = j.at("neighborhoods");
            if (!nb.is_array()) throw config_error("pso.neighborhoods: expected an array of index arrays");
            for (const auto& members : nb) {
                if (!members.is_array() || members.size() < 2)
                    throw config_error("pso.neighborhoods: every neighborhood needs at least two members");
                std::vector<std::size_t> m;
                for (const auto& idx : members) {
                    if (!idx.is_number_unsigned() || idx.get<std::size_t>() >= p.swarm_size)
                        throw config_error("pso.neighborhoods: member index out of range");
                    m.push_back(idx.get<std::size_t>());
                }
                p.neighborhoods.push_back(std::move(m));
            }
        }
        wrap("pso", [&] { p.validate(); return 0; });

        if (has_cross) {
            const auto& c = doc.at("cross");
            check_keys(c, "cross", {"layers", "hidden_activation", "output_activation", "dataset"});
            CrossSection cs;
            cs.topology = parse_topology(c, "cross");
            cs.dataset = resolve_path(text(c, "cross", "dataset", ""), base_dir, "cross.dataset");
            load_dataset_for(cs.topology, cs.dataset, "cross.dataset");
            s.objective = text(j, "pso", "objective", "ann-mse");
            if (s.objective != "ann-mse")
                throw config_error("pso.objective: must be 'ann-mse' when a cross section is present");
            s.dimension = count(j, "pso", "dimension", cs.topology.parameter_count());
            if (s.dimension != cs.topology.parameter_count())
                throw config_error("pso.dimension: " + std::to_string(s.dimension) +
                                   " does not match the ANN weight count " +
                                   std::to_string(cs.topology.parameter_count()));
            cfg.cross = std::move(cs);
        } else {
            s.objective = text(j, "pso", "objective", "sphere");
            wrap("pso.objective", [&] { pso::objective_by_name(s.objective); return 0; });
            s.dimension = count(j, "pso", "dimension", 2);
        }
        if (s.dimension == 0) throw config_error("pso.dimension: must be >= 1");
        const auto [lo, hi] = default_box(s.objective);
        s.lower = real(j, "pso", "lower", lo);
        s.upper = real(j, "pso", "upper", hi);
        if (!(s.lower <= s.upper)) throw config_error("pso.lower: exceeds pso.upper");
        default_slow = 200;
        cfg.pso = std::move(s);
        break;
    }
    case Architecture::eca: {
        if (doc.contains("schedule")) throw config_error("schedule: eca runs are driven by eca.steps");
        const auto& j = doc.at("eca");
        check_keys(j, "eca", {"rule", "width", "steps", "boundary", "initial", "updating", "render_format"});
        EcaSection s;
        s.rule = static_cast<int>(count(j, "eca", "rule", 110));
        wrap("eca.rule", [&] { return eca::rule_table(s.rule); });
        s.initial = text(j, "eca", "initial", "single");
        const bool explicit_tape = s.initial != "single" && s.initial != "random";
        if (explicit_tape) {
            if (s.initial.find_first_not_of("01") != std::string::npos)
                throw config_error("eca.initial: expected 'single', 'random' or a string of 0/1");
            s.width = count(j, "eca", "width", s.initial.size());
            if (s.width != s.initial.size()) throw config_error("eca.width: does not match the length of eca.initial");
        } else {
            s.width = count(j, "eca", "width", 129);
        }
        if (s.width < 3) throw config_error("eca.width: must be >= 3");
        s.steps = count(j, "eca", "steps", 64);
        s.boundary = wrap("eca.boundary", [&] { return eca::parse_boundary(text(j, "eca", "boundary", "fixed-zero")); });
        s.updating = wrap("eca.updating", [&] { return parse_update_mode(text(j, "eca", "updating", "synchronous")); });
        s.render_format = text(j, "eca", "render_format", "text");
        if (s.render_format != "text" && s.render_format != "pbm")
            throw config_error("eca.render_format: expected 'text' or 'pbm'");
        cfg.schedule = {1, s.steps, 0};
        cfg.eca = std::move(s);
        return cfg;
    }
    }

    const json sched = doc.contains("schedule") ? doc.at("schedule") : json::object();
    check_keys(sched, "schedule", {"fast_steps_per_slow", "slow_steps", "meta_generations"});
    cfg.schedule.fast_steps_per_slow = count(sched, "schedule", "fast_steps_per_slow", default_fast);
    cfg.schedule.slow_steps = count(sched, "schedule", "slow_steps", default_slow);
    cfg.schedule.meta_generations = count(sched, "schedule", "meta_generations", has_meta ? 10 : 0);
    if (cfg.schedule.fast_steps_per_slow < 1) throw config_error("schedule.fast_steps_per_slow: must be >= 1");
    if (cfg.schedule.meta_generations > 0 && !has_meta)
        throw config_error("schedule.meta_generations: needs a meta section");
    if (has_meta && cfg.schedule.meta_generations == 0)
        throw config_error("schedule.meta_generations: must be >= 1 with a meta section");

    if (has_meta) {
        const auto& j = doc.at("meta");
        check_keys(j, "meta", {"population", "tournament", "mutation_stddev", "crossover_rate", "seeds", "threads",
                               "search_box"});
        MetaSection m;
        auto& mc = m.config;
        mc.population = count(j, "meta", "population", mc.population);
        mc.tournament = count(j, "meta", "tournament", mc.tournament);
        mc.mutation_stddev = real(j, "meta", "mutation_stddev", mc.mutation_stddev);
        mc.crossover_rate = real(j, "meta", "crossover_rate", mc.crossover_rate);
        mc.threads = count(j, "meta", "threads", mc.threads);
        mc.generations = cfg.schedule.meta_generations;
        if (j.contains("seeds")) {
            const auto& sj = j.at("seeds");
            if (!sj.is_array()) throw config_error("meta.seeds: expected an array");
            mc.seeds.clear();
            for (const auto& v : sj) {
                if (!v.is_number_unsigned()) throw config_error("meta.seeds: expected non-negative integers");
                mc.seeds.push_back(v.get<std::uint64_t>());
            }
        } else {
            mc.seeds = {1, 2, 3};
        }
        wrap("meta", [&] { mc.validate(); return 0; });
        if (!j.contains("search_box")) throw config_error("meta.search_box: required");
        const auto& box = j.at("search_box");
        if (!box.is_object()) throw config_error("meta.search_box: expected an object");
        for (const auto& [key, iv] : box.items()) {
            if (!iv.is_array() || iv.size() != 2 || !iv[0].is_number() || !iv[1].is_number())
                throw config_error("meta.search_box." + key + ": expected [lo, hi]");
            m.search_box[key] = {iv[0].get<double>(), iv[1].get<double>()};
        }
        wrap("meta.search_box", [&] {
            meta::validate(m.search_box);
            if (cfg.architecture == Architecture::aco) meta::genome_of(cfg.aco->params, m.search_box);
            else meta::genome_of(cfg.pso->params, m.search_box);
            return 0;
        });
        cfg.meta = std::move(m);
    }
    return cfg;
}

/// Fully resolved config, every default written out.
inline json config_to_json(const RunConfig& c) {
    json j;
    j["architecture"] = to_string(c.architecture);
    j["seed"] = c.seed;
    j["output"] = c.output;
    if (c.architecture != Architecture::eca)
        j["schedule"] = {{"fast_steps_per_slow", c.schedule.fast_steps_per_slow},
                         {"slow_steps", c.schedule.slow_steps},
                         {"meta_generations", c.schedule.meta_generations}};
    if (c.ann) {
        json s = detail::topology_json(c.ann->topology);
        s["learning_rate"] = c.ann->learning_rate;
        s["dataset"] = c.ann->dataset;
        j["ann"] = std::move(s);
    }
    if (c.aco) {
        const auto& p = c.aco->params;
        json s{{"alpha", p.alpha}, {"beta", p.beta}, {"rho", p.rho}, {"q", p.q}, {"ants", p.ants},
               {"tau0", p.tau0}, {"tau_min", p.tau_min}, {"demon", aco::to_string(p.demon)}};
        if (c.aco->random_cities > 0) s["random_cities"] = c.aco->random_cities;
        else {
            s["graph"] = c.aco->graph;
            s["graph_format"] = to_string(c.aco->graph_format);
        }
        j["aco"] = std::move(s);
    }
    if (c.pso) {
        const auto& p = c.pso->params;
        json s{{"inertia", p.inertia}, {"cognitive", p.cognitive}, {"social", p.social}, {"v_max", p.v_max},
               {"swarm_size", p.swarm_size}, {"topology", pso::to_string(p.topology)}};
        if (p.topology == pso::Topology::custom) s["neighborhoods"] = p.neighborhoods;
        s["objective"] = c.pso->objective;
        s["dimension"] = c.pso->dimension;
        s["lower"] = c.pso->lower;
        s["upper"] = c.pso->upper;
        j["pso"] = std::move(s);
    }
    if (c.eca) {
        const auto& e = *c.eca;
        j["eca"] = {{"rule", e.rule}, {"width", e.width}, {"steps", e.steps},
                    {"boundary", eca::to_string(e.boundary)}, {"initial", e.initial},
                    {"updating", to_string(e.updating)}, {"render_format", e.render_format}};
    }
    if (c.meta) {
        const auto& m = c.meta->config;
        json box = json::object();
        for (const auto& [k, iv] : c.meta->search_box) box[k] = {iv.lo, iv.hi};
        j["meta"] = {{"population", m.population}, {"tournament", m.tournament},
                     {"mutation_stddev", m.mutation_stddev}, {"crossover_rate", m.crossover_rate},
                     {"seeds", m.seeds}, {"threads", m.threads}, {"search_box", std::move(box)}};
    }
    if (c.cross) {
        json s = detail::topology_json(c.cross->topology);
        s["dataset"] = c.cross->dataset;
        j["cross"] = std::move(s);
    }
    return j;
}

/// Parses JSON text; syntax errors report the line.
inline RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                                   std::optional<std::uint64_t> env_seed = std::nullopt) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n');
        throw config_error("config parse error at line " + std::to_string(line) + ": " + e.what());
    }
    return parse_config(doc, base_dir, env_seed);
}

/// CN_SEED as an unsigned integer, if set and valid.
inline std::optional<std::uint64_t> seed_from_environment() {
    const char* v = std::getenv("CN_SEED");
    if (!v || !*v) return std::nullopt;
    std::uint64_t s = 0;
    const std::string str(v);
    const auto [ptr, ec] = std::from_chars(str.data(), str.data() + str.size(), s);
    if (ec != std::errc{} || ptr != str.data() + str.size())
        throw config_error("CN_SEED: '" + str + "' is not a non-negative integer");
    return s;
}

inline RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    const auto base = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    return parse_config_text(ss.str(), base, seed_from_environment());
}

inline void write_config(const std::filesystem::path& path, const RunConfig& c) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write '" + path.string() + "'");
    out << config_to_json(c).dump(2) << '\n';
}

} // namespace cn::harness
