#include <cn/harness/config.hpp>
#include <cn/harness/cross.hpp>
#include <cn/harness/execute.hpp>
#include <cn/harness/io.hpp>
#include <cn/harness/records.hpp>

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace cn;
using namespace cn::harness;
namespace fs = std::filesystem;

namespace {

const fs::path source_dir = CN_SOURCE_DIR;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::current_path() / "harness_scratch" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

RunConfig parse(const std::string& text, std::optional<std::uint64_t> env = std::nullopt) {
    return parse_config_text(text, source_dir / "configs", env);
}

ErrorCategory category_of(const std::string& text) {
    try {
        parse(text);
    } catch (const Error& e) {
        return e.category();
    }
    ADD_FAILURE() << "config was accepted: " << text;
    return ErrorCategory::io;
}

int cli(const std::string& args) {
    const std::string cmd = std::string(CN_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

} // namespace

TEST(Config, MinimalEcaIsValid) {
    const auto c = parse(R"({"eca": {"rule": 110, "width": 129, "steps": 64}})");
    EXPECT_EQ(c.architecture, Architecture::eca);
    EXPECT_EQ(c.eca->rule, 110);
    EXPECT_EQ(c.schedule.slow_steps, 64u);
    EXPECT_EQ(c.seed, 1u);
}

TEST(Config, Rejections) {
    EXPECT_EQ(category_of(R"({"ann": {"layers": [2,1], "dataset": "../data/xor.csv"}, "aco": {"random_cities": 5}})"),
              ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"pso": {"dimension": 0}})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"eca": {"rule": 110, "colour": "red"}})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"eca": {"rule": 300}})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"architecture": "pso", "eca": {}})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"aco": {"random_cities": 5}, "schedule": {"meta_generations": 3}})"),
              ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"ann": {"layers": [2,1], "dataset": "no/such/file.csv"}})"), ErrorCategory::config);
    EXPECT_EQ(category_of(R"({"pso": {"dimension": 3}, "cross": {"layers": [2,2,1], "dataset": "../data/xor.csv"}})"),
              ErrorCategory::config);
}

TEST(Config, UnknownKeyIsNamed) {
    try {
        parse(R"({"eca": {"rule": 110, "colour": "red"}})");
        FAIL();
    } catch (const Error& e) {
        EXPECT_NE(std::string(e.what()).find("colour"), std::string::npos);
    }
}

TEST(Config, ParseErrorReportsLine) {
    try {
        parse("{\n  \"eca\": {\n    \"rule\": 110,,\n  }\n}");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::config);
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(Config, SeedPrecedence) {
    EXPECT_EQ(parse(R"({"eca": {}})", 42).seed, 42u);
    EXPECT_EQ(parse(R"({"eca": {}, "seed": 5})", 42).seed, 5u);
    EXPECT_EQ(parse(R"({"eca": {}})").seed, 1u);
    ::setenv("CN_SEED", "17", 1);
    EXPECT_EQ(seed_from_environment(), std::optional<std::uint64_t>(17));
    ::setenv("CN_SEED", "seventeen", 1);
    EXPECT_THROW(seed_from_environment(), Error);
    ::unsetenv("CN_SEED");
    EXPECT_EQ(seed_from_environment(), std::nullopt);
}

TEST(Config, SampleConfigsRoundTrip) {
    const auto dir = scratch("roundtrip");
    for (const auto& entry : fs::directory_iterator(source_dir / "configs")) {
        const auto c = load_config(entry.path());
        const auto copy = dir / entry.path().filename();
        write_config(copy, c);
        EXPECT_EQ(load_config(copy), c) << entry.path();
    }
}

TEST(Config, Defaults) {
    const auto ann = parse(R"({"ann": {"layers": [2,2,1], "dataset": "../data/xor.csv"}})");
    EXPECT_EQ(ann.schedule.fast_steps_per_slow, 4u);
    EXPECT_EQ(ann.schedule.slow_steps, 1000u);
    const auto pso = parse(R"({"pso": {"objective": "rosenbrock"}})");
    EXPECT_EQ(pso.pso->lower, -2.048);
    EXPECT_EQ(pso.schedule.slow_steps, 200u);
    const auto cross = parse(R"({"pso": {}, "cross": {"layers": [2,2,1], "dataset": "../data/xor.csv"}})");
    EXPECT_EQ(cross.pso->dimension, 9u);
    const auto meta = parse(R"({"aco": {"random_cities": 5}, "meta": {"search_box": {"alpha": [0, 5]}}})");
    EXPECT_EQ(meta.schedule.meta_generations, 10u);
    EXPECT_EQ(meta.meta->config.seeds, (std::vector<std::uint64_t>{1, 2, 3}));
}

TEST(Io, Dataset) {
    std::istringstream in("x1,x2,y\n0,1,1\n\n1,1,0\n");
    const auto d = read_dataset(in);
    EXPECT_EQ(d.input_arity, 2u);
    EXPECT_EQ(d.target_arity, 1u);
    ASSERT_EQ(d.samples.size(), 2u);
    EXPECT_EQ(d.samples[1].input, (std::vector<double>{1, 1}));
    EXPECT_EQ(d.samples[1].target, (std::vector<double>{0}));
    std::istringstream ragged("x,y\n1\n");
    EXPECT_THROW(read_dataset(ragged), Error);
    std::istringstream order("y,x\n1,2\n");
    EXPECT_THROW(read_dataset(order), Error);
    std::istringstream word("x,y\n1,abc\n");
    EXPECT_THROW(read_dataset(word), Error);
}

TEST(Io, Graphs) {
    const auto square = read_graph(source_dir / "data" / "square4_matrix.csv", GraphFormat::matrix);
    EXPECT_EQ(square.size(), 4u);
    const auto cities = read_graph(source_dir / "data" / "cities5.csv", GraphFormat::coordinates);
    EXPECT_EQ(cities.size(), 5u);
    std::istringstream tri("id,x,y\n0,0,0\n1,3,0\n2,0,4\n");
    const auto t = read_graph(tri, GraphFormat::coordinates);
    EXPECT_DOUBLE_EQ(t.cost[1][2], 5.0);
    std::istringstream no_header("0,0,0\n1,1,1\n2,2,0\n");
    EXPECT_THROW(read_graph(no_header, GraphFormat::coordinates), Error);
    std::istringstream asym("0,1,2\n1,0,3\n2,4,0\n");
    EXPECT_THROW(read_graph(asym, GraphFormat::matrix), Error);
    std::istringstream holes("0,1,inf\n1,0,1\ninf,1,0\n");
    EXPECT_EQ(read_graph(holes, GraphFormat::matrix).cost[0][2], aco::no_edge);
}

TEST(Records, WriteReadAndStripClock) {
    RunRecord r;
    r.slow_step = 3;
    r.best_value = 1.5;
    r.network_output = {0.25, INFINITY};
    r.parameter_snapshot = {{"alpha", 1.0}};
    r.wall_clock_ms = 12.5;
    std::stringstream ss;
    write_records(ss, json{{"config", {{"architecture", "aco"}}}}, {r});
    const auto text = ss.str();
    const auto f = read_records(ss);
    ASSERT_EQ(f.records.size(), 1u);
    EXPECT_EQ(f.records[0].slow_step, 3u);
    EXPECT_EQ(f.records[0].network_output[1], INFINITY);
    EXPECT_EQ(f.records[0].wall_clock_ms, 12.5);
    const auto stripped = without_wall_clock(text);
    EXPECT_EQ(stripped.find("wall_clock_ms"), std::string::npos);
    EXPECT_NE(stripped.find("\"parameter_snapshot\":{\"alpha\":1.0}}"), std::string::npos) << stripped;
}

TEST(Execute, RerunsAreByteIdenticalWithoutClock) {
    // same relative output in two directories: the header then matches too
    const auto dir = scratch("rerun");
    const auto keep = fs::current_path();
    for (const char* pass : {"a", "b"}) {
        fs::create_directories(dir / pass);
        fs::current_path(dir / pass);
        for (const char* name : {"eca110.json", "aco_cities5.json", "pso_sphere.json", "ann_xor.json"}) {
            auto c = load_config(source_dir / "configs" / name);
            c.output = std::string(name) + "l";
            execute(c);
        }
        fs::current_path(keep);
    }
    for (const char* name : {"eca110.json", "aco_cities5.json", "pso_sphere.json", "ann_xor.json"}) {
        const std::string file = std::string(name) + "l";
        EXPECT_EQ(without_wall_clock(slurp(dir / "a" / file)), without_wall_clock(slurp(dir / "b" / file))) << name;
    }
}

TEST(Execute, EcaRecordsMatchTheGrid) {
    auto c = parse(R"({"eca": {"rule": 110, "width": 31, "steps": 10}})");
    c.output = (scratch("eca") / "eca.jsonl").string();
    const auto out = execute(c);
    const auto grid = render_grid(c);
    ASSERT_EQ(out.records.size(), grid.size());
    for (std::size_t s = 0; s < grid.size(); ++s)
        for (std::size_t i = 0; i < grid[s].size(); ++i)
            EXPECT_EQ(out.records[s].network_output[i], grid[s][i]);
}

TEST(Summarize, SortedByPath) {
    const auto dir = scratch("summary");
    for (std::uint64_t seed : {3, 1, 2}) {
        auto c = parse(R"({"eca": {"width": 9, "steps": 4}})", seed);
        c.output = (dir / ("run-" + std::to_string(seed) + ".jsonl")).string();
        execute(c);
    }
    std::vector<SummaryRow> rows;
    for (const auto& p : expand_glob((dir / "run-*.jsonl").string())) rows.push_back(summarize_file(p));
    ASSERT_EQ(rows.size(), 3u);
    std::ostringstream out;
    write_summary(out, rows);
    std::istringstream lines(out.str());
    std::string line;
    std::getline(lines, line);
    EXPECT_EQ(line, "path,architecture,seed,final_best,iterations,wall_ms");
    for (int seed = 1; seed <= 3; ++seed) {
        std::getline(lines, line);
        EXPECT_NE(line.find("run-" + std::to_string(seed) + ".jsonl,eca," + std::to_string(seed) + ","),
                  std::string::npos)
            << line;
    }
}

TEST(Cross, TrainsXor) {
    const auto data = read_dataset(source_dir / "data" / "xor.csv");
    const ann::LayeredTopology topo{{2, 2, 1}, ann::Activation::tanh, ann::Activation::tanh};
    RngStream rng(1);
    auto r = cross_train(topo, data, pso::PsoParams{}, pso::Bounds::uniform(9, -5, 5), {1, 300, 0}, rng);
    EXPECT_LT(r.mse, 0.05);
    EXPECT_NEAR(ann::mean_squared_error(r.net, data.samples), r.mse, 1e-12);
    EXPECT_EQ(r.records.back().best_value, r.mse);
}

TEST(Cross, OneSampleLinear) {
    ann::Dataset data{1, 1, {{{1.0}, {0.7}}}};
    const ann::LayeredTopology topo{{1, 1}, ann::Activation::identity, ann::Activation::identity};
    RngStream rng(2);
    const auto r = cross_train(topo, data, pso::PsoParams{}, pso::Bounds::uniform(2, -5, 5), {1, 200, 0}, rng);
    EXPECT_LT(r.mse, 1e-6);
}

TEST(Cross, DimensionMustMatch) {
    ann::Dataset data{1, 1, {{{1.0}, {0.7}}}};
    const ann::LayeredTopology topo{{1, 1}, ann::Activation::identity, ann::Activation::identity};
    RngStream rng(2);
    EXPECT_THROW(cross_train(topo, data, pso::PsoParams{}, pso::Bounds::uniform(3, -5, 5), {1, 10, 0}, rng), Error);
}

TEST(Cli, ExitCodes) {
    const auto dir = scratch("cli");
    const auto cfg = (source_dir / "configs" / "eca110.json").string();
    EXPECT_EQ(cli("run " + cfg + " --out " + (dir / "ok.jsonl").string()), 0);
    EXPECT_TRUE(fs::exists(dir / "ok.jsonl"));
    EXPECT_EQ(cli("eca-render " + cfg + " --out " + (dir / "grid.txt").string()), 0);
    EXPECT_EQ(cli("summarize " + (dir / "*.jsonl").string() + " --out " + (dir / "s.csv").string()), 0);
    EXPECT_EQ(cli("analyze " + (dir / "ok.jsonl").string()), 0);

    std::ofstream(dir / "bad.json") << R"({"eca": {"rule": 999}})";
    EXPECT_EQ(cli("run " + (dir / "bad.json").string()), 1);
    EXPECT_EQ(cli("run " + (dir / "missing.json").string()), 3);
    EXPECT_EQ(cli("frobnicate"), 1);

    // lr large enough to overflow tanh-free identity nets
    std::ofstream(dir / "diverge.json") << R"({"ann": {"layers": [2, 1], "hidden_activation": "identity",
        "output_activation": "identity", "learning_rate": 1e6, "dataset": ")"
                                        << (source_dir / "data" / "xor.csv").string()
                                        << R"("}, "schedule": {"slow_steps": 2000},
        "output": ")" << (dir / "div.jsonl").string() << R"("})";
    EXPECT_EQ(cli("run " + (dir / "diverge.json").string()), 2);
}
