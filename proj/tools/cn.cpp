#include <cn/analysis.hpp>
#include <cn/eca.hpp>
#include <cn/error.hpp>
#include <cn/harness/config.hpp>
#include <cn/harness/execute.hpp>
#include <cn/harness/records.hpp>

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace cn;

namespace {

harness::RunConfig load_with_overrides(const std::string& path, const std::optional<std::uint64_t>& seed,
                                       const std::string& out) {
    auto cfg = harness::load_config(path);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.output = out;
    return cfg;
}

int cmd_run(const std::string& config, const std::optional<std::uint64_t>& seed, const std::string& out) {
    const auto cfg = load_with_overrides(config, seed, out);
    const auto outcome = harness::execute(cfg);
    const auto& last = outcome.records.back();
    std::cout << harness::to_string(cfg.architecture) << " seed=" << cfg.seed << " records=" << outcome.records.size()
              << " final_best=" << harness::real_to_json(last.best_value).dump() << " -> "
              << outcome.output.string() << '\n';
    return 0;
}

int cmd_summarize(const std::vector<std::string>& patterns, const std::string& out) {
    std::vector<harness::SummaryRow> rows;
    for (const auto& p : patterns) {
        const auto files = harness::expand_glob(p);
        if (files.empty()) throw io_error("no record files match '" + p + "'");
        for (const auto& f : files) rows.push_back(harness::summarize_file(f));
    }
    if (out.empty()) {
        harness::write_summary(std::cout, rows);
    } else {
        std::ofstream o(out, std::ios::binary);
        if (!o) throw io_error("cannot write '" + out + "'");
        harness::write_summary(o, rows);
    }
    return 0;
}

int cmd_eca_render(const std::string& config, const std::optional<std::uint64_t>& seed, const std::string& out) {
    const auto cfg = load_with_overrides(config, seed, "");
    const auto grid = harness::render_grid(cfg);
    const bool pbm = cfg.eca->render_format == "pbm";
    fs::path path = out;
    if (path.empty())
        path = "eca-" + std::to_string(cfg.eca->rule) + (pbm ? ".pbm" : ".txt");
    std::ofstream o(path, std::ios::binary);
    if (!o) throw io_error("cannot write '" + path.string() + "'");
    if (pbm) eca::write_pbm(o, grid);
    else eca::write_text(o, grid);
    if (!o) throw io_error("write to '" + path.string() + "' failed");
    std::cout << "rule " << cfg.eca->rule << ": " << grid.size() << " rows x " << cfg.eca->width << " cells -> "
              << path.string() << '\n';
    return 0;
}

int cmd_analyze(const std::string& file, bool grid, std::size_t bins) {
    analysis::StateTrace trace = [&] {
        if (grid) {
            std::ifstream in(file, std::ios::binary);
            if (!in) throw io_error("cannot open '" + file + "'");
            return analysis::StateTrace::from_rows(eca::read_text(in));
        }
        return harness::trace_from_records(harness::read_records(fs::path(file)).records, bins);
    }();
    const double node = analysis::node_scale_info(trace);
    const double network = analysis::network_scale_info(trace);
    std::cout << "steps,nodes,node_scale_bits,network_scale_bits,interaction_excess_bits\n"
              << trace.steps() << ',' << trace.nodes() << ',' << harness::json(node).dump() << ','
              << harness::json(network).dump() << ',' << harness::json(node - network).dump() << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Computing-network runner: ANN, ACO, PSO and elementary CA on one substrate"};
    app.require_subcommand(1);

    std::string config, out;
    std::optional<std::uint64_t> seed;

    auto* run = app.add_subcommand("run", "Execute a config and write its record file");
    run->add_option("config", config, "JSON run config")->required();
    run->add_option("--seed", seed, "Override the config seed");
    run->add_option("--out", out, "Override the output path");

    std::vector<std::string> patterns;
    auto* summarize = app.add_subcommand("summarize", "Summarize record files as CSV");
    summarize->add_option("glob", patterns, "Record files or patterns such as runs/*.jsonl")->required();
    summarize->add_option("--out", out, "Write the CSV here instead of stdout");

    auto* render = app.add_subcommand("eca-render", "Write the space-time grid of an eca config");
    render->add_option("config", config, "JSON eca config")->required();
    render->add_option("--seed", seed, "Override the config seed");
    render->add_option("--out", out, "Output path (.txt or .pbm per eca.render_format)");

    std::string analyze_file;
    bool grid = false;
    std::size_t bins = analysis::default_bins;
    auto* analyze = app.add_subcommand("analyze", "Node- and network-scale information of a trace");
    analyze->add_option("file", analyze_file, "Record file, or grid text file with --grid")->required();
    analyze->add_flag("--grid", grid, "Input is an eca text grid");
    analyze->add_option("--bins", bins, "Bins for continuous states")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    try {
        if (*run) return cmd_run(config, seed, out);
        if (*summarize) return cmd_summarize(patterns, out);
        if (*render) return cmd_eca_render(config, seed, out);
        if (*analyze) return cmd_analyze(analyze_file, grid, bins);
    } catch (const Error& e) {
        std::cerr << "error (" << to_string(e.category()) << "): " << e.what() << '\n';
        return exit_code(e.category());
    } catch (const std::exception& e) {
        std::cerr << "error (io): " << e.what() << '\n';
        return 3;
    }
    return 0;
}
