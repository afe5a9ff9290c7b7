// Command-line entry point: run experiments, summarize run directories and
// solve benchmark environments.

#include "pmevi/environments.hpp"
#include "pmevi/harness.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace {

int run_command(const std::string& config_path, const std::string& out_dir, std::size_t seeds,
                std::size_t jobs) {
    std::ifstream in(config_path);
    if (!in) throw pmevi::Error("cannot open config " + config_path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    pmevi::ExperimentConfig config = pmevi::parse_config_text(buffer.str());
    if (!out_dir.empty()) config.output = out_dir;
    if (seeds > 0) {
        const std::uint64_t base = config.seeds.front();
        config.seeds.clear();
        for (std::size_t i = 0; i < seeds; ++i) config.seeds.push_back(base + i);
    }
    const auto result = pmevi::run_experiment(config, jobs, buffer.str());
    std::size_t flagged = 0;
    for (const auto& run : result.runs) {
        const auto& a = run.audits;
        if (!a.model_in_regions || !a.bias_in_region || !a.optimistic) ++flagged;
    }
    std::printf("wrote %zu runs to %s\n", result.runs.size(), result.directory.c_str());
    if (flagged)
        std::printf("%zu runs with a failed statistical audit (see manifest.json)\n", flagged);
    return 0;
}

int summarize_command(const std::string& dir) {
    const pmevi::Summary summary = pmevi::summarize(dir);
    std::ofstream csv(std::filesystem::path(dir) / "summary.csv");
    pmevi::write_summary_csv(csv, summary);
    pmevi::print_summary(std::cout, summary);
    return 0;
}

int solve_command(const std::string& name) {
    const pmevi::TabularMDP mdp = pmevi::make_environment(name);
    const pmevi::GainBias gb = pmevi::solve_gain_bias(mdp);
    std::printf("environment %s\n", name.c_str());
    std::printf("states %zu, pairs %zu\n", mdp.n_states(), mdp.n_pairs());
    std::printf("g* = %.12f\n", gb.gain);
    std::printf("h* (h*(0) = 0):");
    for (double h : gb.bias) std::printf(" %.9f", h);
    std::printf("\nsp(h*) = %.9f\n", pmevi::span(gb.bias));
    std::printf("residual %.3g after %zu iterations\n", gb.residual, gb.iterations);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Optimistic average-reward learning experiments"};
    app.require_subcommand(1);

    std::string config_path, out_dir;
    std::size_t seeds = 0, jobs = 1;
    auto* run = app.add_subcommand("run", "Run an experiment config");
    run->add_option("config", config_path, "Experiment config file")->required();
    run->add_option("--out", out_dir, "Output directory (overrides the config)");
    run->add_option("--seeds", seeds, "Number of seeds (overrides the config)");
    run->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);

    std::string trace_dir;
    auto* summarize = app.add_subcommand("summarize", "Aggregate a run directory");
    summarize->add_option("dir", trace_dir, "Directory written by run")->required();

    std::string env_name;
    auto* solve = app.add_subcommand("solve", "Print g* and h* of an environment");
    solve->add_option("env", env_name, "riverswim:<n> or random:<S>:<A>:<seed>")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return run_command(config_path, out_dir, seeds, jobs);
        if (*summarize) return summarize_command(trace_dir);
        if (*solve) return solve_command(env_name);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
