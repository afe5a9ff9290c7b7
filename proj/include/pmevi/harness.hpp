#pragma once

#include "pmevi/agent.hpp"
#include "pmevi/mdp.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace pmevi {

inline constexpr const char* kTraceHeader = "t,cum_reward,regret,episode,opt_gain";

struct AlgorithmSpec {
    std::string name;
    AgentConfig agent;
    /// Prior as written in the config ("none", "chain:0.5", ...), echoed in the manifest.
    std::string prior_text = "none";
};

struct AuditFlags {
    bool episode_bound = true;
    bool optimism = true;
    bool coverage = true;
};

struct ExperimentConfig {
    std::string environment;
    std::vector<AlgorithmSpec> algorithms;
    std::size_t horizon = 0;
    std::vector<std::uint64_t> seeds;
    double delta = 0.05;
    std::string output = "runs";
    std::size_t stride = 100;
    AuditFlags audits;

    void validate() const;
};

/// Parse the key = value config format. Top-level keys precede the first
/// "[algorithm NAME]" section; '#' starts a comment.
ExperimentConfig parse_config(std::istream& in);
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Build "chain:c" style priors for an n-state environment.
std::optional<BiasConstraintSet> parse_prior(const std::string& text, std::size_t n_states);

struct TraceRow {
    std::size_t t = 0;
    double cum_reward = 0.0;
    double regret = 0.0;
    std::size_t episode = 0;
    double opt_gain = 0.0;
};

struct AuditResult {
    bool model_in_regions = true;
    bool bias_in_region = true;
    bool optimistic = true;
    std::size_t mitigation_checks = 0;
    std::size_t mitigation_violations = 0;
    std::size_t episodes_with_dropped_windows = 0;
    std::size_t non_converged_episodes = 0;
};

struct RunResult {
    std::string algorithm;
    std::uint64_t seed = 0;
    std::vector<TraceRow> rows;
    double final_regret = 0.0;
    std::size_t episodes = 0;
    double episode_limit = 0.0;
    double wall_seconds = 0.0;
    AuditResult audits;
};

/// Ground truth handed to every run of an experiment.
struct Environment {
    std::string name;
    TabularMDP mdp;
    GainBias optimum;
};

Environment load_environment(const std::string& name);

struct RunOptions {
    std::size_t horizon = 1;
    double delta = 0.05;
    std::size_t stride = 100;
    AuditFlags audits;
};

/// Simulate one agent for `horizon` steps from state 0. Throws Error when the
/// episode count exceeds SA log2(8T/SA) and the episode audit is on.
RunResult simulate_run(const Environment& env, const AlgorithmSpec& algorithm,
                       std::uint64_t seed, const RunOptions& options);

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows);
std::vector<TraceRow> read_trace(std::istream& in);

struct ExperimentResult {
    std::filesystem::path directory;
    std::vector<RunResult> runs;
};

/// All (algorithm, seed) runs on `jobs` worker threads. Writes one CSV per
/// run and manifest.json into config.output.
ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs = 1,
                                const std::string& config_text = "");

struct Checkpoint {
    std::size_t t = 0;
    double mean = 0.0;
    double stddev = 0.0;
};

struct AlgorithmSummary {
    std::string algorithm;
    std::size_t runs = 0;
    std::vector<Checkpoint> checkpoints;
    double mean_episodes = 0.0;
    double stddev_episodes = 0.0;
    double optimism_frequency = 0.0;
    double coverage_frequency = 0.0;
    double bias_region_frequency = 0.0;
    /// 1-based rank by mean final regret (1 = smallest).
    std::size_t rank = 0;
};

struct Summary {
    std::string environment;
    std::size_t horizon = 0;
    std::vector<AlgorithmSummary> algorithms;
};

/// Aggregate the traces of a run directory at t = T/10, T/2 and T. Rejects
/// directories whose CSVs do not all belong to the manifest.
Summary summarize(const std::filesystem::path& directory);
void write_summary_csv(std::ostream& out, const Summary& summary);
void print_summary(std::ostream& out, const Summary& summary);

} // namespace pmevi
