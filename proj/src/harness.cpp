#include "pmevi/harness.hpp"

#include "pmevi/environments.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

namespace pmevi {

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "yes" || v == "1") return true;
    if (v == "off" || v == "false" || v == "no" || v == "0") return false;
    throw InvalidInput("config: '" + key + "' expects on/off, got '" + v + "'");
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidInput("config: '" + key + "' expects a number, got '" + v + "'");
    }
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
        const auto x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw InvalidInput("config: '" + key + "' expects a non-negative integer, got '" + v + "'");
    }
}

struct RawAlgorithm {
    std::string name;
    std::map<std::string, std::string> values;
    std::vector<std::string> constraints;
};

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string file_stem(const std::string& algorithm, std::uint64_t seed) {
    std::string clean;
    for (char c : algorithm)
        clean += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_') ? c : '_';
    return clean + "_seed" + std::to_string(seed);
}

double mean_of(const std::vector<double>& xs) {
    double acc = 0.0;
    for (double x : xs) acc += x;
    return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

double stddev_of(const std::vector<double>& xs) {
    if (xs.size() < 2) return 0.0;
    const double m = mean_of(xs);
    double acc = 0.0;
    for (double x : xs) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(xs.size() - 1));
}

} // namespace

// ---------------------------------------------------------------------------
// Configuration

void ExperimentConfig::validate() const {
    if (environment.empty()) throw InvalidInput("config: missing environment");
    if (horizon < 1) throw InvalidInput("config: horizon must be >= 1");
    if (seeds.empty()) throw InvalidInput("config: at least one seed is required");
    if (stride < 1) throw InvalidInput("config: stride must be >= 1");
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidInput("config: delta must lie in (0,1)");
    if (algorithms.empty()) throw InvalidInput("config: no [algorithm] section");
    std::set<std::string> names, stems;
    for (const auto& a : algorithms) {
        if (!names.insert(a.name).second)
            throw InvalidInput("config: duplicate algorithm '" + a.name + "'");
        if (!stems.insert(file_stem(a.name, 0)).second)
            throw InvalidInput("config: algorithm '" + a.name + "' clashes with another trace file name");
    }
    std::set<std::uint64_t> unique(seeds.begin(), seeds.end());
    if (unique.size() != seeds.size()) throw InvalidInput("config: repeated seed");
}

std::optional<BiasConstraintSet> parse_prior(const std::string& text, std::size_t n_states) {
    if (text.empty() || text == "none") return std::nullopt;
    if (text.rfind("chain:", 0) == 0) {
        const double c = parse_double("prior", text.substr(6));
        return BiasConstraintSet::chain_prior(n_states, c);
    }
    throw InvalidInput("config: unknown prior '" + text + "'");
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig config;
    std::vector<RawAlgorithm> raw;
    std::optional<std::uint64_t> n_seeds;
    std::uint64_t base_seed = 1;
    std::vector<std::uint64_t> seed_list;

    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']') throw InvalidInput("config line " + std::to_string(lineno) +
                                                       ": unterminated section");
            const std::string inner = trim(line.substr(1, line.size() - 2));
            if (inner.rfind("algorithm", 0) != 0)
                throw InvalidInput("config: unknown section [" + inner + "]");
            RawAlgorithm a;
            a.name = trim(inner.substr(9));
            if (a.name.empty()) throw InvalidInput("config: algorithm section without a name");
            raw.push_back(std::move(a));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));

        if (!raw.empty()) {
            static const std::set<std::string> keys = {
                "kernel_region", "reward_region", "projection", "mitigation",   "epsilon",
                "prior",         "variance_term", "max_iterations", "prior_constraint"};
            if (!keys.count(key)) throw InvalidInput("config: unknown algorithm key '" + key + "'");
            if (key == "prior_constraint") raw.back().constraints.push_back(value);
            else raw.back().values[key] = value;
            continue;
        }
        if (key == "environment") config.environment = value;
        else if (key == "horizon") config.horizon = parse_uint(key, value);
        else if (key == "seeds") n_seeds = parse_uint(key, value);
        else if (key == "base_seed") base_seed = parse_uint(key, value);
        else if (key == "seed_list") {
            std::stringstream ss(value);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!trim(item).empty()) seed_list.push_back(parse_uint(key, trim(item)));
        } else if (key == "delta") config.delta = parse_double(key, value);
        else if (key == "output") config.output = value;
        else if (key == "stride") config.stride = parse_uint(key, value);
        else if (key == "audit_episode_bound") config.audits.episode_bound = parse_bool(key, value);
        else if (key == "audit_optimism") config.audits.optimism = parse_bool(key, value);
        else if (key == "audit_coverage") config.audits.coverage = parse_bool(key, value);
        else throw InvalidInput("config: unknown key '" + key + "'");
    }

    if (!seed_list.empty()) config.seeds = seed_list;
    else
        for (std::uint64_t i = 0; i < n_seeds.value_or(1); ++i) config.seeds.push_back(base_seed + i);

    std::size_t n_states = 0;
    if (!config.environment.empty()) n_states = make_environment(config.environment).n_states();

    for (const auto& a : raw) {
        AlgorithmSpec spec;
        spec.name = a.name;
        AgentConfig& agent = spec.agent;
        auto get = [&](const std::string& k, const std::string& fallback) {
            auto it = a.values.find(k);
            return it == a.values.end() ? fallback : it->second;
        };
        agent.regions.kernel_family = parse_region_family(get("kernel_region", "C1"));
        agent.regions.reward_family =
            parse_region_family(get("reward_region", std::string(to_string(agent.regions.kernel_family))));
        agent.regions.delta = config.delta;
        agent.regions.horizon = std::max<std::size_t>(config.horizon, 1);
        agent.use_projection = parse_bool("projection", get("projection", "on"));
        agent.use_mitigation = parse_bool("mitigation", get("mitigation", "on"));
        const std::string eps = get("epsilon", "schedule");
        if (eps != "schedule") {
            agent.epsilon.fixed = parse_double("epsilon", eps);
            if (!(*agent.epsilon.fixed > 0.0)) throw InvalidInput("config: epsilon must be positive");
        }
        const std::string vt = get("variance_term", "error");
        if (vt == "error") agent.variance_term = VarianceErrorTerm::Error;
        else if (vt == "estimate") agent.variance_term = VarianceErrorTerm::Estimate;
        else throw InvalidInput("config: variance_term must be error or estimate");
        agent.max_iterations = parse_uint("max_iterations", get("max_iterations", "1000000"));

        spec.prior_text = get("prior", "none");
        if (n_states > 0) {
            agent.prior = parse_prior(spec.prior_text, n_states);
            for (const auto& c : a.constraints) {
                std::istringstream cs(c);
                std::size_t s = 0, s2 = 0;
                double v = 0.0;
                if (!(cs >> s >> s2 >> v) || s >= n_states || s2 >= n_states || s == s2)
                    throw InvalidInput("config: prior_constraint expects 's s2 value'");
                if (!agent.prior) agent.prior = BiasConstraintSet(n_states);
                agent.prior->tighten(s, s2, v, kFromPrior);
                spec.prior_text += "; h(" + std::to_string(s) + ")-h(" + std::to_string(s2) +
                                   ")<=" + format_double(v);
            }
        }
        config.algorithms.push_back(std::move(spec));
    }
    config.validate();
    return config;
}

ExperimentConfig parse_config_text(const std::string& text) {
    std::istringstream in(text);
    return parse_config(in);
}

ExperimentConfig load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config " + path.string());
    return parse_config(in);
}

// ---------------------------------------------------------------------------
// Simulation

Environment load_environment(const std::string& name) {
    TabularMDP mdp = make_environment(name);
    GainBias optimum = solve_gain_bias(mdp);
    return {name, std::move(mdp), std::move(optimum)};
}

RunResult simulate_run(const Environment& env, const AlgorithmSpec& algorithm,
                       std::uint64_t seed, const RunOptions& options) {
    const auto start = std::chrono::steady_clock::now();
    const TabularMDP& mdp = env.mdp;
    const std::size_t S = mdp.n_states();
    const double g_star = env.optimum.gain;
    const Vector& h_star = env.optimum.bias;

    AgentConfig config = algorithm.agent;
    config.regions.horizon = options.horizon;
    config.regions.delta = options.delta;
    Agent agent(mdp.layout(), config, 0);
    Rng rng(seed);

    RunResult result;
    result.algorithm = algorithm.name;
    result.seed = seed;
    result.episode_limit = episode_bound(mdp.n_pairs(), options.horizon);
    AuditResult& audit = result.audits;

    auto audit_episode = [&]() {
        const EpisodeRecord& ep = agent.episodes().back();
        if (!ep.converged) ++audit.non_converged_episodes;
        if (ep.dropped_windows) ++audit.episodes_with_dropped_windows;
        if (options.audits.optimism && ep.gain < g_star - ep.epsilon) audit.optimistic = false;
        if (options.audits.coverage) {
            const RegionTable& regions = agent.regions();
            for (std::size_t s = 0; s < S && audit.model_in_regions; ++s)
                for (std::size_t a = 0; a < mdp.n_actions(s); ++a)
                    if (!regions.contains_kernel(s, a, mdp.kernel(s, a)) ||
                        !regions.contains_reward(s, a, mdp.mean_reward(s, a))) {
                        audit.model_in_regions = false;
                        break;
                    }
            if (!agent.constraints().contains(h_star)) audit.bias_in_region = false;
            if (config.use_mitigation) {
                const CountsTable& snap = agent.snapshot();
                for (std::size_t x = 0; x < mdp.n_pairs(); ++x) {
                    if (snap.visits(x) == 0) continue;
                    const Vector p_hat = snap.empirical_kernel(x);
                    const auto p = mdp.kernel_row(x);
                    double dev = 0.0;
                    for (std::size_t j = 0; j < S; ++j) dev += (p_hat[j] - p[j]) * h_star[j];
                    ++audit.mitigation_checks;
                    if (dev > agent.mitigation()[x]) ++audit.mitigation_violations;
                }
            }
        }
    };

    agent.begin_episode();
    audit_episode();
    std::size_t state = 0;
    double cumulative = 0.0;
    result.rows.reserve(options.horizon / options.stride + 1);
    for (std::size_t t = 1; t <= options.horizon; ++t) {
        const std::size_t action = agent.act(state);
        const Transition step = sample_step(mdp, state, action, rng);
        cumulative += step.reward;
        const bool ended = agent.observe(state, action, step.reward, step.next_state);
        state = step.next_state;
        if (t % options.stride == 0 || t == options.horizon)
            result.rows.push_back({t, cumulative, static_cast<double>(t) * g_star - cumulative,
                                   agent.episodes().size(), agent.solution().gain});
        if (ended && t < options.horizon) {
            agent.begin_episode();
            audit_episode();
        }
    }

    result.episodes = agent.episodes().size();
    result.final_regret = static_cast<double>(options.horizon) * g_star - cumulative;
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (options.audits.episode_bound && options.horizon >= mdp.n_pairs() &&
        static_cast<double>(result.episodes) > result.episode_limit)
        throw Error("episode bound violated: " + algorithm.name + " seed " + std::to_string(seed) +
                    " used " + std::to_string(result.episodes) + " episodes, limit " +
                    format_double(result.episode_limit));
    return result;
}

void write_trace(std::ostream& out, const std::vector<TraceRow>& rows) {
    out << kTraceHeader << "\n";
    char buf[160];
    for (const TraceRow& r : rows) {
        std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%zu,%.17g\n", r.t, r.cum_reward, r.regret,
                      r.episode, r.opt_gain);
        out << buf;
    }
}

std::vector<TraceRow> read_trace(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || trim(line) != kTraceHeader)
        throw InvalidInput("trace: unexpected header '" + line + "'");
    std::vector<TraceRow> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        TraceRow r;
        char tail = 0;
        if (std::sscanf(line.c_str(), "%zu,%lf,%lf,%zu,%lf%c", &r.t, &r.cum_reward, &r.regret,
                        &r.episode, &r.opt_gain, &tail) < 5)
            throw InvalidInput("trace: malformed row '" + line + "'");
        rows.push_back(r);
    }
    return rows;
}

// ---------------------------------------------------------------------------
// Experiments

ExperimentResult run_experiment(const ExperimentConfig& config, std::size_t jobs,
                                const std::string& config_text) {
    config.validate();
    const Environment env = load_environment(config.environment);
    const fs::path dir = config.output;
    fs::create_directories(dir);

    struct Task {
        std::size_t algorithm;
        std::uint64_t seed;
    };
    std::vector<Task> tasks;
    for (std::size_t a = 0; a < config.algorithms.size(); ++a)
        for (std::uint64_t seed : config.seeds) tasks.push_back({a, seed});

    RunOptions options;
    options.horizon = config.horizon;
    options.delta = config.delta;
    options.stride = config.stride;
    options.audits = config.audits;

    ExperimentResult result;
    result.directory = dir;
    result.runs.resize(tasks.size());
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&]() {
        for (std::size_t i = next++; i < tasks.size(); i = next++) {
            try {
                const AlgorithmSpec& algo = config.algorithms[tasks[i].algorithm];
                RunResult run = simulate_run(env, algo, tasks[i].seed, options);
                std::ofstream out(dir / (file_stem(algo.name, tasks[i].seed) + ".csv"));
                write_trace(out, run.rows);
                if (!out) throw Error("failed to write trace for " + algo.name);
                result.runs[i] = std::move(run);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next = tasks.size();
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(jobs, tasks.size()));
    std::vector<std::thread> pool;
    for (std::size_t k = 1; k < n_threads; ++k) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);

    json manifest;
    manifest["format"] = "pmevi-runs 1";
    manifest["schema"] = kTraceHeader;
    manifest["environment"] = config.environment;
    manifest["horizon"] = config.horizon;
    manifest["delta"] = config.delta;
    manifest["stride"] = config.stride;
    manifest["seeds"] = config.seeds;
    manifest["optimal_gain"] = env.optimum.gain;
    manifest["optimal_bias"] = env.optimum.bias;
    manifest["audits"] = {{"episode_bound", config.audits.episode_bound},
                          {"optimism", config.audits.optimism},
                          {"coverage", config.audits.coverage}};
    if (!config_text.empty()) manifest["config_text"] = config_text;
    json algos = json::array();
    for (const auto& a : config.algorithms) {
        algos.push_back({{"name", a.name},
                         {"kernel_region", to_string(a.agent.regions.kernel_family)},
                         {"reward_region", to_string(a.agent.regions.reward_family)},
                         {"projection", a.agent.use_projection},
                         {"mitigation", a.agent.use_mitigation},
                         {"epsilon", a.agent.epsilon.fixed ? json(*a.agent.epsilon.fixed)
                                                           : json("schedule")},
                         {"variance_term", a.agent.variance_term == VarianceErrorTerm::Error
                                               ? "error" : "estimate"},
                         {"prior", a.prior_text}});
    }
    manifest["algorithms"] = algos;
    json runs = json::array();
    for (const auto& r : result.runs) {
        runs.push_back({{"algorithm", r.algorithm},
                        {"seed", r.seed},
                        {"file", file_stem(r.algorithm, r.seed) + ".csv"},
                        {"final_regret", r.final_regret},
                        {"episodes", r.episodes},
                        {"episode_limit", r.episode_limit},
                        {"wall_seconds", r.wall_seconds},
                        {"audits",
                         {{"model_in_regions", r.audits.model_in_regions},
                          {"bias_in_region", r.audits.bias_in_region},
                          {"optimistic", r.audits.optimistic},
                          {"mitigation_checks", r.audits.mitigation_checks},
                          {"mitigation_violations", r.audits.mitigation_violations},
                          {"dropped_windows", r.audits.episodes_with_dropped_windows},
                          {"non_converged_episodes", r.audits.non_converged_episodes}}}});
    }
    manifest["runs"] = runs;
    std::ofstream out(dir / "manifest.json");
    out << manifest.dump(2) << "\n";
    if (!out) throw Error("failed to write manifest.json");
    return result;
}

// ---------------------------------------------------------------------------
// Summaries

Summary summarize(const fs::path& directory) {
    std::ifstream min(directory / "manifest.json");
    if (!min) throw Error("no manifest.json in " + directory.string());
    json manifest;
    try {
        manifest = json::parse(min);
    } catch (const json::exception& e) {
        throw InvalidInput(std::string("manifest.json: ") + e.what());
    }
    if (manifest.value("format", "") != "pmevi-runs 1" || manifest.value("schema", "") != kTraceHeader)
        throw InvalidInput("manifest.json: unsupported format");

    Summary summary;
    summary.environment = manifest.at("environment").get<std::string>();
    summary.horizon = manifest.at("horizon").get<std::size_t>();
    const std::size_t T = summary.horizon;

    const GainBias resolved = solve_gain_bias(make_environment(summary.environment));
    if (std::abs(resolved.gain - manifest.at("optimal_gain").get<double>()) > 1e-9)
        throw InvalidInput("manifest.json: optimal gain does not match the environment");

    std::set<std::string> listed;
    for (const auto& run : manifest.at("runs")) listed.insert(run.at("file").get<std::string>());
    for (const auto& entry : fs::directory_iterator(directory)) {
        if (entry.path().extension() != ".csv" || entry.path().filename() == "summary.csv")
            continue;
        if (!listed.count(entry.path().filename().string()))
            throw InvalidInput("trace " + entry.path().filename().string() +
                               " is not part of this experiment");
    }

    const std::vector<std::size_t> marks = {std::max<std::size_t>(1, T / 10),
                                            std::max<std::size_t>(1, T / 2), T};
    struct Acc {
        std::vector<std::vector<double>> regrets;
        std::vector<std::size_t> used_t;
        std::vector<double> episodes;
        std::size_t optimistic = 0, covered = 0, in_region = 0;
    };
    std::map<std::string, Acc> acc;
    std::vector<std::string> order;
    for (const auto& a : manifest.at("algorithms")) {
        order.push_back(a.at("name").get<std::string>());
        acc[order.back()].regrets.assign(marks.size(), {});
        acc[order.back()].used_t.assign(marks.size(), 0);
    }

    for (const auto& run : manifest.at("runs")) {
        const std::string name = run.at("algorithm").get<std::string>();
        auto it = acc.find(name);
        if (it == acc.end()) throw InvalidInput("manifest.json: run of unknown algorithm " + name);
        const std::string file = run.at("file").get<std::string>();
        std::ifstream tin(directory / file);
        if (!tin) throw Error("missing trace " + file);
        std::vector<TraceRow> rows;
        try {
            rows = read_trace(tin);
        } catch (const InvalidInput& e) {
            throw InvalidInput(file + ": " + e.what());
        }
        if (rows.empty() || rows.back().t != T)
            throw InvalidInput(file + ": trace does not end at the manifest horizon");
        Acc& a = it->second;
        for (std::size_t m = 0; m < marks.size(); ++m) {
            const TraceRow* hit = nullptr;
            for (const TraceRow& r : rows)
                if (r.t <= marks[m]) hit = &r;
            if (!hit) hit = &rows.front();
            a.regrets[m].push_back(hit->regret);
            a.used_t[m] = hit->t;
        }
        a.episodes.push_back(static_cast<double>(rows.back().episode));
        const auto& au = run.at("audits");
        a.optimistic += au.at("optimistic").get<bool>();
        a.covered += au.at("model_in_regions").get<bool>();
        a.in_region += au.at("bias_in_region").get<bool>();
    }

    for (const std::string& name : order) {
        const Acc& a = acc[name];
        AlgorithmSummary s;
        s.algorithm = name;
        s.runs = a.episodes.size();
        for (std::size_t m = 0; m < marks.size(); ++m)
            s.checkpoints.push_back({a.used_t[m], mean_of(a.regrets[m]), stddev_of(a.regrets[m])});
        s.mean_episodes = mean_of(a.episodes);
        s.stddev_episodes = stddev_of(a.episodes);
        const double n = std::max<double>(1.0, static_cast<double>(s.runs));
        s.optimism_frequency = static_cast<double>(a.optimistic) / n;
        s.coverage_frequency = static_cast<double>(a.covered) / n;
        s.bias_region_frequency = static_cast<double>(a.in_region) / n;
        summary.algorithms.push_back(std::move(s));
    }
    std::vector<std::size_t> idx(summary.algorithms.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) {
        return summary.algorithms[i].checkpoints.back().mean <
               summary.algorithms[j].checkpoints.back().mean;
    });
    for (std::size_t r = 0; r < idx.size(); ++r) summary.algorithms[idx[r]].rank = r + 1;
    return summary;
}

void write_summary_csv(std::ostream& out, const Summary& summary) {
    out << "algorithm,runs,checkpoint,t,mean_regret,std_regret,mean_episodes,std_episodes,"
           "optimism_frequency,coverage_frequency,bias_region_frequency,rank\n";
    const char* labels[] = {"T/10", "T/2", "T"};
    for (const auto& a : summary.algorithms)
        for (std::size_t m = 0; m < a.checkpoints.size(); ++m) {
            const Checkpoint& c = a.checkpoints[m];
            out << a.algorithm << ',' << a.runs << ',' << labels[m] << ',' << c.t << ','
                << format_double(c.mean) << ',' << format_double(c.stddev) << ','
                << format_double(a.mean_episodes) << ',' << format_double(a.stddev_episodes)
                << ',' << format_double(a.optimism_frequency) << ','
                << format_double(a.coverage_frequency) << ','
                << format_double(a.bias_region_frequency) << ',' << a.rank << '\n';
        }
}

void print_summary(std::ostream& out, const Summary& summary) {
    out << "environment " << summary.environment << ", horizon " << summary.horizon << "\n\n";
    char buf[256];
    std::snprintf(buf, sizeof buf, "%-4s %-24s %5s %22s %22s %22s %10s %8s %8s\n", "rank",
                  "algorithm", "runs", "regret@T/10", "regret@T/2", "regret@T", "episodes",
                  "optim.", "cover.");
    out << buf;
    std::vector<const AlgorithmSummary*> sorted;
    for (const auto& a : summary.algorithms) sorted.push_back(&a);
    std::sort(sorted.begin(), sorted.end(),
              [](const auto* x, const auto* y) { return x->rank < y->rank; });
    for (const auto* a : sorted) {
        std::string cells[3];
        for (std::size_t m = 0; m < 3 && m < a->checkpoints.size(); ++m) {
            char c[64];
            std::snprintf(c, sizeof c, "%.1f +- %.1f", a->checkpoints[m].mean,
                          a->checkpoints[m].stddev);
            cells[m] = c;
        }
        std::snprintf(buf, sizeof buf, "%-4zu %-24s %5zu %22s %22s %22s %10.1f %8.2f %8.2f\n",
                      a->rank, a->algorithm.c_str(), a->runs, cells[0].c_str(), cells[1].c_str(),
                      cells[2].c_str(), a->mean_episodes, a->optimism_frequency,
                      a->coverage_frequency);
        out << buf;
    }
}

} // namespace pmevi
