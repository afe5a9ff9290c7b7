#pragma once

#include "pmevi/bias_region.hpp"
#include "pmevi/extended_vi.hpp"
#include "pmevi/regions.hpp"

#include <optional>

namespace pmevi {

/// Precision passed to the inner value iteration at the start of an episode.
struct EpsilonRule {
    /// When unset, epsilon = sqrt(log(t') / t') with t' = max(t, 2).
    std::optional<double> fixed;

    double at(std::size_t t) const;
};

struct AgentConfig {
    RegionSpec regions;
    bool use_projection = true;
    bool use_mitigation = true;
    std::optional<BiasConstraintSet> prior;
    EpsilonRule epsilon;
    VarianceErrorTerm variance_term = VarianceErrorTerm::Error;
    std::size_t max_iterations = 1'000'000;
};

struct EpisodeRecord {
    std::size_t index = 0;
    std::size_t start_time = 0;
    double gain = 0.0;
    double epsilon = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
    /// The merged bias region was empty and the estimator windows were dropped.
    bool dropped_windows = false;
};

/// Optimistic learner with doubling-trick episodes. With projection and
/// mitigation both off it is plain extended value iteration over the chosen
/// confidence regions (UCRL2 and relatives).
class Agent {
public:
    Agent(const PairLayout& layout, AgentConfig config, std::size_t initial_state);

    /// Recompute regions, bias constraints, mitigation and the policy from the
    /// current statistics.
    const OptimisticSolution& begin_episode();

    std::size_t act(std::size_t s) const { return solution_.policy(s); }

    /// Record a transition. Returns true when the doubling rule ends the episode.
    bool observe(std::size_t s, std::size_t a, double reward, std::size_t next_state);

    const AgentConfig& config() const { return config_; }
    const CountsTable& counts() const { return counts_; }
    const CountsTable& snapshot() const { return snapshot_; }
    const CommuteTracker& tracker() const { return tracker_; }
    const RegionTable& regions() const { return regions_; }
    const BiasConstraintSet& constraints() const { return constraints_; }
    const MitigationVector& mitigation() const { return mitigation_; }
    const OptimisticSolution& solution() const { return solution_; }
    const std::vector<EpisodeRecord>& episodes() const { return episodes_; }
    /// Minimum of the optimistic gains of all finished episode starts; 1 before any.
    double optimistic_gain() const { return gain_floor_; }
    std::size_t time() const { return counts_.time(); }

private:
    AgentConfig config_;
    CountsTable counts_;
    CountsTable snapshot_;
    CommuteTracker tracker_;
    RegionTable regions_;
    BiasConstraintSet constraints_;
    MitigationVector mitigation_;
    OptimisticSolution solution_;
    std::vector<EpisodeRecord> episodes_;
    double gain_floor_ = 1.0;
};

/// SA log2(8T / SA), the largest episode count the doubling rule allows.
double episode_bound(std::size_t n_pairs, std::size_t horizon);

} // namespace pmevi
