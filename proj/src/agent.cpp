#include "pmevi/agent.hpp"

#include <algorithm>
#include <cmath>

namespace pmevi {

double EpsilonRule::at(std::size_t t) const {
    if (fixed) return *fixed;
    const double tt = static_cast<double>(std::max<std::size_t>(t, 2));
    return std::sqrt(std::log(tt) / tt);
}

Agent::Agent(const PairLayout& layout, AgentConfig config, std::size_t initial_state)
    : config_(std::move(config)), counts_(layout), snapshot_(layout),
      tracker_(layout.n_states(), initial_state) {
    config_.regions.validate();
    if (config_.prior && config_.prior->n_states() != layout.n_states())
        throw InvalidInput("prior has the wrong number of states");
}

const OptimisticSolution& Agent::begin_episode() {
    const std::size_t S = counts_.n_states();
    const std::size_t T = config_.regions.horizon;
    const double delta = config_.regions.delta;
    snapshot_ = counts_;
    regions_ = build_regions(snapshot_, config_.regions);

    EpisodeRecord record;
    record.index = episodes_.size();
    record.start_time = counts_.time();
    record.epsilon = config_.epsilon.at(counts_.time());

    const bool needs_bias = config_.use_projection || config_.use_mitigation;
    if (needs_bias) {
        const BiasConstraintSet prior = config_.prior ? *config_.prior : BiasConstraintSet(S);
        const BiasConstraintSet windows = bias_estimation(tracker_, gain_floor_, delta, T);
        constraints_ = merge_constraints(prior, windows.c0(), windows);
        if (!feasible(constraints_)) {
            constraints_ = merge_constraints(prior, windows.c0(), BiasConstraintSet(S));
            record.dropped_windows = true;
        }
    } else {
        constraints_ = BiasConstraintSet(S);
    }

    const BiasProjection projection = config_.use_projection
                                          ? BiasProjection(constraints_)
                                          : BiasProjection(BiasConstraintSet(S));
    mitigation_ = config_.use_mitigation
                      ? variance_approx(constraints_, snapshot_, delta, T, config_.variance_term)
                      : MitigationVector::infinite(counts_.layout().n_pairs());

    PmeviOptions options;
    options.epsilon = record.epsilon;
    options.max_iterations = config_.max_iterations;
    solution_ = pmevi(regions_, mitigation_, projection, options);

    record.gain = solution_.gain;
    record.iterations = solution_.iterations;
    record.converged = solution_.converged;
    episodes_.push_back(record);
    gain_floor_ = std::min(gain_floor_, solution_.gain);
    return solution_;
}

bool Agent::observe(std::size_t s, std::size_t a, double reward, std::size_t next_state) {
    counts_.record(s, a, reward, next_state);
    tracker_.update(reward, next_state);
    const std::size_t x = counts_.layout().pair(s, a);
    return counts_.visits(x) >= std::max<std::size_t>(1, 2 * snapshot_.visits(x));
}

double episode_bound(std::size_t n_pairs, std::size_t horizon) {
    const double sa = static_cast<double>(n_pairs);
    return sa * std::log2(8.0 * static_cast<double>(horizon) / sa);
}

} // namespace pmevi
