#pragma once

#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

namespace pmevi {

using Vector = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Flattened indexing of the state-action pairs of a finite MDP.
///
/// Pairs are numbered state-major: all actions of state 0, then all actions
/// of state 1, and so on. Every per-pair table in the library (counts,
/// regions, gaps, mitigation) is indexed this way.
class PairLayout {
public:
    PairLayout() = default;
    explicit PairLayout(std::vector<std::size_t> actions_per_state)
        : actions_(std::move(actions_per_state)), offsets_(actions_.size() + 1, 0) {
        for (std::size_t s = 0; s < actions_.size(); ++s)
            offsets_[s + 1] = offsets_[s] + actions_[s];
    }

    std::size_t n_states() const { return actions_.size(); }
    std::size_t n_actions(std::size_t s) const { return actions_[s]; }
    std::size_t n_pairs() const { return offsets_.back(); }
    std::size_t pair(std::size_t s, std::size_t a) const { return offsets_[s] + a; }
    std::size_t first_pair(std::size_t s) const { return offsets_[s]; }
    const std::vector<std::size_t>& actions_per_state() const { return actions_; }

    bool operator==(const PairLayout& other) const { return actions_ == other.actions_; }

private:
    std::vector<std::size_t> actions_;
    std::vector<std::size_t> offsets_{0};
};

/// Deterministic stationary policy: one action index per state.
struct Policy {
    std::vector<std::size_t> action;

    std::size_t operator()(std::size_t s) const { return action[s]; }
    bool operator==(const Policy&) const = default;
};

inline double dot(const double* p, const Vector& u) {
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) acc += p[i] * u[i];
    return acc;
}

inline double dot(const Vector& p, const Vector& u) { return dot(p.data(), u); }

} // namespace pmevi
