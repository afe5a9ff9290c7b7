#pragma once

#include "pmevi/errors.hpp"
#include "pmevi/rng.hpp"
#include "pmevi/types.hpp"

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>

namespace pmevi {

enum class RewardLaw { Bernoulli, Deterministic };

std::string_view to_string(RewardLaw law);
RewardLaw parse_reward_law(std::string_view text);

/// Finite MDP with a transition kernel and mean rewards in [0, 1].
///
/// Kernel rows are stored flattened, one row of length n_states() per
/// state-action pair in PairLayout order. The constructor validates the
/// invariants (stochastic rows within 1e-12, rewards in [0,1], at least one
/// action per state) and throws InvalidInput otherwise.
class TabularMDP {
public:
    TabularMDP(std::vector<std::size_t> actions_per_state, std::vector<Vector> kernel_rows,
               Vector mean_reward, RewardLaw law = RewardLaw::Bernoulli);

    std::size_t n_states() const { return layout_.n_states(); }
    std::size_t n_actions(std::size_t s) const { return layout_.n_actions(s); }
    std::size_t n_pairs() const { return layout_.n_pairs(); }
    const PairLayout& layout() const { return layout_; }

    std::span<const double> kernel(std::size_t s, std::size_t a) const {
        return kernel_row(layout_.pair(s, a));
    }
    std::span<const double> kernel_row(std::size_t pair) const {
        return {kernel_.data() + pair * n_states(), n_states()};
    }
    double mean_reward(std::size_t s, std::size_t a) const {
        return reward_[layout_.pair(s, a)];
    }
    double mean_reward(std::size_t pair) const { return reward_[pair]; }
    RewardLaw reward_law() const { return law_; }

private:
    PairLayout layout_;
    Vector kernel_;
    Vector reward_;
    RewardLaw law_;
};

/// Gain and anchored bias (bias[0] == 0) of a policy or of the optimal
/// operator, with the max-norm Poisson residual at termination.
struct GainBias {
    double gain = 0.0;
    Vector bias;
    double residual = 0.0;
    std::size_t iterations = 0;
};

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iterations = 10'000'000;
};

struct BellmanResult {
    Vector values;
    Policy policy;
};

/// max(u) - min(u). Throws InvalidInput on an empty vector.
double span(std::span<const double> u);

/// Lu(s) = max_a r(s,a) + p(s,a).u, ties broken toward the smallest action.
BellmanResult bellman_apply(const TabularMDP& mdp, std::span<const double> u);

/// Optimal gain and bias by relative value iteration anchored at state 0.
/// Switches to damped iterates (v <- (v + Lv)/2) when the span gap stalls,
/// which handles periodic chains without moving the fix-point.
GainBias solve_gain_bias(const TabularMDP& mdp, const SolveOptions& options = {});

/// Gain and bias of a fixed deterministic policy; same iteration scheme.
GainBias policy_eval(const TabularMDP& mdp, const Policy& policy,
                     const SolveOptions& options = {});

/// Delta*(s,a) = h(s) + g - r(s,a) - p(s,a).h, floored at -residual. Per pair.
Vector bellman_gaps(const TabularMDP& mdp, const GainBias& optimum);

struct Transition {
    double reward;
    std::size_t next_state;
};

Transition sample_step(const TabularMDP& mdp, std::size_t s, std::size_t a, Rng& rng);

/// Text serialization: 17 significant digits, lossless for doubles.
void write_mdp(std::ostream& out, const TabularMDP& mdp);
TabularMDP read_mdp(std::istream& in);
std::string to_text(const TabularMDP& mdp);
TabularMDP mdp_from_text(const std::string& text);

} // namespace pmevi
