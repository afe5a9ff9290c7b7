#include "pmevi/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <istream>
#include <ostream>
#include <sstream>

namespace pmevi {

std::string_view to_string(RewardLaw law) {
    return law == RewardLaw::Bernoulli ? "bernoulli" : "deterministic";
}

RewardLaw parse_reward_law(std::string_view text) {
    if (text == "bernoulli") return RewardLaw::Bernoulli;
    if (text == "deterministic") return RewardLaw::Deterministic;
    throw InvalidInput("unknown reward law '" + std::string(text) + "'");
}

TabularMDP::TabularMDP(std::vector<std::size_t> actions_per_state, std::vector<Vector> kernel_rows,
                       Vector mean_reward, RewardLaw law)
    : layout_(std::move(actions_per_state)), reward_(std::move(mean_reward)), law_(law) {
    const std::size_t S = layout_.n_states();
    if (S == 0) throw InvalidInput("MDP needs at least one state");
    for (std::size_t s = 0; s < S; ++s)
        if (layout_.n_actions(s) == 0)
            throw InvalidInput("state " + std::to_string(s) + " has no action");
    if (kernel_rows.size() != layout_.n_pairs() || reward_.size() != layout_.n_pairs())
        throw InvalidInput("kernel/reward tables do not match the action counts");

    kernel_.reserve(layout_.n_pairs() * S);
    for (std::size_t x = 0; x < kernel_rows.size(); ++x) {
        const Vector& row = kernel_rows[x];
        if (row.size() != S) throw InvalidInput("kernel row has wrong length");
        double total = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw InvalidInput("kernel row has a negative entry");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw InvalidInput("kernel row " + std::to_string(x) + " does not sum to 1");
        kernel_.insert(kernel_.end(), row.begin(), row.end());
        if (!(reward_[x] >= 0.0 && reward_[x] <= 1.0))
            throw InvalidInput("mean reward outside [0,1]");
    }
}

double span(std::span<const double> u) {
    if (u.empty()) throw InvalidInput("span of an empty vector");
    auto [lo, hi] = std::minmax_element(u.begin(), u.end());
    return *hi - *lo;
}

BellmanResult bellman_apply(const TabularMDP& mdp, std::span<const double> u) {
    const std::size_t S = mdp.n_states();
    if (u.size() != S) throw InvalidInput("bellman_apply: dimension mismatch");
    BellmanResult out{Vector(S), Policy{std::vector<std::size_t>(S, 0)}};
    for (std::size_t s = 0; s < S; ++s) {
        double best = -kInf;
        for (std::size_t a = 0; a < mdp.n_actions(s); ++a) {
            auto row = mdp.kernel(s, a);
            double q = mdp.mean_reward(s, a);
            for (std::size_t j = 0; j < S; ++j) q += row[j] * u[j];
            if (q > best) {
                best = q;
                out.policy.action[s] = a;
            }
        }
        out.values[s] = best;
    }
    return out;
}

namespace {

using Operator = std::function<Vector(const Vector&)>;

// Relative value iteration on a generic average-reward operator. Stops when
// sp(Lv - v) < tol. Falls back to the damped map v <- (v + Lv)/2, whose
// fix-points coincide with those of L, once the gap stops shrinking.
GainBias relative_value_iteration(const Operator& apply, std::size_t S,
                                  const SolveOptions& options, const char* name) {
    if (!(options.tol > 0.0)) throw InvalidInput("solver tolerance must be positive");
    constexpr std::size_t kWindow = 64;
    Vector v(S, 0.0);
    Vector diff(S);
    bool damped = false;
    double window_gap = kInf;
    double gap = kInf;

    for (std::size_t it = 1; it <= options.max_iterations; ++it) {
        Vector lv = apply(v);
        for (std::size_t s = 0; s < S; ++s) diff[s] = lv[s] - v[s];
        gap = span(diff);
        if (gap < options.tol) {
            GainBias out;
            auto [lo, hi] = std::minmax_element(diff.begin(), diff.end());
            out.gain = 0.5 * (*lo + *hi);
            out.bias.resize(S);
            for (std::size_t s = 0; s < S; ++s) out.bias[s] = v[s] - v[0];
            out.residual = 0.0;
            for (std::size_t s = 0; s < S; ++s)
                out.residual = std::max(out.residual, std::abs(diff[s] - out.gain));
            out.iterations = it;
            return out;
        }
        if (it % kWindow == 0) {
            if (!damped && gap > 0.95 * window_gap) damped = true;
            window_gap = gap;
        }
        if (damped) {
            for (std::size_t s = 0; s < S; ++s) lv[s] = 0.5 * (v[s] + lv[s]);
        }
        const double anchor = lv[0];
        for (std::size_t s = 0; s < S; ++s) v[s] = lv[s] - anchor;
    }
    throw ConvergenceError(std::string(name) + " did not converge", 0.5 * gap,
                           options.max_iterations);
}

} // namespace

GainBias solve_gain_bias(const TabularMDP& mdp, const SolveOptions& options) {
    return relative_value_iteration(
        [&mdp](const Vector& v) { return bellman_apply(mdp, v).values; }, mdp.n_states(),
        options, "solve_gain_bias");
}

GainBias policy_eval(const TabularMDP& mdp, const Policy& policy, const SolveOptions& options) {
    const std::size_t S = mdp.n_states();
    if (policy.action.size() != S) throw InvalidInput("policy_eval: policy has wrong length");
    for (std::size_t s = 0; s < S; ++s)
        if (policy.action[s] >= mdp.n_actions(s)) throw InvalidInput("policy picks an invalid action");
    return relative_value_iteration(
        [&](const Vector& v) {
            Vector out(S);
            for (std::size_t s = 0; s < S; ++s) {
                auto row = mdp.kernel(s, policy.action[s]);
                double q = mdp.mean_reward(s, policy.action[s]);
                for (std::size_t j = 0; j < S; ++j) q += row[j] * v[j];
                out[s] = q;
            }
            return out;
        },
        S, options, "policy_eval");
}

Vector bellman_gaps(const TabularMDP& mdp, const GainBias& optimum) {
    const std::size_t S = mdp.n_states();
    if (optimum.bias.size() != S) throw InvalidInput("bellman_gaps: dimension mismatch");
    Vector gaps(mdp.n_pairs());
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(s); ++a) {
            auto row = mdp.kernel(s, a);
            double next = 0.0;
            for (std::size_t j = 0; j < S; ++j) next += row[j] * optimum.bias[j];
            const double gap = optimum.bias[s] + optimum.gain - mdp.mean_reward(s, a) - next;
            gaps[mdp.layout().pair(s, a)] = std::max(gap, -optimum.residual);
        }
    }
    return gaps;
}

Transition sample_step(const TabularMDP& mdp, std::size_t s, std::size_t a, Rng& rng) {
    auto row = mdp.kernel(s, a);
    const double mean = mdp.mean_reward(s, a);
    // Reward first, then the next state: two draws per step regardless of law
    // so that changing the law does not shift the transition stream.
    const double ur = rng.uniform();
    const double reward =
        mdp.reward_law() == RewardLaw::Deterministic ? mean : (ur < mean ? 1.0 : 0.0);
    const double us = rng.uniform();
    double acc = 0.0;
    std::size_t next = row.size();
    for (std::size_t j = 0; j < row.size(); ++j) {
        acc += row[j];
        if (us < acc) {
            next = j;
            break;
        }
    }
    if (next == row.size()) {
        // us landed in the rounding slack above the cumulative sum
        for (std::size_t j = row.size(); j-- > 0;)
            if (row[j] > 0.0) {
                next = j;
                break;
            }
    }
    return {reward, next};
}

namespace {

std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void expect_token(std::istream& in, const char* token) {
    std::string word;
    if (!(in >> word) || word != token)
        throw InvalidInput(std::string("MDP text: expected '") + token + "'");
}

} // namespace

void write_mdp(std::ostream& out, const TabularMDP& mdp) {
    const std::size_t S = mdp.n_states();
    out << "pmevi-mdp 1\n";
    out << "states " << S << "\n";
    out << "actions";
    for (std::size_t s = 0; s < S; ++s) out << ' ' << mdp.n_actions(s);
    out << "\n";
    out << "reward_law " << to_string(mdp.reward_law()) << "\n";
    out << "# state action mean_reward kernel[0..S)\n";
    for (std::size_t s = 0; s < S; ++s) {
        for (std::size_t a = 0; a < mdp.n_actions(s); ++a) {
            out << s << ' ' << a << ' ' << format_double(mdp.mean_reward(s, a));
            for (double p : mdp.kernel(s, a)) out << ' ' << format_double(p);
            out << "\n";
        }
    }
}

TabularMDP read_mdp(std::istream& in) {
    expect_token(in, "pmevi-mdp");
    int version = 0;
    if (!(in >> version) || version != 1) throw InvalidInput("MDP text: unsupported version");
    expect_token(in, "states");
    std::size_t S = 0;
    if (!(in >> S) || S == 0) throw InvalidInput("MDP text: bad state count");
    expect_token(in, "actions");
    std::vector<std::size_t> actions(S);
    for (auto& a : actions)
        if (!(in >> a)) throw InvalidInput("MDP text: bad action counts");
    expect_token(in, "reward_law");
    std::string law;
    in >> law;
    const RewardLaw reward_law = parse_reward_law(law);

    PairLayout layout(actions);
    std::vector<Vector> rows(layout.n_pairs(), Vector(S));
    Vector rewards(layout.n_pairs());
    std::string line;
    std::size_t seen = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::size_t s = 0, a = 0;
        if (!(ls >> s >> a)) continue;
        if (s >= S || a >= actions[s]) throw InvalidInput("MDP text: pair out of range");
        const std::size_t x = layout.pair(s, a);
        if (!(ls >> rewards[x])) throw InvalidInput("MDP text: missing reward");
        for (auto& p : rows[x])
            if (!(ls >> p)) throw InvalidInput("MDP text: short kernel row");
        ++seen;
    }
    if (seen != layout.n_pairs()) throw InvalidInput("MDP text: missing state-action rows");
    return TabularMDP(std::move(actions), std::move(rows), std::move(rewards), reward_law);
}

std::string to_text(const TabularMDP& mdp) {
    std::ostringstream out;
    write_mdp(out, mdp);
    return out.str();
}

TabularMDP mdp_from_text(const std::string& text) {
    std::istringstream in(text);
    return read_mdp(in);
}

} // namespace pmevi
