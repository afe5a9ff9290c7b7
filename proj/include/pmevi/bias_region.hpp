#pragma once

#include "pmevi/regions.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>

namespace pmevi {

/// Online commute-time statistics for every ordered pair of states.
///
/// For a pair (s, s') the commute times alternate between visits to s and
/// visits to s', starting with the first visit to s. Window i runs from
/// tau_i to tau_{i+1} - 1. Only completed windows enter the accumulators,
/// with sign (-1)^i.
class CommuteTracker {
public:
    CommuteTracker() = default;
    CommuteTracker(std::size_t n_states, std::size_t initial_state);

    /// Record R_t and S_{t+1}. O(S).
    void update(double reward, std::size_t next_state);

    std::size_t n_states() const { return n_; }
    std::size_t time() const { return time_; }
    double cumulative_reward() const { return cumulative_; }
    /// cumulative_reward / time, 0 before the first step.
    double empirical_gain() const;

    /// Number of completed windows N_t(s <-> s').
    std::size_t commutes(std::size_t s, std::size_t s2) const;
    double signed_steps(std::size_t s, std::size_t s2) const { return at(s, s2).signed_steps; }
    double signed_rewards(std::size_t s, std::size_t s2) const { return at(s, s2).signed_rewards; }

    /// c_t(s, s'), an estimate of h(s) - h(s'), using the empirical gain.
    /// Throws NoEstimate when the pair never commuted.
    double bias_difference(std::size_t s, std::size_t s2) const;
    double bias_difference(std::size_t s, std::size_t s2, double gain) const;

private:
    struct PairState {
        std::size_t taus = 0;
        std::size_t open_time = 0;
        double open_cumulative = 0.0;
        double signed_steps = 0.0;
        double signed_rewards = 0.0;
    };

    const PairState& at(std::size_t s, std::size_t s2) const { return pairs_[s * n_ + s2]; }
    void visit(std::size_t x);

    std::size_t n_ = 0;
    std::size_t time_ = 0;
    double cumulative_ = 0.0;
    std::vector<PairState> pairs_;
};

/// Provenance bits of an upper bound U(s, s').
enum ConstraintSource : std::uint8_t {
    kFromPrior = 1,
    kFromSpan = 2,
    kFromWindow = 4,
    kFromReverseWindow = 8,
};

/// Difference constraints h(s) - h(s') <= U(s, s') plus the window data
/// (estimate c and half-width d) they were derived from.
class BiasConstraintSet {
public:
    BiasConstraintSet() = default;
    explicit BiasConstraintSet(std::size_t n_states);

    /// h(s_0) <= h(s_1) - c <= h(s_2) - 2c <= ...
    static BiasConstraintSet chain_prior(std::size_t n_states, double c);
    static BiasConstraintSet span_ball(std::size_t n_states, double c0);

    std::size_t n_states() const { return n_; }
    double c0() const { return c0_; }
    void set_c0(double c0) { c0_ = c0; }

    double upper(std::size_t s, std::size_t s2) const { return upper_[s * n_ + s2]; }
    std::uint8_t sources(std::size_t s, std::size_t s2) const { return sources_[s * n_ + s2]; }
    /// U(s, s') <- min(U(s, s'), value); provenance follows the minimum.
    void tighten(std::size_t s, std::size_t s2, double value, std::uint8_t source);

    bool has_estimate(std::size_t s, std::size_t s2) const { return commutes(s, s2) > 0; }
    double estimate(std::size_t s, std::size_t s2) const { return estimate_[s * n_ + s2]; }
    double error(std::size_t s, std::size_t s2) const { return error_[s * n_ + s2]; }
    std::size_t commutes(std::size_t s, std::size_t s2) const { return commutes_[s * n_ + s2]; }
    void set_window(std::size_t s, std::size_t s2, double c, double d, std::size_t n);

    /// Copy with the window data kept but all bounds removed.
    BiasConstraintSet windows_only() const;

    bool contains(std::span<const double> h, double tol = 1e-9) const;
    void dump(std::ostream& out) const;

private:
    std::size_t n_ = 0;
    double c0_ = kInf;
    Vector upper_;
    std::vector<std::uint8_t> sources_;
    Vector estimate_;
    Vector error_;
    std::vector<std::size_t> commutes_;
};

/// d = (3 c0 + (1 + c0)(1 + l) + 2 B0) / N.
double window_half_width(double c0, double ell, double b0, std::size_t commutes);

/// Estimator windows |h(s) - h(s') - c| <= d from the commute statistics,
/// with c0 = T^(1/5), l = sqrt(8 T log(2/delta)) and B0 = max(0, t g - sum R).
BiasConstraintSet bias_estimation(const CommuteTracker& tracker, double optimistic_gain,
                                  double delta, std::size_t horizon);

/// H* intersected with the span cap and the estimator windows.
BiasConstraintSet merge_constraints(const BiasConstraintSet& prior, double c0,
                                    const BiasConstraintSet& windows);

/// Gamma u(s) = max{w(s) : w <= u, w in H}, through shortest paths in the
/// constraint graph (edge a -> b of weight U(a, b)).
class BiasProjection {
public:
    BiasProjection() = default;
    explicit BiasProjection(const BiasConstraintSet& constraints);

    bool feasible() const { return feasible_; }
    double distance(std::size_t s, std::size_t s2) const { return dist_[s * n_ + s2]; }
    /// Throws InfeasibleConstraints on an empty H.
    Vector apply(std::span<const double> u) const;
    bool is_identity() const { return identity_; }

private:
    std::size_t n_ = 0;
    bool feasible_ = true;
    bool identity_ = true;
    Vector dist_;
};

bool feasible(const BiasConstraintSet& constraints);
Vector project(const BiasConstraintSet& constraints, std::span<const double> u);

/// V(q, u) = sum q(s) (u(s) - q.u)^2.
double variance(std::span<const double> q, std::span<const double> u);

/// Empirical Bernstein deviation bound of (p_hat - p).u for a fixed u.
double empirical_bernstein_beta(std::span<const double> p_hat, std::span<const double> u,
                                std::size_t visits, double delta, std::size_t horizon);

/// Per-pair cap beta(s, a) in [0, +inf] on the optimistic bias term.
struct MitigationVector {
    Vector beta;

    static MitigationVector infinite(std::size_t n_pairs) { return {Vector(n_pairs, kInf)}; }
    double operator[](std::size_t pair) const { return beta[pair]; }
    std::size_t size() const { return beta.size(); }
};

/// Which window quantity multiplies 8 c0 in the variance bound.
enum class VarianceErrorTerm { Error, Estimate };

MitigationVector variance_approx(const BiasConstraintSet& constraints, const CountsTable& counts,
                                 double delta, std::size_t horizon,
                                 VarianceErrorTerm term = VarianceErrorTerm::Error);

} // namespace pmevi
