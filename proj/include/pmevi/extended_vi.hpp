#pragma once

#include "pmevi/bias_region.hpp"
#include "pmevi/regions.hpp"

#include <optional>

namespace pmevi {

/// One application of the beta-mitigated extended Bellman operator.
struct MitigatedStep {
    Vector values;
    Policy policy;
    /// Filled only when requested: the optimistic reward and kernel of the
    /// greedy action, one entry (row) per state.
    Vector realized_reward;
    std::vector<Vector> realized_kernel;
};

/// L^beta u(s) = max_a reward_upper(s,a) + min(max_{q in P(s,a)} q.u, p_hat.u + beta(s,a)).
MitigatedStep mitigated_apply(const RegionTable& regions, const MitigationVector& beta,
                              std::span<const double> u, bool with_model = false);

/// Gamma(L^beta u).
Vector projected_apply(const RegionTable& regions, const MitigationVector& beta,
                       const BiasProjection& projection, std::span<const double> u);

struct PmeviOptions {
    double epsilon = 1e-6;
    std::size_t max_iterations = 1'000'000;
    std::optional<Vector> v0;
    /// Keep sp(v_n - v_{n-1}) of every iteration in OptimisticSolution::gaps.
    bool record_gaps = false;
};

struct OptimisticSolution {
    Vector bias;          // anchored, bias[0] == 0
    double gain = 0.0;    // midpoint of (Gamma L^beta h - h)
    Policy policy;
    Vector realized_reward;
    std::vector<Vector> realized_kernel;
    std::size_t iterations = 0;
    double final_span_gap = kInf;
    bool converged = false;
    std::vector<double> gaps;
};

/// Iterate Gamma o L^beta from v0 (zero by default) until sp(v_n - v_{n-1}) < epsilon.
OptimisticSolution pmevi(const RegionTable& regions, const MitigationVector& beta,
                         const BiasProjection& projection, const PmeviOptions& options);

/// Plain extended value iteration: identity projection, no mitigation.
OptimisticSolution evi(const RegionTable& regions, const PmeviOptions& options);

/// Iteration count after which extended value iteration is guaranteed to
/// stop when every operator step puts mass gamma on the argmax of u.
double evi_iteration_bound(double initial_span, double gamma, double epsilon);

} // namespace pmevi
