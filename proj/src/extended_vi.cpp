#include "pmevi/extended_vi.hpp"

#include <algorithm>
#include <cmath>

namespace pmevi {

namespace {

double midpoint_of_difference(std::span<const double> a, std::span<const double> b) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lo = std::min(lo, a[i] - b[i]);
        hi = std::max(hi, a[i] - b[i]);
    }
    return 0.5 * (lo + hi);
}

double span_of_difference(std::span<const double> a, std::span<const double> b) {
    double lo = kInf, hi = -kInf;
    for (std::size_t i = 0; i < a.size(); ++i) {
        lo = std::min(lo, a[i] - b[i]);
        hi = std::max(hi, a[i] - b[i]);
    }
    return hi - lo;
}

} // namespace

MitigatedStep mitigated_apply(const RegionTable& regions, const MitigationVector& beta,
                              std::span<const double> u, bool with_model) {
    const std::size_t S = regions.n_states();
    const PairLayout& layout = regions.layout();
    if (u.size() != S) throw InvalidInput("mitigated_apply: dimension mismatch");
    if (beta.size() != layout.n_pairs()) throw InvalidInput("mitigated_apply: beta size");

    MitigatedStep out;
    out.values.assign(S, 0.0);
    out.policy.action.assign(S, 0);
    if (with_model) {
        out.realized_reward.assign(S, 0.0);
        out.realized_kernel.assign(S, Vector());
    }
    for (std::size_t s = 0; s < S; ++s) {
        double best = -kInf;
        InnerMax best_inner;
        double best_lambda = 1.0;
        for (std::size_t a = 0; a < layout.n_actions(s); ++a) {
            const std::size_t x = layout.pair(s, a);
            InnerMax inner = regions.kernel_inner_max(s, a, u);
            const double b = beta[x];
            double bias_term = inner.value;
            double lambda = 1.0;
            if (b < kInf) {
                double centre = 0.0;
                const auto p_hat = regions.empirical_kernel(x);
                for (std::size_t j = 0; j < S; ++j) centre += p_hat[j] * u[j];
                if (centre + b < inner.value) {
                    bias_term = centre + b;
                    lambda = b / (inner.value - centre);
                }
            }
            const double q = regions.reward_upper(s, a) + bias_term;
            if (q > best) {
                best = q;
                out.policy.action[s] = a;
                if (with_model) {
                    best_inner = std::move(inner);
                    best_lambda = lambda;
                }
            }
        }
        out.values[s] = best;
        if (with_model) {
            const std::size_t x = layout.pair(s, out.policy.action[s]);
            const auto p_hat = regions.empirical_kernel(x);
            Vector row(S);
            for (std::size_t j = 0; j < S; ++j)
                row[j] = best_lambda * best_inner.maximizer[j] + (1.0 - best_lambda) * p_hat[j];
            out.realized_kernel[s] = std::move(row);
            out.realized_reward[s] = regions.reward_upper(s, out.policy.action[s]);
        }
    }
    return out;
}

Vector projected_apply(const RegionTable& regions, const MitigationVector& beta,
                       const BiasProjection& projection, std::span<const double> u) {
    return projection.apply(mitigated_apply(regions, beta, u).values);
}

OptimisticSolution pmevi(const RegionTable& regions, const MitigationVector& beta,
                         const BiasProjection& projection, const PmeviOptions& options) {
    const std::size_t S = regions.n_states();
    if (!(options.epsilon > 0.0)) throw InvalidInput("pmevi: epsilon must be positive");
    if (!projection.feasible()) throw InfeasibleConstraints("pmevi: empty bias region");

    Vector v = options.v0 ? *options.v0 : Vector(S, 0.0);
    if (v.size() != S) throw InvalidInput("pmevi: v0 has the wrong dimension");

    OptimisticSolution out;
    while (out.iterations < options.max_iterations) {
        Vector next = projected_apply(regions, beta, projection, v);
        ++out.iterations;
        const double gap = span_of_difference(next, v);
        if (options.record_gaps) out.gaps.push_back(gap);
        out.final_span_gap = gap;
        const double anchor = next[0];
        for (double& x : next) x -= anchor;
        v = std::move(next);
        if (gap < options.epsilon) {
            out.converged = true;
            break;
        }
    }

    MitigatedStep step = mitigated_apply(regions, beta, v, true);
    const Vector image = projection.apply(step.values);
    out.gain = midpoint_of_difference(image, v);
    out.policy = std::move(step.policy);
    out.realized_kernel = std::move(step.realized_kernel);
    out.realized_reward.assign(S, 0.0);
    for (std::size_t s = 0; s < S; ++s) {
        double pv = 0.0;
        for (std::size_t j = 0; j < S; ++j) pv += out.realized_kernel[s][j] * v[j];
        out.realized_reward[s] = image[s] - pv;
    }
    out.bias = std::move(v);
    return out;
}

OptimisticSolution evi(const RegionTable& regions, const PmeviOptions& options) {
    const BiasProjection identity{BiasConstraintSet(regions.n_states())};
    return pmevi(regions, MitigationVector::infinite(regions.layout().n_pairs()), identity,
                 options);
}

double evi_iteration_bound(double initial_span, double gamma, double epsilon) {
    if (!(gamma > 0.0 && epsilon > 0.0)) throw InvalidInput("evi_iteration_bound: bad arguments");
    if (initial_span <= 0.0) return 2.0;
    return 2.0 + 4.0 * initial_span / (gamma * epsilon) +
           (2.0 / gamma) * std::log(std::max(1.0, 2.0 * initial_span / epsilon));
}

} // namespace pmevi
