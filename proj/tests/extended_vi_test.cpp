#include "pmevi/extended_vi.hpp"
#include "pmevi/environments.hpp"
#include "test_support.hpp"

#include <gtest/gtest.h>

#include <array>
#include <cmath>

using namespace pmevi;
using pmevi::testing::behaviour_counts;
using pmevi::testing::dyadic;
using pmevi::testing::dyadic_mdp;
using pmevi::testing::for_each_mesh_point;
using pmevi::testing::random_simplex;
using pmevi::testing::random_vector;

namespace {

BiasConstraintSet random_h(Rng& rng, std::size_t S, int bits) {
    Vector centre(S);
    for (auto& c : centre) c = dyadic(6 * rng.uniform() - 3, bits);
    BiasConstraintSet H(S);
    for (std::size_t i = 0; i < S; ++i)
        for (std::size_t j = 0; j < S; ++j)
            if (i != j && rng.uniform() < 0.6)
                H.tighten(i, j, centre[i] - centre[j] + dyadic(2 * rng.uniform(), bits), kFromPrior);
    return H;
}

RegionSpec spec_of(RegionFamily f, std::size_t horizon = 1000) {
    RegionSpec spec;
    spec.kernel_family = f;
    spec.reward_family = f;
    spec.delta = 0.1;
    spec.horizon = horizon;
    return spec;
}

double centre_value(const RegionTable& regions, std::size_t x, const Vector& u) {
    const auto p = regions.empirical_kernel(x);
    double acc = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) acc += p[j] * u[j];
    return acc;
}

} // namespace

TEST(MitigatedApply, InfiniteBetaIsTheExtendedOperator) {
    Rng rng(1);
    const TabularMDP mdp = random_mdp(4, 3, 7, 0.05);
    const RegionTable regions = build_regions(behaviour_counts(mdp, rng, 300), spec_of(RegionFamily::C1));
    const Vector u = random_vector(rng, 4, -2, 2);
    const MitigatedStep step = mitigated_apply(regions, MitigationVector::infinite(12), u);
    for (std::size_t s = 0; s < 4; ++s) {
        double best = -kInf;
        for (std::size_t a = 0; a < 3; ++a)
            best = std::max(best, regions.reward_upper(s, a) + regions.kernel_inner_max(s, a, u).value);
        EXPECT_EQ(step.values[s], best);
    }
}

TEST(MitigatedApply, ZeroBetaPinsToTheEmpiricalKernel) {
    Rng rng(2);
    const TabularMDP mdp = random_mdp(3, 2, 8, 0.05);
    const RegionTable regions = build_regions(behaviour_counts(mdp, rng, 200), spec_of(RegionFamily::C2));
    const Vector u = random_vector(rng, 3, -2, 2);
    const MitigatedStep step = mitigated_apply(regions, MitigationVector{Vector(6, 0.0)}, u, true);
    for (std::size_t s = 0; s < 3; ++s) {
        double best = -kInf;
        for (std::size_t a = 0; a < 2; ++a)
            best = std::max(best, regions.reward_upper(s, a) + centre_value(regions, mdp.layout().pair(s, a), u));
        EXPECT_NEAR(step.values[s], best, 1e-12);
    }
}

TEST(MitigatedApply, SupMinExchangeMatchesGridSearch) {
    Rng rng(3);
    for (int i = 0; i < 6; ++i) {
        const TabularMDP mdp = random_mdp(3, 1, 100 + i, 0.05);
        const CountsTable counts = behaviour_counts(mdp, rng, 40);
        const Vector u = random_vector(rng, 3, -3, 3);
        for (auto f : {RegionFamily::C1, RegionFamily::C2, RegionFamily::C3}) {
            const RegionTable regions = build_regions(counts, spec_of(f));
            for (std::size_t s = 0; s < 3; ++s) {
                const double beta = 0.5 * rng.uniform();
                Vector b(3, kInf);
                b[s] = beta;
                const double centre = centre_value(regions, s, u);
                double grid = -kInf;
                for_each_mesh_point(3, 1000, [&](const Vector& q) {
                    if (regions.contains_kernel(s, 0, q))
                        grid = std::max(grid, std::min(q[0] * u[0] + q[1] * u[1] + q[2] * u[2], centre + beta));
                });
                const MitigatedStep step = mitigated_apply(regions, MitigationVector{b}, u, true);
                const double got = step.values[s] - regions.reward_upper(s, 0);
                EXPECT_NEAR(got, grid, 5e-3) << to_string(f);
                EXPECT_LE(grid, got + 1e-9);
                // The realized kernel attains the mitigated value and stays in the region.
                const Vector& q = step.realized_kernel[s];
                EXPECT_NEAR(q[0] * u[0] + q[1] * u[1] + q[2] * u[2], got, 1e-10);
                EXPECT_TRUE(regions.contains_kernel(s, 0, q)) << to_string(f);
            }
        }
    }
}

TEST(MitigatedApply, TiesGoToTheSmallestAction) {
    const TabularMDP mdp({3}, {{1.0}, {1.0}, {1.0}}, {0.5, 0.5, 0.5});
    const MitigatedStep step =
        mitigated_apply(RegionTable::point_model(mdp), MitigationVector::infinite(3), Vector{0.0});
    EXPECT_EQ(step.policy.action[0], 0u);
}

TEST(Pmevi, ReducesToPlainValueIteration) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const TabularMDP mdp = random_mdp(2 + seed % 5, 1 + seed % 3, seed, 0.02);
        const GainBias truth = solve_gain_bias(mdp, {1e-12, 10'000'000});
        PmeviOptions options;
        options.epsilon = 1e-6;
        const OptimisticSolution sol = evi(RegionTable::point_model(mdp), options);
        ASSERT_TRUE(sol.converged);
        EXPECT_NEAR(sol.gain, truth.gain, 2 * options.epsilon);
        for (std::size_t s = 0; s < mdp.n_states(); ++s) EXPECT_NEAR(sol.bias[s], truth.bias[s], 2 * options.epsilon);
    }
}

TEST(Pmevi, TrivialProjectionMatchesEviStepByStep) {
    Rng rng(4);
    const TabularMDP mdp = river_swim(4);
    const RegionTable regions = build_regions(behaviour_counts(mdp, rng, 500), spec_of(RegionFamily::C1, 5000));
    PmeviOptions options;
    options.record_gaps = true;
    options.v0 = random_vector(rng, 4, -1, 1);
    const BiasProjection identity{BiasConstraintSet(4)};
    const OptimisticSolution a = pmevi::pmevi(regions, MitigationVector::infinite(8), identity, options);
    const OptimisticSolution b = evi(regions, options);
    EXPECT_EQ(a.gaps, b.gaps);
    EXPECT_EQ(a.bias, b.bias);
    EXPECT_EQ(a.gain, b.gain);
}

TEST(Pmevi, ZeroSpanRegionIsACapturedConstant) {
    const TabularMDP mdp = river_swim(3);
    const RegionTable regions = RegionTable::point_model(mdp);
    const BiasProjection gamma{BiasConstraintSet::span_ball(3, 0.0)};
    const OptimisticSolution sol = pmevi::pmevi(regions, MitigationVector::infinite(6), gamma, {});
    // L0(s) = max_a r(s,a) = (0.05, 0, 0.95); the projection keeps the minimum.
    EXPECT_EQ(sol.bias, (Vector{0, 0, 0}));
    EXPECT_EQ(sol.gain, 0.0);
    EXPECT_LE(sol.iterations, 2u);
}

TEST(Pmevi, ExactModelWithCorrectBiasRegionGivesOptimalGain) {
    const TabularMDP mdp = river_swim(3);
    const GainBias truth = solve_gain_bias(mdp);
    const RegionTable regions = RegionTable::point_model(mdp);
    BiasConstraintSet H = BiasConstraintSet::span_ball(3, 5.0);
    H.tighten(0, 1, truth.bias[0] - truth.bias[1] + 0.1, kFromPrior);
    ASSERT_TRUE(H.contains(truth.bias));
    PmeviOptions options;
    options.epsilon = 1e-6;
    const OptimisticSolution sol = pmevi::pmevi(regions, MitigationVector::infinite(6), BiasProjection(H), options);
    EXPECT_NEAR(sol.gain, truth.gain, options.epsilon);
}

TEST(Pmevi, InfeasibleRegionIsAnError) {
    BiasConstraintSet H(2);
    H.tighten(0, 1, -1.0, kFromPrior);
    H.tighten(1, 0, -1.0, kFromPrior);
    const TabularMDP mdp({1, 1}, {{0, 1}, {1, 0}}, {0.2, 0.4});
    EXPECT_THROW(pmevi::pmevi(RegionTable::point_model(mdp), MitigationVector::infinite(2), BiasProjection(H), {}),
                 InfeasibleConstraints);
    PmeviOptions bad;
    bad.epsilon = 0.0;
    EXPECT_THROW(evi(RegionTable::point_model(mdp), bad), InvalidInput);
}

TEST(Evi, SingleStateTakesTheTopOfTheRewardInterval) {
    CountsTable counts(PairLayout({1}));
    const RegionTable regions = build_regions(counts, spec_of(RegionFamily::C1));
    EXPECT_NEAR(evi(regions, {}).gain, 1.0, 1e-12);
    // Point model: the reward region is the single value 0.4.
    const TabularMDP mdp({1}, {{1.0}}, {0.4});
    EXPECT_NEAR(evi(RegionTable::point_model(mdp), {}).gain, 0.4, 1e-12);
}

TEST(Evi, NonConvergenceIsFlagged) {
    const TabularMDP mdp = river_swim(5);
    PmeviOptions options;
    options.max_iterations = 3;
    options.epsilon = 1e-12;
    const OptimisticSolution sol = evi(RegionTable::point_model(mdp), options);
    EXPECT_FALSE(sol.converged);
    EXPECT_EQ(sol.iterations, 3u);
    EXPECT_GE(sol.final_span_gap, options.epsilon);
}

TEST(Evi, IterationBoundFormula) {
    EXPECT_NEAR(evi_iteration_bound(2.0, 0.5, 0.1), 2 + 160 + 4 * std::log(40.0), 1e-12);
    EXPECT_EQ(evi_iteration_bound(0.0, 0.5, 0.1), 2.0);
    // Point model of a chain with every row putting 1/4 on each state.
    const TabularMDP mdp({1, 1, 1, 1}, std::vector<Vector>(4, Vector(4, 0.25)), {0.1, 0.9, 0.3, 0.5});
    PmeviOptions options;
    options.epsilon = 1e-9;
    options.v0 = Vector{0, 3, -1, 2};
    const OptimisticSolution sol = evi(RegionTable::point_model(mdp), options);
    EXPECT_LE(static_cast<double>(sol.iterations), evi_iteration_bound(4.0, 1.0, options.epsilon));
}

TEST(Operator, RegularityOnDyadicInputs) {
    Rng rng(5);
    for (int i = 0; i < 2000; ++i) {
        const std::size_t S = 2 + i % 4, A = 1 + i % 3;
        const TabularMDP mdp = dyadic_mdp(rng, S, A);
        const RegionTable regions = RegionTable::point_model(mdp).with_l1_radius((rng.next_u64() % 33) / 16.0);
        MitigationVector beta{Vector(S * A)};
        for (auto& b : beta.beta) b = rng.uniform() < 0.3 ? kInf : dyadic(rng.uniform(), 6);
        const BiasProjection gamma(random_h(rng, S, 8));
        Vector u(S), v(S), w(S);
        for (std::size_t s = 0; s < S; ++s) {
            u[s] = dyadic(8 * rng.uniform() - 4, 12);
            v[s] = u[s] + dyadic(2 * rng.uniform(), 12);
            w[s] = dyadic(8 * rng.uniform() - 4, 12);
        }
        const double lambda = dyadic(10 * rng.uniform() - 5, 8);
        Vector shifted = u;
        for (auto& x : shifted) x += lambda;
        const Vector lu = projected_apply(regions, beta, gamma, u);
        const Vector lv = projected_apply(regions, beta, gamma, v);
        const Vector lw = projected_apply(regions, beta, gamma, w);
        const Vector ls = projected_apply(regions, beta, gamma, shifted);
        Vector din(S), dout(S);
        for (std::size_t s = 0; s < S; ++s) {
            EXPECT_LE(lu[s], lv[s]);
            EXPECT_EQ(ls[s], lu[s] + lambda);
            din[s] = u[s] - w[s];
            dout[s] = lu[s] - lw[s];
        }
        EXPECT_LE(span(dout), span(din) + 1e-12);
    }
}

TEST(Operator, RegularityOnLearnedRegions) {
    Rng rng(6);
    for (int i = 0; i < 300; ++i) {
        const std::size_t S = 2 + i % 4;
        const TabularMDP mdp = random_mdp(S, 2, 1000 + i, 0.05);
        const RegionFamily f = std::array{RegionFamily::C1, RegionFamily::C2, RegionFamily::C3}[i % 3];
        const RegionTable regions = build_regions(behaviour_counts(mdp, rng, 20 + i), spec_of(f));
        const MitigationVector beta{random_vector(rng, 2 * S, 0.0, 1.0)};
        const BiasProjection gamma(random_h(rng, S, 30));
        const Vector u = random_vector(rng, S, -4, 4), w = random_vector(rng, S, -4, 4);
        Vector v = u;
        for (auto& x : v) x += 2 * rng.uniform();
        const double lambda = 10 * rng.uniform() - 5;
        Vector shifted = u;
        for (auto& x : shifted) x += lambda;
        const Vector lu = projected_apply(regions, beta, gamma, u), lv = projected_apply(regions, beta, gamma, v);
        const Vector lw = projected_apply(regions, beta, gamma, w);
        const Vector ls = projected_apply(regions, beta, gamma, shifted);
        Vector din(S), dout(S);
        for (std::size_t s = 0; s < S; ++s) {
            EXPECT_LE(lu[s], lv[s] + 1e-12);
            EXPECT_NEAR(ls[s], lu[s] + lambda, 1e-12);
            din[s] = u[s] - w[s];
            dout[s] = lu[s] - lw[s];
        }
        EXPECT_LE(span(dout), span(din) + 1e-12);
    }
}

TEST(Operator, StoppingGapNeverIncreases) {
    Rng rng(7);
    for (int i = 0; i < 20; ++i) {
        const TabularMDP mdp = river_swim(3 + i % 3);
        const std::size_t S = mdp.n_states();
        const CountsTable counts = behaviour_counts(mdp, rng, 200 + 50 * i);
        const RegionTable regions = build_regions(counts, spec_of(RegionFamily::C1, 10000));
        const BiasConstraintSet H = merge_constraints(BiasConstraintSet::chain_prior(S, 0.5), std::pow(1e4, 0.2),
                                                      BiasConstraintSet(S));
        const MitigationVector beta = variance_approx(H, counts, 0.1, 10000);
        PmeviOptions options;
        options.record_gaps = true;
        options.epsilon = 1e-8;
        options.max_iterations = 5000;
        options.v0 = random_vector(rng, S, -1, 1);
        const OptimisticSolution sol = pmevi::pmevi(regions, beta, BiasProjection(H), options);
        for (std::size_t k = 1; k < sol.gaps.size(); ++k)
            EXPECT_LE(sol.gaps[k], sol.gaps[k - 1] + 1e-12) << "run " << i << " step " << k;
    }
}

TEST(Operator, StoppingGapMatchesEviWithoutProjectionOrMitigation) {
    Rng rng(9);
    const TabularMDP mdp = river_swim(5);
    const CountsTable counts = behaviour_counts(mdp, rng, 400);
    const RegionTable regions = build_regions(counts, spec_of(RegionFamily::C1, 10000));
    PmeviOptions options;
    options.record_gaps = true;
    const OptimisticSolution a =
        pmevi::pmevi(regions, MitigationVector::infinite(10), BiasProjection(BiasConstraintSet(5)), options);
    EXPECT_EQ(a.gaps, evi(regions, options).gaps);
}

TEST(Pmevi, RealizedModelReproducesTheOperator) {
    Rng rng(8);
    for (int i = 0; i < 60; ++i) {
        const std::size_t S = 2 + i % 4;
        const TabularMDP mdp = random_mdp(S, 2, 500 + i, 0.05);
        const RegionFamily f = std::array{RegionFamily::C1, RegionFamily::C2, RegionFamily::C3}[i % 3];
        const CountsTable counts = behaviour_counts(mdp, rng, 100 + 10 * i);
        const RegionTable regions = build_regions(counts, spec_of(f));
        const BiasConstraintSet H = BiasConstraintSet::span_ball(S, 1.0 + rng.uniform());
        const MitigationVector beta = variance_approx(H, counts, 0.1, 1000);
        PmeviOptions options;
        options.epsilon = 1e-7;
        const OptimisticSolution sol = pmevi::pmevi(regions, beta, BiasProjection(H), options);
        ASSERT_TRUE(sol.converged);
        EXPECT_LT(sol.final_span_gap, options.epsilon);
        EXPECT_EQ(sol.bias[0], 0.0);
        EXPECT_TRUE(H.contains(sol.bias));
        for (std::size_t s = 0; s < S; ++s) {
            const std::size_t a = sol.policy.action[s];
            double pv = 0.0;
            for (std::size_t j = 0; j < S; ++j) pv += sol.realized_kernel[s][j] * sol.bias[j];
            EXPECT_NEAR(sol.bias[s] + sol.gain, sol.realized_reward[s] + pv, options.epsilon);
            EXPECT_LE(sol.realized_reward[s], regions.reward_upper(s, a) + 1e-12);
            EXPECT_TRUE(regions.contains_kernel(s, a, sol.realized_kernel[s]));
        }
    }
}
