#include "pmevi/agent.hpp"
#include "pmevi/environments.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace pmevi;

namespace {

AgentConfig config_of(bool projection, bool mitigation, std::size_t horizon,
                      RegionFamily family = RegionFamily::C1) {
    AgentConfig config;
    config.regions.kernel_family = family;
    config.regions.reward_family = family;
    config.regions.delta = 0.05;
    config.regions.horizon = horizon;
    config.use_projection = projection;
    config.use_mitigation = mitigation;
    return config;
}

struct Trajectory {
    std::vector<std::size_t> actions;
    std::vector<double> gains;
    std::size_t episodes = 0;
};

Trajectory run_agent(const TabularMDP& mdp, const AgentConfig& config, std::size_t T, std::uint64_t seed) {
    Agent agent(mdp.layout(), config, 0);
    Rng rng(seed);
    Trajectory out;
    std::size_t s = 0;
    out.gains.push_back(agent.begin_episode().gain);
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t a = agent.act(s);
        out.actions.push_back(a);
        const Transition step = sample_step(mdp, s, a, rng);
        if (agent.observe(s, a, step.reward, step.next_state) && t + 1 < T)
            out.gains.push_back(agent.begin_episode().gain);
        s = step.next_state;
    }
    out.episodes = agent.episodes().size();
    return out;
}

} // namespace

TEST(EpsilonRule, DefaultScheduleAndFixed) {
    EpsilonRule rule;
    EXPECT_NEAR(rule.at(0), std::sqrt(std::log(2.0) / 2.0), 1e-15);
    EXPECT_NEAR(rule.at(100), std::sqrt(std::log(100.0) / 100.0), 1e-15);
    rule.fixed = 1e-3;
    EXPECT_EQ(rule.at(12345), 1e-3);
}

TEST(Agent, ColdStartIsFullyOptimistic) {
    const TabularMDP mdp = river_swim(3);
    Agent agent(mdp.layout(), config_of(true, true, 1000), 0);
    const OptimisticSolution& sol = agent.begin_episode();
    EXPECT_NEAR(sol.gain, 1.0, 1e-9);
    EXPECT_EQ(agent.episodes().size(), 1u);
    EXPECT_FALSE(agent.episodes()[0].dropped_windows);
    for (std::size_t x = 0; x < 6; ++x) EXPECT_EQ(agent.mitigation()[x], kInf);
    EXPECT_EQ(agent.optimistic_gain(), std::min(1.0, sol.gain));
}

TEST(Agent, DoublingRule) {
    const TabularMDP mdp = river_swim(2);
    Agent agent(mdp.layout(), config_of(false, false, 1000), 0);
    agent.begin_episode();
    // First visit of an unvisited pair ends the episode.
    EXPECT_TRUE(agent.observe(0, 0, 0.0, 0));
    agent.begin_episode();
    EXPECT_TRUE(agent.observe(1, 1, 0.0, 1));
    agent.begin_episode();  // snapshot: (0,0) and (1,1) once each
    EXPECT_TRUE(agent.observe(0, 0, 0.0, 0));
    agent.begin_episode();  // (0,0) has 2 visits, the next end needs 4
    EXPECT_FALSE(agent.observe(0, 0, 0.0, 0));
    EXPECT_TRUE(agent.observe(0, 0, 0.0, 0));
}

TEST(Agent, BaselineMatchesAHandWrittenUcrlLoop) {
    const TabularMDP mdp = river_swim(3);
    const std::size_t T = 20000;
    const AgentConfig config = config_of(false, false, T);
    const Trajectory got = run_agent(mdp, config, T, 11);

    // Reference: frozen counts, regions, evi, play until some pair doubles.
    CountsTable counts(mdp.layout());
    Rng rng(11);
    std::size_t s = 0;
    std::vector<std::size_t> frozen(mdp.n_pairs(), 0);
    Policy policy;
    std::size_t episodes = 0;
    auto start = [&] {
        for (std::size_t x = 0; x < mdp.n_pairs(); ++x) frozen[x] = counts.visits(x);
        PmeviOptions options;
        options.epsilon = config.epsilon.at(counts.time());
        policy = evi(build_regions(counts, config.regions), options).policy;
        ++episodes;
    };
    start();
    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t a = policy(s);
        ASSERT_EQ(got.actions[t], a) << "step " << t;
        const Transition step = sample_step(mdp, s, a, rng);
        counts.record(s, a, step.reward, step.next_state);
        const std::size_t x = mdp.layout().pair(s, a);
        if (counts.visits(x) >= std::max<std::size_t>(1, 2 * frozen[x]) && t + 1 < T) start();
        s = step.next_state;
    }
    EXPECT_EQ(got.episodes, episodes);
}

TEST(Agent, PriorReachesTheConstraints) {
    const TabularMDP mdp = river_swim(3);
    AgentConfig config = config_of(true, true, 100000);
    config.prior = BiasConstraintSet::chain_prior(3, 1.0);
    Agent agent(mdp.layout(), config, 0);
    agent.begin_episode();
    EXPECT_EQ(agent.constraints().upper(0, 1), -1.0);
    EXPECT_EQ(agent.constraints().upper(1, 2), -1.0);
    EXPECT_EQ(agent.constraints().sources(0, 1), kFromPrior);
    EXPECT_DOUBLE_EQ(agent.constraints().upper(2, 0), std::pow(1e5, 0.2));
    // The projected bias respects the prior.
    EXPECT_LE(agent.solution().bias[0] - agent.solution().bias[1], -1.0 + 1e-9);
}

TEST(Agent, ProjectionOffIgnoresThePrior) {
    const TabularMDP mdp = river_swim(3);
    AgentConfig config = config_of(false, false, 1000);
    config.prior = BiasConstraintSet::chain_prior(3, 1.0);
    Agent agent(mdp.layout(), config, 0);
    agent.begin_episode();
    EXPECT_EQ(agent.constraints().upper(0, 1), kInf);
    const Trajectory with = run_agent(mdp, config, 3000, 3);
    config.prior.reset();
    const Trajectory without = run_agent(mdp, config, 3000, 3);
    EXPECT_EQ(with.actions, without.actions);
}

TEST(Agent, WrongPriorDimensionIsRejected) {
    AgentConfig config = config_of(true, true, 100);
    config.prior = BiasConstraintSet::chain_prior(4, 1.0);
    EXPECT_THROW(Agent(river_swim(3).layout(), config, 0), InvalidInput);
    config.prior.reset();
    config.regions.delta = 1.5;
    EXPECT_THROW(Agent(river_swim(3).layout(), config, 0), InvalidInput);
}

TEST(Agent, DeterministicGivenTheSeed) {
    const TabularMDP mdp = river_swim(4);
    const AgentConfig config = config_of(true, true, 5000, RegionFamily::C2);
    const Trajectory a = run_agent(mdp, config, 5000, 21), b = run_agent(mdp, config, 5000, 21);
    EXPECT_EQ(a.actions, b.actions);
    EXPECT_EQ(a.gains, b.gains);
}

TEST(Agent, EpisodeCountWithinTheDoublingBound) {
    EXPECT_NEAR(episode_bound(6, 1000), 6 * std::log2(8000.0 / 6), 1e-12);
    for (auto family : {RegionFamily::C1, RegionFamily::C2, RegionFamily::C3}) {
        const TabularMDP mdp = river_swim(3);
        const std::size_t T = 20000;
        const Trajectory tr = run_agent(mdp, config_of(true, true, T, family), T, 5);
        EXPECT_LE(static_cast<double>(tr.episodes), episode_bound(mdp.n_pairs(), T)) << to_string(family);
    }
}

TEST(Agent, GainFloorOnlyDecreases) {
    const TabularMDP mdp = river_swim(3);
    Agent agent(mdp.layout(), config_of(true, true, 10000), 0);
    Rng rng(9);
    std::size_t s = 0;
    agent.begin_episode();
    double floor = agent.optimistic_gain();
    for (std::size_t t = 0; t < 10000; ++t) {
        const std::size_t a = agent.act(s);
        const Transition step = sample_step(mdp, s, a, rng);
        if (agent.observe(s, a, step.reward, step.next_state)) {
            agent.begin_episode();
            EXPECT_LE(agent.optimistic_gain(), floor);
            floor = agent.optimistic_gain();
            EXPECT_LE(floor, agent.solution().gain);
        }
        s = step.next_state;
    }
    EXPECT_EQ(agent.time(), 10000u);
    EXPECT_EQ(agent.tracker().time(), 10000u);
}
