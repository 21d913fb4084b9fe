#include <gtest/gtest.h>

#include "btgp/fitness.hpp"
#include "support/oracles.hpp"

using namespace btgp;

namespace {

sim::WorldState terminal_state() {
    sim::WorldState s;
    s.cube = {-2.0, 0.0};
    s.robot_true = {-1.5, 0.0};
    s.robot_est = {-1.45, 0.0};
    s.elapsed_time = 60.0;
    s.placed_at_goal = true;
    s.picked_once = true;
    return s;
}

} // namespace

TEST(Fitness, TerminalStateValue) {
    const sim::Geometry geo;
    const FitnessValue v = cost(terminal_state(), 11, true, true, geo, kDefaultWeights);
    // 2 * 0.25 + 0.05^2 + 0.5 * 11 + 0.1 * 60 - 50 - 100
    EXPECT_NEAR(v.cost(), -137.9975, 1e-12);
    EXPECT_NEAR(v.fitness(), 137.9975, 1e-12);
}

TEST(Fitness, ResetStateValue) {
    const auto p = sim::builtin_profile("det");
    sim::WorldState s = sim::reset(p);
    s.robot_est = s.robot_true + sim::Pose{1.0, 0.0};
    const FitnessValue v = cost(s, 1, false, false, p.geometry, kDefaultWeights);
    EXPECT_NEAR(v.cost(), 169.5, 1e-12);
    EXPECT_NEAR(v.fitness(), -169.5, 1e-12);
}

TEST(Fitness, ZeroCase) {
    sim::Geometry geo;
    geo.goal = {0.0, 0.0};
    const FitnessValue v = cost(sim::WorldState{}, 0, false, false, geo, kDefaultWeights);
    EXPECT_EQ(v.cost(), 0.0);
}

TEST(Fitness, PropertiesAgainstBruteForce) {
    Rng rng(11);
    const sim::Geometry geo;
    for (int i = 0; i < 2000; ++i) {
        sim::WorldState s;
        s.cube = {4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2};
        s.robot_true = {4 * uniform01(rng) - 2, 4 * uniform01(rng) - 2};
        s.robot_est = s.robot_true + sim::Pose{uniform01(rng), 0.0};
        s.holding_cube = bernoulli(rng, 0.3);
        s.elapsed_time = 100 * uniform01(rng);
        s.risk_sum = 3 * uniform01(rng);
        const std::size_t nodes = 1 + uniform_index(rng, 40);
        const bool picked = bernoulli(rng, 0.5);
        const bool placed = picked && bernoulli(rng, 0.5);
        FitnessWeights w = kDefaultWeights;
        w.delta_risk = bernoulli(rng, 0.5) ? 150.0 : 0.0;

        const double ref = oracle::brute_force_cost(s.cube.x, s.cube.y, geo.goal.x, geo.goal.y, s.robot_true.x,
                                                     s.robot_true.y, s.holding_cube, s.loc_error(),
                                                     static_cast<double>(nodes), s.elapsed_time, s.risk_sum,
                                                     w.delta_risk, picked, placed);
        const FitnessValue v = cost(s, nodes, picked, placed, geo, w);
        ASSERT_NEAR(v.cost(), ref, 1e-9 * std::max(1.0, std::abs(ref)));

        // More nodes or more time never help; placing never hurts.
        EXPECT_LT(cost(s, nodes + 1, picked, placed, geo, w).fitness(), v.fitness());
        sim::WorldState later = s;
        later.elapsed_time += 1.0;
        EXPECT_LT(cost(later, nodes, picked, placed, geo, w).fitness(), v.fitness());
        if (picked && !placed) {
            EXPECT_GT(cost(s, nodes, true, true, geo, w).fitness(), v.fitness());
        }
    }
}

TEST(Fitness, MeanOfDeterministicEpisodesEqualsSingleEpisode) {
    const auto p = sim::builtin_profile("det");
    const auto tree = bt::parse_text(oracle::kReferenceTree, p.leaves);
    Rng a(1), b(1);
    const FitnessValue one = evaluate(tree, p, kDefaultWeights, 1, a);
    EXPECT_EQ(evaluate(tree, p, kDefaultWeights, 7, b), one);
    // 0.5 * 0.25 * 2 + 0.05^2 + 5.5 + 3 - 150
    EXPECT_NEAR(one.cost(), -140.9975, 1e-12);
    Rng c(1);
    EXPECT_THROW(evaluate(tree, p, kDefaultWeights, 0, c), ConfigError);
}

TEST(Fitness, StochasticMeanIsReproducibleAndWorse) {
    const auto det = sim::builtin_profile("det");
    const auto st = sim::builtin_profile("stoch3");
    const auto tree = bt::parse_text(oracle::kReferenceTree, st.leaves);
    Rng a(5), b(5), c(6);
    const FitnessValue m3 = evaluate(tree, st, kDefaultWeights, 3, a);
    EXPECT_EQ(evaluate(tree, st, kDefaultWeights, 3, b), m3);
    Rng d(1);
    const double det_j = evaluate(tree, det, kDefaultWeights, 1, d).fitness();
    EXPECT_LT(evaluate(tree, st, kDefaultWeights, 1000, c).fitness(), det_j);
}

TEST(Fitness, FoldMeanMatchesArithmeticMean) {
    FitnessValue mean;
    double sum = 0.0;
    for (std::size_t k = 1; k <= 50; ++k) {
        FitnessValue s;
        s.time_term = static_cast<double>(k * k % 17);
        sum += s.time_term;
        fold_mean(mean, s, k);
        EXPECT_NEAR(mean.time_term, sum / static_cast<double>(k), 1e-12);
    }
}
