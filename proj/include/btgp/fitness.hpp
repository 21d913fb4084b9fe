#pragma once

#include <cstddef>

#include "btgp/sim/simulator.hpp"

namespace btgp {

/// Weights of the cost function. Distances enter squared.
struct FitnessWeights {
    double alpha_cube_goal = 10.0;   // per m^2
    double alpha_robot_cube = 2.0;   // per m^2
    double alpha_localization = 1.0; // per m^2
    double beta_length = 0.5;        // per node
    double gamma_time = 0.1;         // per second
    double delta_risk = 0.0;         // per unit of summed failure probability
    double pick_reward = 50.0;
    double place_reward = 100.0;

    friend bool operator==(const FitnessWeights&, const FitnessWeights&) = default;
};

/// The default weight set, selectable as `table2`.
inline constexpr FitnessWeights kDefaultWeights{};

/// Cost terms. cost() = distance + length + time + risk - rewards, summed in
/// that order; fitness is its negation.
struct FitnessValue {
    double distance_term = 0.0;
    double length_term = 0.0;
    double time_term = 0.0;
    double risk_term = 0.0;
    double rewards = 0.0;

    [[nodiscard]] double cost() const noexcept {
        return (((distance_term + length_term) + time_term) + risk_term) - rewards;
    }
    [[nodiscard]] double fitness() const noexcept { return -cost(); }

    friend bool operator==(const FitnessValue&, const FitnessValue&) = default;
};

inline FitnessValue cost(const sim::WorldState& s, std::size_t node_count, bool picked, bool placed,
                         const sim::Geometry& geo, const FitnessWeights& w) {
    const double d_cube_goal = sim::distance(s.cube, geo.goal);
    const double d_robot_cube = s.robot_cube_distance();
    const double loc = s.loc_error();
    FitnessValue v;
    v.distance_term = (w.alpha_cube_goal * d_cube_goal * d_cube_goal + w.alpha_robot_cube * d_robot_cube * d_robot_cube) +
                      w.alpha_localization * loc * loc;
    v.length_term = w.beta_length * static_cast<double>(node_count);
    v.time_term = w.gamma_time * s.elapsed_time;
    v.risk_term = w.delta_risk * s.risk_sum;
    v.rewards = (picked ? w.pick_reward : 0.0) + (placed ? w.place_reward : 0.0);
    return v;
}

inline FitnessValue cost(const sim::EpisodeResult& r, const sim::Geometry& geo, const FitnessWeights& w) {
    return cost(r.final_state, r.node_count, r.picked, r.placed, geo, w);
}

/// Folds `sample` into `mean` as observation number `count` (1-based), so
/// the first fold copies the sample and identical samples leave the mean
/// bit-identical.
inline void fold_mean(FitnessValue& mean, const FitnessValue& sample, std::size_t count) noexcept {
    const double k = static_cast<double>(count);
    mean.distance_term += (sample.distance_term - mean.distance_term) / k;
    mean.length_term += (sample.length_term - mean.length_term) / k;
    mean.time_term += (sample.time_term - mean.time_term) / k;
    mean.risk_term += (sample.risk_term - mean.risk_term) / k;
    mean.rewards += (sample.rewards - mean.rewards) / k;
}

/// Mean fitness over `episodes` independent episodes drawn from `rng`.
inline FitnessValue evaluate(const bt::BehaviorTree& tree, const sim::ScenarioProfile& profile,
                             const FitnessWeights& weights, std::size_t episodes, Rng& rng,
                             const sim::Budgets& budgets = {}) {
    if (episodes == 0) throw ConfigError("episodes_per_eval must be at least 1");
    FitnessValue mean;
    for (std::size_t e = 0; e < episodes; ++e)
        fold_mean(mean, cost(sim::run_episode(tree, profile, budgets, rng), profile.geometry, weights), e + 1);
    return mean;
}

} // namespace btgp
