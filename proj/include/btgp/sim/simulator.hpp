#pragma once

#include <cstdint>
#include <vector>

#include "btgp/bt/tree.hpp"
#include "btgp/random.hpp"
#include "btgp/sim/profile.hpp"

namespace btgp::sim {

inline WorldState reset(const ScenarioProfile& profile) {
    const Geometry& geo = profile.geometry;
    WorldState s;
    s.robot_true = geo.start;
    s.localized = profile.start.localized;
    const double err = s.localized ? geo.localized_error : geo.lost_loc_error;
    s.robot_est = geo.start + Pose{err, 0.0};
    s.arm_tucked = profile.start.arm_tucked;
    s.head = profile.start.head;
    s.cube = geo.pick;
    return s;
}

namespace detail {

inline void set_localization(WorldState& s, bool localized, double error) noexcept {
    s.localized = localized;
    s.robot_est = s.robot_true + Pose{error, 0.0};
}

inline void drive(WorldState& s, Pose to) noexcept {
    const Pose offset = s.robot_est - s.robot_true;
    s.robot_true = to;
    s.robot_est = to + offset;
    if (s.holding_cube) s.cube = to;
}

} // namespace detail

/// Executes one behavior on `state`. Every execution is charged its duration
/// and nominal failure probability, whatever the outcome. Preconditions are
/// checked inside the behavior; when one does not hold nothing but T and P
/// changes.
inline bt::TickStatus execute(const ScenarioProfile& profile, bt::LeafId id, WorldState& s, Rng& rng) {
    using bt::TickStatus;
    if (id >= profile.pool.size()) throw UnknownBehavior("leaf id " + std::to_string(id));
    const BehaviorSpec& b = profile.pool[id];
    const Geometry& geo = profile.geometry;

    s.elapsed_time += b.duration(s.robot_true);
    s.risk_sum += b.fail_prob;

    switch (b.effect) {
        case Effect::Localise:
            if (bernoulli(rng, b.outcome_failure)) return TickStatus::Failure;
            detail::set_localization(s, true, geo.localized_error);
            return TickStatus::Success;

        case Effect::HeadUp: s.head = Head::Up; return TickStatus::Success;
        case Effect::HeadDown: s.head = Head::Down; return TickStatus::Success;
        case Effect::Tuck: s.arm_tucked = true; return TickStatus::Success;

        case Effect::MoveTo: {
            if (!(s.localized && s.arm_tucked && s.head == Head::Up)) return TickStatus::Failure;
            // Both path events are drawn on every move so the stream layout
            // does not depend on the state.
            const bool lose_loc = bernoulli(rng, b.path.losing_localization);
            const bool drop = bernoulli(rng, b.path.losing_cube) && s.holding_cube;
            if (drop) {
                s.holding_cube = false;
                s.cube = geo.pick;
            }
            if (lose_loc) {
                detail::drive(s, midpoint(s.robot_true, b.target));
                detail::set_localization(s, false, geo.lost_loc_error);
                return TickStatus::Failure;
            }
            detail::drive(s, b.target);
            return TickStatus::Success;
        }

        case Effect::Pick:
            if (s.holding_cube || !s.localized || s.head != Head::Down ||
                distance(s.robot_true, s.cube) > geo.reach_radius)
                return TickStatus::Failure;
            if (bernoulli(rng, b.outcome_failure)) return TickStatus::Failure;
            s.holding_cube = true;
            s.picked_once = true;
            s.placed_at_goal = false;
            s.cube = s.robot_true;
            return TickStatus::Success;

        case Effect::Place:
            if (!s.holding_cube || !s.localized || s.head != Head::Down ||
                distance(s.robot_true, geo.goal) > geo.reach_radius)
                return TickStatus::Failure;
            if (bernoulli(rng, b.outcome_failure)) return TickStatus::Failure;
            s.holding_cube = false;
            s.cube = geo.goal;
            s.placed_at_goal = true;
            return TickStatus::Success;

        case Effect::HaveBlock:
            return s.holding_cube ? TickStatus::Success : TickStatus::Failure;
    }
    return TickStatus::Failure;
}

inline bt::TickStatus execute(const ScenarioProfile& profile, std::string_view behavior_id, WorldState& s,
                              Rng& rng) {
    return execute(profile, profile.leaves.id(behavior_id), s, rng);
}

/// Adapter that lets the tick engine drive the simulator. Optionally records
/// every executed behavior.
class SimWorld {
public:
    SimWorld(const ScenarioProfile& profile, WorldState& state, Rng& rng,
             std::vector<bt::LeafId>* trace = nullptr) noexcept
        : profile_(&profile), state_(&state), rng_(&rng), trace_(trace) {}

    bt::TickStatus execute(bt::LeafId id) {
        if (trace_) trace_->push_back(id);
        return sim::execute(*profile_, id, *state_, *rng_);
    }

private:
    const ScenarioProfile* profile_;
    WorldState* state_;
    Rng* rng_;
    std::vector<bt::LeafId>* trace_;
};

struct Budgets {
    std::uint32_t max_root_failures = 5;
    std::uint32_t max_ticks = 100;
};

enum class Termination : std::uint8_t { RootSuccess, FailureBudget, TickBudget };

inline const char* to_string(Termination t) noexcept {
    switch (t) {
        case Termination::RootSuccess: return "root_success";
        case Termination::FailureBudget: return "failure_budget";
        case Termination::TickBudget: return "tick_budget";
    }
    return "?";
}

struct EpisodeResult {
    WorldState final_state;
    bool picked = false;
    bool placed = false;
    std::size_t node_count = 0;
    std::uint32_t ticks_used = 0;
    Termination terminated_by = Termination::TickBudget;
    friend bool operator==(const EpisodeResult&, const EpisodeResult&) = default;
};

/// Ticks the root until it succeeds, fails more than max_root_failures times
/// or max_ticks ticks elapse.
inline EpisodeResult run_episode(const bt::BehaviorTree& tree, const ScenarioProfile& profile, const Budgets& budgets,
                                 Rng& rng, std::vector<bt::LeafId>* trace = nullptr) {
    EpisodeResult r;
    r.final_state = reset(profile);
    WorldState& s = r.final_state;
    SimWorld world(profile, s, rng, trace);
    for (;;) {
        if (r.ticks_used >= budgets.max_ticks) {
            r.terminated_by = Termination::TickBudget;
            break;
        }
        const bt::TickStatus status = bt::tick(tree, world);
        ++r.ticks_used;
        if (status == bt::TickStatus::Success) {
            r.terminated_by = Termination::RootSuccess;
            break;
        }
        if (status == bt::TickStatus::Failure && ++s.root_failures > budgets.max_root_failures) {
            r.terminated_by = Termination::FailureBudget;
            break;
        }
    }
    r.picked = s.picked_once;
    r.placed = s.placed_at_goal;
    r.node_count = tree.node_count();
    return r;
}

} // namespace btgp::sim
