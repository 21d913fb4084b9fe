#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "btgp/bt/genotype.hpp"
#include "btgp/sim/world.hpp"

namespace btgp::sim {

/// The five failure probabilities of a state-machine column.
struct FailureProbabilities {
    double loc_failure = 0.0;          // localise does not converge
    double pick_failure = 0.0;
    double place_failure = 0.0;
    double losing_cube = 0.0;          // cube dropped while driving
    double losing_localization = 0.0;  // localization lost while driving
    friend bool operator==(const FailureProbabilities&, const FailureProbabilities&) = default;
};

/// Per-path navigation risk.
struct PathRisk {
    double losing_cube = 0.0;
    double losing_localization = 0.0;
    friend bool operator==(const PathRisk&, const PathRisk&) = default;
};

struct Geometry {
    Pose start{0.0, 0.0};
    Pose pick{2.0, 0.0};   // pick table, where the cube starts and respawns
    Pose goal{-2.0, 0.0};  // place table
    double reach_radius = 0.6;
    double approach_offset = 0.5;  // MoveTo stops this far from a table, on the side facing start
    double lost_loc_error = 1.0;
    double localized_error = 0.05;

    [[nodiscard]] Pose approach(Pose table) const noexcept {
        const Pose dir = start - table;
        const double n = dir.norm();
        if (n == 0.0) return table;
        return table + (approach_offset / n) * dir;
    }
    friend bool operator==(const Geometry&, const Geometry&) = default;
};

/// Fixed durations in seconds; MoveTo time is path length over speed.
struct Timing {
    double localise = 5.0;
    double head = 1.0;
    double tuck = 2.0;
    double pick = 5.0;
    double place = 5.0;
    double speed = 0.5;             // m/s
    double safe_path_factor = 2.0;  // safe MoveTo travel time multiplier
    friend bool operator==(const Timing&, const Timing&) = default;
};

/// Robot configuration right after reset.
struct StartState {
    bool localized = false;
    bool arm_tucked = false;
    Head head = Head::Up;
    friend bool operator==(const StartState&, const StartState&) = default;
};

enum class Scenario : std::uint8_t { Core9, LowNoise, HighNoise, SafePaths };

inline std::string_view to_string(Scenario s) noexcept {
    switch (s) {
        case Scenario::Core9: return "core9";
        case Scenario::LowNoise: return "low_noise";
        case Scenario::HighNoise: return "high_noise";
        case Scenario::SafePaths: return "safe_paths";
    }
    return "?";
}

inline Scenario scenario_from_string(std::string_view name) {
    for (auto s : {Scenario::Core9, Scenario::LowNoise, Scenario::HighNoise, Scenario::SafePaths})
        if (to_string(s) == name) return s;
    throw UnknownScenario(std::string(name));
}

enum class Effect : std::uint8_t { Localise, HeadUp, HeadDown, Tuck, MoveTo, Pick, Place, HaveBlock };

struct BehaviorSpec {
    std::string id;
    bt::LeafKind kind = bt::LeafKind::Action;
    Effect effect = Effect::HaveBlock;
    double time_cost = 0.0;          // fixed part of the duration
    double seconds_per_meter = 0.0;  // MoveTo only
    double fail_prob = 0.0;          // nominal probability added to P on every execution
    double outcome_failure = 0.0;    // localise / pick / place failure probability
    PathRisk path;                   // MoveTo only
    Pose target;                     // MoveTo only
    bool distractor = false;

    /// Duration when executed with the robot at `from`.
    [[nodiscard]] double duration(Pose from) const noexcept {
        return time_cost + seconds_per_meter * distance(from, target);
    }
};

/// Nominal failure probability of a path: at least one of its two events.
inline double path_fail_prob(const PathRisk& r) noexcept {
    return 1.0 - (1.0 - r.losing_cube) * (1.0 - r.losing_localization);
}

/// 30 distractor waypoints: a 6x5 grid over [-3,3]x[-2,2]. Waypoints within
/// reach of a table are pushed radially out to just beyond reach, so they
/// bring the robot close to a table without making it usable. Near-table
/// waypoints come first.
inline std::vector<Pose> distractor_waypoints(const Geometry& geo) {
    std::vector<Pose> near, far;
    for (int row = 0; row < 5; ++row) {
        for (int col = 0; col < 6; ++col) {
            Pose p{-3.0 + 1.2 * col, -2.0 + 1.0 * row};
            bool pushed = false;
            for (Pose table : {geo.pick, geo.goal}) {
                const double d = distance(p, table);
                if (d <= geo.reach_radius) {
                    const Pose dir = d > 0.0 ? (1.0 / d) * (p - table) : (geo.start - table);
                    const double n = dir.norm();
                    p = table + ((geo.reach_radius + 0.1) / n) * dir;
                    pushed = true;
                }
            }
            (pushed ? near : far).push_back(p);
        }
    }
    // Near-useful waypoints first so the three-distractor pool contains them.
    near.insert(near.end(), far.begin(), far.end());
    return near;
}

inline std::string waypoint_id(std::size_t i) {
    std::string s = "move_to_wp";
    if (i < 10) s += '0';
    return s + std::to_string(i);
}

/// Behavior library for `scenario` under the given parameters.
inline std::vector<BehaviorSpec> behavior_pool(Scenario scenario, const FailureProbabilities& probs,
                                               const std::optional<PathRisk>& risky_path, const Geometry& geo,
                                               const Timing& timing) {
    using bt::LeafKind;
    const PathRisk nav = risky_path.value_or(PathRisk{probs.losing_cube, probs.losing_localization});
    const double spm = 1.0 / timing.speed;

    auto simple = [](std::string id, Effect e, double t, double outcome) {
        BehaviorSpec b;
        b.id = std::move(id);
        b.effect = e;
        b.time_cost = t;
        b.outcome_failure = outcome;
        b.fail_prob = outcome;
        return b;
    };
    auto move = [&](std::string id, Pose target, PathRisk risk, double factor) {
        BehaviorSpec b;
        b.id = std::move(id);
        b.effect = Effect::MoveTo;
        b.seconds_per_meter = spm * factor;
        b.path = risk;
        b.fail_prob = path_fail_prob(risk);
        b.target = target;
        return b;
    };

    std::vector<BehaviorSpec> pool;
    pool.push_back(simple("localise", Effect::Localise, timing.localise, probs.loc_failure));
    pool.push_back(simple("head_up", Effect::HeadUp, timing.head, 0.0));
    pool.push_back(simple("head_down", Effect::HeadDown, timing.head, 0.0));
    pool.push_back(simple("tuck", Effect::Tuck, timing.tuck, 0.0));
    pool.push_back(simple("pick", Effect::Pick, timing.pick, probs.pick_failure));
    pool.push_back(simple("place", Effect::Place, timing.place, probs.place_failure));
    pool.push_back(move("move_to_pick", geo.approach(geo.pick), nav, 1.0));
    pool.push_back(move("move_to_goal", geo.approach(geo.goal), nav, 1.0));
    {
        BehaviorSpec c;
        c.id = "have_block";
        c.kind = LeafKind::Condition;
        c.effect = Effect::HaveBlock;
        pool.push_back(c);
    }

    std::size_t distractors = 0;
    switch (scenario) {
        case Scenario::Core9: break;
        case Scenario::LowNoise: distractors = 3; break;
        case Scenario::HighNoise: distractors = 30; break;
        case Scenario::SafePaths:
            pool.push_back(move("move_to_pick_safe", geo.approach(geo.pick), PathRisk{}, timing.safe_path_factor));
            pool.push_back(move("move_to_goal_safe", geo.approach(geo.goal), PathRisk{}, timing.safe_path_factor));
            break;
    }
    const auto waypoints = distractor_waypoints(geo);
    for (std::size_t i = 0; i < distractors; ++i) {
        auto b = move(waypoint_id(i), waypoints[i], nav, 1.0);
        b.distractor = true;
        pool.push_back(std::move(b));
    }
    return pool;
}

/// A named experimental condition: probabilities, geometry and the gene pool
/// built from them.
struct ScenarioProfile {
    std::string name;
    Scenario scenario = Scenario::Core9;
    FailureProbabilities probabilities;
    std::optional<PathRisk> risky_path;  // overrides navigation risk of the regular MoveTo behaviors
    Geometry geometry;
    Timing timing;
    StartState start;
    std::vector<BehaviorSpec> pool;
    bt::LeafSet leaves;

    /// Rebuilds `pool` and `leaves` from the parameters.
    void rebuild() {
        pool = behavior_pool(scenario, probabilities, risky_path, geometry, timing);
        rebuild_leaves();
    }

    void rebuild_leaves() {
        std::vector<bt::LeafInfo> info;
        info.reserve(pool.size());
        for (const auto& b : pool) info.push_back({b.id, b.kind});
        leaves = bt::LeafSet(std::move(info));
    }

    /// Keeps only the listed behaviors, in the listed order.
    void restrict_pool(const std::vector<std::string>& ids) {
        std::vector<BehaviorSpec> kept;
        for (const auto& id : ids) {
            const auto* leaf = leaves.find(id);
            if (!leaf) throw UnknownBehavior(id);
            kept.push_back(pool[*leaf]);
        }
        pool = std::move(kept);
        rebuild_leaves();
    }

    [[nodiscard]] const BehaviorSpec& behavior(std::string_view id) const { return pool[leaves.id(id)]; }
};

inline constexpr std::array<std::string_view, 5> kBuiltinColumns{"det", "stoch1", "stoch2", "stoch3", "stoch4"};

/// Failure probability columns: all zeros for `det`, then the four
/// stochastic columns.
inline FailureProbabilities builtin_probabilities(std::string_view name) {
    if (name == "det") return {0.0, 0.0, 0.0, 0.0, 0.0};
    if (name == "stoch1") return {0.0, 0.0, 0.0, 0.0, 0.1};
    if (name == "stoch2") return {0.0, 0.0, 0.0, 0.05, 0.1};
    if (name == "stoch3") return {0.2, 0.2, 0.1, 0.05, 0.1};
    if (name == "stoch4") return {0.3, 0.4, 0.2, 0.1, 0.2};
    throw ConfigError("unknown profile '" + std::string(name) + "'");
}

/// Navigation risk of the short path when a long safe path exists.
inline constexpr PathRisk kRiskyPath{0.2, 0.4};

/// Behaviors of the brute-force mini-instance.
inline const std::vector<std::string>& mini_pool_ids() {
    static const std::vector<std::string> ids{"pick", "place", "move_to_pick", "move_to_goal", "have_block"};
    return ids;
}

/// Built-in profile `name` over `scenario`: det, stoch1..stoch4, exp3 (the
/// deterministic column plus the risky short path, so path choice is the only
/// source of risk) or mini (deterministic, five behaviors, robot localized
/// with the arm tucked and head up at reset; `scenario` is ignored).
inline ScenarioProfile builtin_profile(std::string_view name, Scenario scenario = Scenario::Core9) {
    ScenarioProfile p;
    p.name = std::string(name);
    p.scenario = scenario;
    if (name == "exp3") {
        p.probabilities = builtin_probabilities("det");
        p.risky_path = kRiskyPath;
    } else if (name == "mini") {
        p.scenario = Scenario::Core9;
        p.probabilities = builtin_probabilities("det");
        p.start = {true, true, Head::Up};
    } else {
        p.probabilities = builtin_probabilities(name);
    }
    p.rebuild();
    if (name == "mini") p.restrict_pool(mini_pool_ids());
    return p;
}

inline constexpr std::array<std::string_view, 7> kBuiltinProfiles{"det",    "stoch1", "stoch2", "stoch3",
                                                                  "stoch4", "exp3",   "mini"};

/// Behavior pool of `scenario` under the deterministic column.
inline std::vector<BehaviorSpec> behavior_pool(Scenario scenario) {
    return builtin_profile("det", scenario).pool;
}

} // namespace btgp::sim
