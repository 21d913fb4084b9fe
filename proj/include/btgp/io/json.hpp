#pragma once

#include <fstream>
#include <initializer_list>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "btgp/gp/engine.hpp"
#include "btgp/harness/run.hpp"
#include "btgp/sim/profile.hpp"

// JSON schema for profiles, weights, GP parameters and engine checkpoints.
// Objects are partial overrides of the defaults; unknown keys are errors.

namespace btgp::io {

using Json = nlohmann::json;

namespace detail {

inline void expect_object(const Json& j, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be an object");
}

inline void expect_keys(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
    expect_object(j, where);
    for (const auto& [key, value] : j.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const Json& j, const char* key, T& dst, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    try {
        dst = it->template get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ConfigError("bad value for '" + std::string(key) + "' in " + where);
    }
}

inline void read_probability(const Json& j, const char* key, double& dst, const std::string& where) {
    read(j, key, dst, where);
    if (!(dst >= 0.0 && dst <= 1.0)) throw ConfigError(std::string(key) + " in " + where + " must lie in [0,1]");
}

inline Json pose_to_json(const sim::Pose& p) { return Json::array({p.x, p.y}); }

inline void read_pose(const Json& j, const char* key, sim::Pose& dst, const std::string& where) {
    const auto it = j.find(key);
    if (it == j.end()) return;
    if (!it->is_array() || it->size() != 2 || !(*it)[0].is_number() || !(*it)[1].is_number())
        throw ConfigError(std::string(key) + " in " + where + " must be [x, y]");
    dst = {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

} // namespace detail

// --- failure probabilities and path risk ----------------------------------------

inline Json to_json(const sim::FailureProbabilities& p) {
    return {{"loc_failure", p.loc_failure},   {"pick_failure", p.pick_failure},
            {"place_failure", p.place_failure}, {"losing_cube", p.losing_cube},
            {"losing_localization", p.losing_localization}};
}

inline sim::FailureProbabilities probabilities_from_json(const Json& j, sim::FailureProbabilities p = {}) {
    const std::string where = "probabilities";
    detail::expect_keys(j, where, {"loc_failure", "pick_failure", "place_failure", "losing_cube", "losing_localization"});
    detail::read_probability(j, "loc_failure", p.loc_failure, where);
    detail::read_probability(j, "pick_failure", p.pick_failure, where);
    detail::read_probability(j, "place_failure", p.place_failure, where);
    detail::read_probability(j, "losing_cube", p.losing_cube, where);
    detail::read_probability(j, "losing_localization", p.losing_localization, where);
    return p;
}

inline Json to_json(const sim::PathRisk& r) {
    return {{"losing_cube", r.losing_cube}, {"losing_localization", r.losing_localization}};
}

inline sim::PathRisk path_risk_from_json(const Json& j, sim::PathRisk r = {}) {
    const std::string where = "risky_path";
    detail::expect_keys(j, where, {"losing_cube", "losing_localization"});
    detail::read_probability(j, "losing_cube", r.losing_cube, where);
    detail::read_probability(j, "losing_localization", r.losing_localization, where);
    return r;
}

// --- profile ------------------------------------------------------------------------

/// {"base": builtin name, "name", "pool", "probabilities", "risky_path" (object
/// or null), "geometry", "timing", "start", "behaviors": [ids to keep]}. A bare
/// string is a builtin profile name.
inline sim::ScenarioProfile profile_from_json(const Json& j, sim::Scenario pool = sim::Scenario::Core9) {
    if (j.is_string()) return sim::builtin_profile(j.get<std::string>(), pool);
    const std::string where = "profile";
    detail::expect_keys(j, where,
                        {"base", "name", "pool", "probabilities", "risky_path", "geometry", "timing", "start", "behaviors"});
    std::string base = "det";
    detail::read(j, "base", base, where);
    if (j.contains("pool")) pool = sim::scenario_from_string(j.at("pool").get<std::string>());
    sim::ScenarioProfile p = sim::builtin_profile(base, pool);
    detail::read(j, "name", p.name, where);
    if (j.contains("probabilities")) p.probabilities = probabilities_from_json(j.at("probabilities"), p.probabilities);
    if (j.contains("risky_path")) {
        if (j.at("risky_path").is_null()) p.risky_path.reset();
        else p.risky_path = path_risk_from_json(j.at("risky_path"), p.risky_path.value_or(sim::PathRisk{}));
    }
    if (j.contains("geometry")) {
        const Json& g = j.at("geometry");
        const std::string gw = "geometry";
        detail::expect_keys(g, gw, {"start", "pick", "goal", "reach_radius", "approach_offset", "lost_loc_error",
                                    "localized_error"});
        detail::read_pose(g, "start", p.geometry.start, gw);
        detail::read_pose(g, "pick", p.geometry.pick, gw);
        detail::read_pose(g, "goal", p.geometry.goal, gw);
        detail::read(g, "reach_radius", p.geometry.reach_radius, gw);
        detail::read(g, "approach_offset", p.geometry.approach_offset, gw);
        detail::read(g, "lost_loc_error", p.geometry.lost_loc_error, gw);
        detail::read(g, "localized_error", p.geometry.localized_error, gw);
    }
    if (j.contains("timing")) {
        const Json& t = j.at("timing");
        const std::string tw = "timing";
        detail::expect_keys(t, tw, {"localise", "head", "tuck", "pick", "place", "speed", "safe_path_factor"});
        detail::read(t, "localise", p.timing.localise, tw);
        detail::read(t, "head", p.timing.head, tw);
        detail::read(t, "tuck", p.timing.tuck, tw);
        detail::read(t, "pick", p.timing.pick, tw);
        detail::read(t, "place", p.timing.place, tw);
        detail::read(t, "speed", p.timing.speed, tw);
        detail::read(t, "safe_path_factor", p.timing.safe_path_factor, tw);
        if (!(p.timing.speed > 0.0)) throw ConfigError("timing.speed must be positive");
    }
    if (j.contains("start")) {
        const Json& s = j.at("start");
        const std::string sw = "start";
        detail::expect_keys(s, sw, {"localized", "arm_tucked", "head"});
        detail::read(s, "localized", p.start.localized, sw);
        detail::read(s, "arm_tucked", p.start.arm_tucked, sw);
        if (s.contains("head")) {
            const auto head = s.at("head").get<std::string>();
            if (head != "up" && head != "down") throw ConfigError("start.head must be \"up\" or \"down\"");
            p.start.head = head == "up" ? sim::Head::Up : sim::Head::Down;
        }
    }
    std::vector<std::string> keep;
    for (const auto& b : p.pool) keep.push_back(b.id);
    const bool restricted = j.contains("behaviors");
    if (restricted) detail::read(j, "behaviors", keep, where);
    const std::size_t before = p.pool.size();
    p.rebuild();
    if (restricted || p.pool.size() != before) p.restrict_pool(keep);
    return p;
}

inline Json to_json(const sim::ScenarioProfile& p) {
    Json behaviors = Json::array();
    for (const auto& b : p.pool) behaviors.push_back(b.id);
    Json j{{"name", p.name},
           {"pool", std::string(sim::to_string(p.scenario))},
           {"probabilities", to_json(p.probabilities)},
           {"risky_path", p.risky_path ? to_json(*p.risky_path) : Json(nullptr)},
           {"geometry",
            {{"start", detail::pose_to_json(p.geometry.start)},
             {"pick", detail::pose_to_json(p.geometry.pick)},
             {"goal", detail::pose_to_json(p.geometry.goal)},
             {"reach_radius", p.geometry.reach_radius},
             {"approach_offset", p.geometry.approach_offset},
             {"lost_loc_error", p.geometry.lost_loc_error},
             {"localized_error", p.geometry.localized_error}}},
           {"timing",
            {{"localise", p.timing.localise},
             {"head", p.timing.head},
             {"tuck", p.timing.tuck},
             {"pick", p.timing.pick},
             {"place", p.timing.place},
             {"speed", p.timing.speed},
             {"safe_path_factor", p.timing.safe_path_factor}}},
           {"start",
            {{"localized", p.start.localized},
             {"arm_tucked", p.start.arm_tucked},
             {"head", p.start.head == sim::Head::Up ? "up" : "down"}}},
           {"behaviors", behaviors}};
    return j;
}

// --- weights ------------------------------------------------------------------------

inline Json to_json(const FitnessWeights& w) {
    return {{"alpha_cube_goal", w.alpha_cube_goal}, {"alpha_robot_cube", w.alpha_robot_cube},
            {"alpha_localization", w.alpha_localization}, {"beta_length", w.beta_length},
            {"gamma_time", w.gamma_time}, {"delta_risk", w.delta_risk},
            {"pick_reward", w.pick_reward}, {"place_reward", w.place_reward}};
}

/// A bare "table2" selects the default weights.
inline FitnessWeights weights_from_json(const Json& j, FitnessWeights w = kDefaultWeights) {
    if (j.is_string()) {
        if (j.get<std::string>() != "table2") throw ConfigError("unknown weight set '" + j.get<std::string>() + "'");
        return kDefaultWeights;
    }
    const std::string where = "weights";
    detail::expect_keys(j, where, {"alpha_cube_goal", "alpha_robot_cube", "alpha_localization", "beta_length",
                                   "gamma_time", "delta_risk", "pick_reward", "place_reward"});
    detail::read(j, "alpha_cube_goal", w.alpha_cube_goal, where);
    detail::read(j, "alpha_robot_cube", w.alpha_robot_cube, where);
    detail::read(j, "alpha_localization", w.alpha_localization, where);
    detail::read(j, "beta_length", w.beta_length, where);
    detail::read(j, "gamma_time", w.gamma_time, where);
    detail::read(j, "delta_risk", w.delta_risk, where);
    detail::read(j, "pick_reward", w.pick_reward, where);
    detail::read(j, "place_reward", w.place_reward, where);
    return w;
}

// --- GP parameters ------------------------------------------------------------------

inline Json to_json(const gp::GpParams& p) {
    return {{"population", p.population},
            {"start_length", p.start_length},
            {"generations", p.generations},
            {"crossover_fraction", p.crossover_fraction},
            {"mutation_fraction", p.mutation_fraction},
            {"elitism_fraction", p.elitism_fraction},
            {"p_node_mutation", p.p_node_mutation},
            {"p_node_addition", p.p_node_addition},
            {"p_node_deletion", p.p_node_deletion},
            {"p_control_node", p.p_control_node},
            {"episodes_per_eval", p.episodes_per_eval},
            {"node_cap", p.node_cap},
            {"seed", p.seed},
            {"reevaluate", gp::to_string(p.reevaluate)},
            {"early_stop_window", p.early_stop_window},
            {"threads", p.threads}};
}

inline gp::GpParams params_from_json(const Json& j, gp::GpParams p = {}) {
    const std::string where = "gp";
    detail::expect_keys(j, where,
                        {"population", "start_length", "generations", "crossover_fraction", "mutation_fraction",
                         "elitism_fraction", "p_node_mutation", "p_node_addition", "p_node_deletion", "p_control_node",
                         "episodes_per_eval", "node_cap", "seed", "reevaluate", "early_stop_window", "threads"});
    detail::read(j, "population", p.population, where);
    detail::read(j, "start_length", p.start_length, where);
    detail::read(j, "generations", p.generations, where);
    detail::read(j, "crossover_fraction", p.crossover_fraction, where);
    detail::read(j, "mutation_fraction", p.mutation_fraction, where);
    detail::read(j, "elitism_fraction", p.elitism_fraction, where);
    detail::read(j, "p_node_mutation", p.p_node_mutation, where);
    detail::read(j, "p_node_addition", p.p_node_addition, where);
    detail::read(j, "p_node_deletion", p.p_node_deletion, where);
    detail::read(j, "p_control_node", p.p_control_node, where);
    detail::read(j, "episodes_per_eval", p.episodes_per_eval, where);
    detail::read(j, "node_cap", p.node_cap, where);
    detail::read(j, "seed", p.seed, where);
    if (j.contains("reevaluate")) p.reevaluate = gp::reevaluation_from_string(j.at("reevaluate").get<std::string>());
    detail::read(j, "early_stop_window", p.early_stop_window, where);
    detail::read(j, "threads", p.threads, where);
    p.validate();
    return p;
}

/// null disables final selection.
inline std::optional<harness::FinalSelection> selection_from_json(const Json& j) {
    if (j.is_null()) return std::nullopt;
    const std::string where = "selection";
    detail::expect_keys(j, where, {"window", "episodes"});
    harness::FinalSelection s;
    detail::read(j, "window", s.window, where);
    detail::read(j, "episodes", s.episodes, where);
    if (s.episodes == 0) throw ConfigError("selection.episodes must be at least 1");
    return s;
}

inline Json to_json(const std::optional<harness::FinalSelection>& s) {
    if (!s) return nullptr;
    return {{"window", s->window}, {"episodes", s->episodes}};
}

// --- checkpoints --------------------------------------------------------------------

inline constexpr const char* kCheckpointFormat = "btgp-checkpoint";
inline constexpr int kCheckpointVersion = 1;

inline Json to_json(const FitnessValue& v) {
    return {{"distance", v.distance_term}, {"length", v.length_term}, {"time", v.time_term},
            {"risk", v.risk_term}, {"rewards", v.rewards}};
}

inline FitnessValue fitness_from_json(const Json& j) {
    detail::expect_keys(j, "fitness", {"distance", "length", "time", "risk", "rewards"});
    FitnessValue v;
    v.distance_term = j.at("distance").get<double>();
    v.length_term = j.at("length").get<double>();
    v.time_term = j.at("time").get<double>();
    v.risk_term = j.at("risk").get<double>();
    v.rewards = j.at("rewards").get<double>();
    return v;
}

/// Checkpoint document. Doubles are written in shortest round-trip form, so
/// a restored engine continues bit-identically.
inline Json checkpoint_to_json(const gp::EngineState& state, const gp::GpParams& params, const bt::LeafSet& leaves,
                               const std::string& profile_name) {
    Json population = Json::array();
    for (const auto& ind : state.population)
        population.push_back({{"genotype", bt::to_text(ind.genotype, leaves)},
                              {"fitness", ind.fitness ? to_json(*ind.fitness) : Json(nullptr)},
                              {"evaluations", ind.evaluations},
                              {"birth_generation", ind.birth_generation}});
    Json history = Json::array();
    for (const auto& h : state.history)
        history.push_back({{"generation", h.generation},
                           {"best", h.best},
                           {"mean", h.mean},
                           {"episodes", h.episodes},
                           {"total_episodes", h.total_episodes},
                           {"best_genotype", bt::to_text(h.best_genotype, leaves)}});
    Json leaf_ids = Json::array();
    for (std::size_t i = 0; i < leaves.size(); ++i) leaf_ids.push_back(leaves.name(static_cast<bt::LeafId>(i)));
    return {{"format", kCheckpointFormat},
            {"version", kCheckpointVersion},
            {"profile", profile_name},
            {"behaviors", leaf_ids},
            {"params", to_json(params)},
            {"generation", state.generation},
            {"rng", state.rng_state},
            {"population", population},
            {"history", history}};
}

struct Checkpoint {
    gp::EngineState state;
    gp::GpParams params;
    std::string profile;
    std::vector<std::string> behaviors;
};

inline Checkpoint checkpoint_from_json(const Json& j, const bt::LeafSet& leaves) {
    try {
        if (j.at("format").get<std::string>() != kCheckpointFormat) throw ConfigError("not a checkpoint document");
        if (j.at("version").get<int>() != kCheckpointVersion) throw ConfigError("unsupported checkpoint version");
        Checkpoint c;
        c.profile = j.at("profile").get<std::string>();
        c.behaviors = j.at("behaviors").get<std::vector<std::string>>();
        if (c.behaviors.size() != leaves.size()) throw ConfigError("checkpoint behavior pool does not match");
        for (std::size_t i = 0; i < leaves.size(); ++i)
            if (c.behaviors[i] != leaves.name(static_cast<bt::LeafId>(i)))
                throw ConfigError("checkpoint behavior pool does not match");
        c.params = params_from_json(j.at("params"));
        c.state.generation = j.at("generation").get<std::size_t>();
        c.state.rng_state = j.at("rng").get<std::string>();
        for (const auto& e : j.at("population")) {
            gp::Individual ind{bt::from_text(e.at("genotype").get<std::string>(), leaves), std::nullopt, 0};
            if (!e.at("fitness").is_null()) ind.fitness = fitness_from_json(e.at("fitness"));
            ind.evaluations = e.at("evaluations").get<std::size_t>();
            ind.birth_generation = e.at("birth_generation").get<std::size_t>();
            c.state.population.push_back(std::move(ind));
        }
        for (const auto& e : j.at("history")) {
            gp::GenerationStats s;
            s.generation = e.at("generation").get<std::size_t>();
            s.best = e.at("best").get<double>();
            s.mean = e.at("mean").get<double>();
            s.episodes = e.at("episodes").get<std::size_t>();
            s.total_episodes = e.at("total_episodes").get<std::size_t>();
            s.best_genotype = bt::from_text(e.at("best_genotype").get<std::string>(), leaves);
            c.state.history.push_back(std::move(s));
        }
        return c;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("malformed checkpoint: ") + e.what());
    }
}

// --- files --------------------------------------------------------------------------

inline Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed for " + path);
}

inline void write_json_file(const std::string& path, const Json& j) { write_text_file(path, j.dump(1) + "\n"); }

} // namespace btgp::io
