#pragma once

#include <atomic>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <string>
#include <thread>
#include <vector>

#include "btgp/io/json.hpp"

namespace btgp::harness {

/// One experimental condition: a profile (with its pool) under one weight set.
struct Condition {
    std::string label;
    sim::ScenarioProfile profile;
    FitnessWeights weights = kDefaultWeights;
};

struct ExperimentConfig {
    std::string id = "custom";  // exp1, exp2, exp3 or custom
    std::vector<Condition> conditions;
    gp::GpParams params;
    std::optional<FinalSelection> selection = FinalSelection{};
    std::vector<std::uint64_t> seeds;
    std::string out_dir;
    std::size_t jobs = 1;                // concurrent (condition, seed) runs
    std::size_t replay_episodes = 1000;  // per best tree, for summary.csv
    std::size_t checkpoint_every = 0;    // generations; 0 = never

    void validate() const {
        if (conditions.empty()) throw ConfigError("experiment has no conditions");
        if (seeds.empty()) throw ConfigError("experiment has no seeds");
        if (out_dir.empty()) throw ConfigError("experiment needs an output directory");
        params.validate();
        for (std::size_t i = 0; i < conditions.size(); ++i)
            for (std::size_t k = i + 1; k < conditions.size(); ++k)
                if (conditions[i].label == conditions[k].label)
                    throw ConfigError("duplicate condition label '" + conditions[i].label + "'");
        for (std::size_t i = 0; i < seeds.size(); ++i)
            for (std::size_t k = i + 1; k < seeds.size(); ++k)
                if (seeds[i] == seeds[k]) throw ConfigError("duplicate seed " + std::to_string(seeds[i]));
        if (id == "exp3") {
            if (conditions.size() != 2) throw ConfigError("exp3 needs exactly two delta values");
            for (const auto& c : conditions)
                if (c.profile.scenario != sim::Scenario::SafePaths) throw ConfigError("exp3 requires the safe_paths pool");
            if (conditions[0].weights.delta_risk == conditions[1].weights.delta_risk)
                throw ConfigError("exp3 needs two different delta values");
        }
    }
};

inline constexpr std::size_t kDeskGenerations = 2000;
inline constexpr std::size_t kFullGenerations = 8000;

inline std::string condition_label(const sim::ScenarioProfile& profile, double delta) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s_%s_d%g", profile.name.c_str(), std::string(sim::to_string(profile.scenario)).c_str(),
                  delta);
    return buf;
}

/// The three predefined experiments. exp1: det and stoch1..4 on core9. exp2:
/// stoch3 on core9, low_noise and high_noise. exp3: the exp3 profile on
/// safe_paths with delta 0 and 150.
inline ExperimentConfig make_experiment(const std::string& id, std::vector<std::uint64_t> seeds,
                                        std::size_t generations = kDeskGenerations) {
    ExperimentConfig c;
    c.id = id;
    c.seeds = std::move(seeds);
    c.params.generations = generations;
    if (id == "exp1") {
        for (auto name : sim::kBuiltinColumns) c.conditions.push_back({std::string(name), sim::builtin_profile(name)});
    } else if (id == "exp2") {
        for (auto pool : {sim::Scenario::Core9, sim::Scenario::LowNoise, sim::Scenario::HighNoise})
            c.conditions.push_back({std::string(sim::to_string(pool)), sim::builtin_profile("stoch3", pool)});
    } else if (id == "exp3") {
        for (double delta : {0.0, 150.0}) {
            FitnessWeights w = kDefaultWeights;
            w.delta_risk = delta;
            c.conditions.push_back({delta == 0.0 ? "delta0" : "delta150",
                                    sim::builtin_profile("exp3", sim::Scenario::SafePaths), w});
        }
    } else {
        throw ConfigError("unknown experiment '" + id + "'");
    }
    return c;
}

// --- formatting ------------------------------------------------------------------

/// Shortest-safe fixed format for CSV: 17 significant digits, C locale.
inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string fmt(std::size_t v) { return std::to_string(v); }

inline std::string history_csv(const std::vector<gp::GenerationStats>& history, const bt::LeafSet& leaves) {
    std::string out = "generation,best,mean,episodes,total_episodes,best_nodes,best_genotype\n";
    for (const auto& h : history)
        out += fmt(h.generation) + ',' + fmt(h.best) + ',' + fmt(h.mean) + ',' + fmt(h.episodes) + ',' +
               fmt(h.total_episodes) + ',' + fmt(h.best_genotype.node_count()) + ',' +
               bt::to_text(h.best_genotype, leaves) + '\n';
    return out;
}

inline std::string curve_csv(const std::vector<CurvePoint>& curve, const std::vector<std::uint64_t>& seeds) {
    std::string out = "generation,mean_best,std_best";
    for (auto s : seeds) out += ",seed" + std::to_string(s);
    out += '\n';
    for (const auto& p : curve) {
        out += fmt(p.generation) + ',' + fmt(p.mean_best) + ',' + fmt(p.std_best);
        for (double v : p.per_seed) out += ',' + fmt(v);
        out += '\n';
    }
    return out;
}

// --- results ---------------------------------------------------------------------

/// Move counts from a replay, split by kind of MoveTo.
struct MoveUse {
    std::size_t risky = 0;       // move_to_pick / move_to_goal while a safe variant exists in the pool
    std::size_t safe = 0;        // move_to_*_safe
    std::size_t distractor = 0;  // distractor waypoints
};

inline MoveUse move_use(const ReplayReport& r, const sim::ScenarioProfile& profile) {
    MoveUse m;
    const bool has_safe = profile.leaves.find("move_to_pick_safe") || profile.leaves.find("move_to_goal_safe");
    for (const auto& [id, count] : r.executions) {
        const auto& b = profile.behavior(id);
        if (b.effect != sim::Effect::MoveTo) continue;
        if (b.distractor) m.distractor += count;
        else if (id.ends_with("_safe")) m.safe += count;
        else if (has_safe) m.risky += count;
    }
    return m;
}

/// True when the genotype contains at least one distractor leaf.
inline bool uses_distractor(const bt::Genotype& g, const sim::ScenarioProfile& profile) {
    for (const auto& t : g.tokens())
        if (t.is_leaf() && profile.pool[t.leaf].distractor) return true;
    return false;
}

struct SeedOutcome {
    std::uint64_t seed = 0;
    std::vector<gp::GenerationStats> history;
    gp::Individual best;
    std::size_t selection_episodes = 0;
    ReplayReport replay;
    MoveUse moves;
};

struct ConditionOutcome {
    std::string label;
    std::vector<SeedOutcome> runs;  // in config seed order
    std::vector<CurvePoint> curve;
};

inline std::string summary_csv(const ConditionOutcome& c, const sim::ScenarioProfile& profile) {
    std::string out =
        "seed,selected_fitness,nodes,success_rate,mean_time,mean_risk,risky_moves,safe_moves,distractor_moves,"
        "total_episodes,selection_episodes,genotype\n";
    for (const auto& r : c.runs)
        out += std::to_string(r.seed) + ',' + fmt(r.best.score()) + ',' + fmt(r.best.genotype.node_count()) + ',' +
               fmt(r.replay.success_rate) + ',' + fmt(r.replay.mean_time) + ',' + fmt(r.replay.mean_risk) + ',' +
               fmt(r.moves.risky) + ',' + fmt(r.moves.safe) + ',' + fmt(r.moves.distractor) + ',' +
               fmt(r.history.back().total_episodes) + ',' + fmt(r.selection_episodes) + ',' +
               bt::to_text(r.best.genotype, profile.leaves) + '\n';
    return out;
}

/// Replay stream of the summary: independent of every stream used by the run.
inline std::uint64_t replay_seed(std::uint64_t seed) { return derive_seed(seed, 0x7265706c6179ULL); }

/// One seeded run of one condition, writing its checkpoints if requested.
inline SeedOutcome run_condition_seed(const ExperimentConfig& config, const Condition& cond, std::uint64_t seed,
                                      const std::filesystem::path& dir) {
    gp::GpParams params = config.params;
    params.seed = seed;
    gp::Engine engine(params, cond.profile.leaves, make_evaluator(cond.profile, cond.weights, params.episodes_per_eval));
    const std::string stem = "seed" + std::to_string(seed);
    engine.run([&](const gp::Engine& e) {
        if (config.checkpoint_every > 0 && e.generation() > 0 && e.generation() % config.checkpoint_every == 0)
            io::write_json_file((dir / (stem + ".ckpt.json")).string(),
                                io::checkpoint_to_json(e.snapshot(), e.params(), e.leaves(), cond.profile.name));
    });
    SeedOutcome out;
    out.seed = seed;
    out.history = engine.history();
    out.best = engine.best();
    if (config.selection)
        out.best = select_final(engine, cond.profile, cond.weights, *config.selection, &out.selection_episodes);
    out.replay = replay(out.best.genotype, cond.profile, replay_seed(seed), config.replay_episodes, cond.weights);
    out.moves = move_use(out.replay, cond.profile);
    return out;
}

/// Runs every (condition, seed) pair, `jobs` at a time, and writes under
/// out_dir/<label>/: seed<S>.csv (history), seed<S>_best.txt, curve.csv and
/// summary.csv. Output bytes depend only on the configuration.
inline std::vector<ConditionOutcome> run_experiment(const ExperimentConfig& config) {
    config.validate();
    namespace fs = std::filesystem;
    const fs::path root(config.out_dir);
    std::vector<fs::path> dirs;
    for (const auto& c : config.conditions) {
        std::error_code ec;
        fs::create_directories(root / c.label, ec);
        if (ec) throw IoError("cannot create " + (root / c.label).string() + ": " + ec.message());
        dirs.push_back(root / c.label);
    }

    const std::size_t n_seeds = config.seeds.size();
    const std::size_t n_jobs = config.conditions.size() * n_seeds;
    std::vector<SeedOutcome> results(n_jobs);
    std::vector<std::exception_ptr> errors(n_jobs);
    auto work = [&](std::size_t k) {
        const std::size_t ci = k / n_seeds;
        try {
            results[k] = run_condition_seed(config, config.conditions[ci], config.seeds[k % n_seeds], dirs[ci]);
        } catch (...) {
            errors[k] = std::current_exception();
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(config.jobs, n_jobs));
    if (threads == 1) {
        for (std::size_t k = 0; k < n_jobs; ++k) work(k);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::jthread> pool;
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&] {
                for (std::size_t k = next++; k < n_jobs; k = next++) work(k);
            });
    }
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);

    std::vector<ConditionOutcome> outcomes;
    for (std::size_t ci = 0; ci < config.conditions.size(); ++ci) {
        const Condition& cond = config.conditions[ci];
        ConditionOutcome co;
        co.label = cond.label;
        std::vector<std::vector<gp::GenerationStats>> histories;
        for (std::size_t si = 0; si < n_seeds; ++si) {
            SeedOutcome& r = results[ci * n_seeds + si];
            const std::string stem = "seed" + std::to_string(r.seed);
            io::write_text_file((dirs[ci] / (stem + ".csv")).string(), history_csv(r.history, cond.profile.leaves));
            io::write_text_file((dirs[ci] / (stem + "_best.txt")).string(),
                                bt::to_text(r.best.genotype, cond.profile.leaves) + "\n");
            histories.push_back(r.history);
            co.runs.push_back(std::move(r));
        }
        co.curve = aggregate(histories);
        io::write_text_file((dirs[ci] / "curve.csv").string(), curve_csv(co.curve, config.seeds));
        io::write_text_file((dirs[ci] / "summary.csv").string(), summary_csv(co, cond.profile));
        outcomes.push_back(std::move(co));
    }
    return outcomes;
}

// --- config files ----------------------------------------------------------------

/// {"experiment": "exp1"|"exp2"|"exp3"|"custom", "seeds": [..], "generations",
///  "jobs", "out", "gp": {..}, "selection": {..}|null, "replay_episodes",
///  "checkpoint_every", "conditions": [{"label", "profile": name|{..},
///  "pool", "weights": "table2"|{..}, "delta"}]}. Predefined experiments take
/// their conditions from make_experiment and reject a "conditions" key.
inline ExperimentConfig experiment_from_json(const io::Json& j) {
    const std::string where = "experiment config";
    io::detail::expect_keys(j, where,
                            {"experiment", "seeds", "generations", "jobs", "out", "gp", "selection", "replay_episodes",
                             "checkpoint_every", "conditions"});
    std::string id = "custom";
    io::detail::read(j, "experiment", id, where);
    std::vector<std::uint64_t> seeds;
    io::detail::read(j, "seeds", seeds, where);

    ExperimentConfig c;
    if (id == "custom") {
        c.id = id;
        c.seeds = std::move(seeds);
        if (!j.contains("conditions") || !j.at("conditions").is_array())
            throw ConfigError("custom experiments need a \"conditions\" array");
        for (const auto& e : j.at("conditions")) {
            io::detail::expect_keys(e, "condition", {"label", "profile", "pool", "weights", "delta"});
            sim::Scenario pool = sim::Scenario::Core9;
            if (e.contains("pool")) pool = sim::scenario_from_string(e.at("pool").get<std::string>());
            if (!e.contains("profile")) throw ConfigError("condition needs a \"profile\"");
            Condition cond{"", io::profile_from_json(e.at("profile"), pool)};
            if (e.contains("weights")) cond.weights = io::weights_from_json(e.at("weights"));
            io::detail::read(e, "delta", cond.weights.delta_risk, "condition");
            cond.label = condition_label(cond.profile, cond.weights.delta_risk);
            io::detail::read(e, "label", cond.label, "condition");
            c.conditions.push_back(std::move(cond));
        }
    } else {
        if (j.contains("conditions")) throw ConfigError(id + " defines its own conditions");
        c = make_experiment(id, std::move(seeds));
    }
    if (j.contains("gp")) c.params = io::params_from_json(j.at("gp"), c.params);
    io::detail::read(j, "generations", c.params.generations, where);
    if (j.contains("selection")) c.selection = io::selection_from_json(j.at("selection"));
    io::detail::read(j, "jobs", c.jobs, where);
    io::detail::read(j, "out", c.out_dir, where);
    io::detail::read(j, "replay_episodes", c.replay_episodes, where);
    io::detail::read(j, "checkpoint_every", c.checkpoint_every, where);
    return c;
}

} // namespace btgp::harness
