#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "btgp/harness/experiment.hpp"

namespace {

using namespace btgp;
namespace fs = std::filesystem;

std::string default_out(const std::string& fallback) {
    if (const char* env = std::getenv("BTGP_OUT_DIR"); env && *env) return (fs::path(env) / fallback).string();
    return (fs::path("out") / fallback).string();
}

sim::ScenarioProfile load_profile(const std::string& spec, const std::string& pool) {
    const sim::Scenario scenario = sim::scenario_from_string(pool);
    if (spec.ends_with(".json")) return io::profile_from_json(io::read_json_file(spec), scenario);
    return sim::builtin_profile(spec, scenario);
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
    // "a..b" inclusive, or a comma separated list.
    std::vector<std::uint64_t> seeds;
    if (const auto dots = text.find(".."); dots != std::string::npos) {
        const auto lo = std::stoull(text.substr(0, dots));
        const auto hi = std::stoull(text.substr(dots + 2));
        if (hi < lo) throw ConfigError("empty seed range '" + text + "'");
        for (auto s = lo; s <= hi; ++s) seeds.push_back(s);
        return seeds;
    }
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto comma = text.find(',', start);
        seeds.push_back(std::stoull(text.substr(start, comma - start)));
        if (comma == std::string::npos) break;
        start = comma + 1;
    }
    return seeds;
}

void print_summary(const std::vector<harness::ConditionOutcome>& outcomes, const std::string& out_dir) {
    for (const auto& c : outcomes) {
        double success = 0.0;
        for (const auto& r : c.runs) success += r.replay.success_rate;
        std::printf("%-12s seeds=%zu final_mean_best=%.4f mean_success=%.3f\n", c.label.c_str(), c.runs.size(),
                    c.curve.back().mean_best, success / static_cast<double>(c.runs.size()));
    }
    std::printf("results in %s\n", out_dir.c_str());
}

struct RunOptions {
    std::string profile = "det";
    std::string pool = "core9";
    std::uint64_t seed = 0;
    std::size_t generations = harness::kDeskGenerations;
    std::size_t population = 30;
    double delta = 0.0;
    bool full = false;
    std::string reevaluate = "survivors";
    std::size_t threads = 1;
    std::size_t checkpoint_every = 0;
    std::string resume;
    std::string out;
    bool no_selection = false;
};

int cmd_run(const RunOptions& o, const CLI::App& sub) {
    sim::ScenarioProfile profile = load_profile(o.profile, o.pool);
    FitnessWeights weights = kDefaultWeights;
    weights.delta_risk = o.delta;

    gp::GpParams params;
    params.seed = o.seed;
    params.population = o.population;
    params.generations = o.full ? harness::kFullGenerations : o.generations;
    params.reevaluate = gp::reevaluation_from_string(o.reevaluate);
    params.threads = o.threads;

    std::optional<gp::EngineState> restored;
    if (!o.resume.empty()) {
        auto ckpt = io::checkpoint_from_json(io::read_json_file(o.resume), profile.leaves);
        const std::size_t target = params.generations;
        params = ckpt.params;
        params.threads = o.threads;
        if (sub.count("--generations") || o.full) params.generations = target;
        restored = std::move(ckpt.state);
    }

    const std::string out = o.out.empty() ? default_out("run") : o.out;
    fs::create_directories(out);
    const std::string stem = (fs::path(out) / ("seed" + std::to_string(params.seed))).string();

    gp::Engine engine(params, profile.leaves,
                      harness::make_evaluator(profile, weights, params.episodes_per_eval));
    if (restored) engine.restore(*restored);
    engine.run([&](const gp::Engine& e) {
        if (o.checkpoint_every > 0 && e.generation() > 0 && e.generation() % o.checkpoint_every == 0)
            io::write_json_file(stem + ".ckpt.json",
                                io::checkpoint_to_json(e.snapshot(), e.params(), e.leaves(), profile.name));
    });

    gp::Individual best = engine.best();
    std::size_t selection_episodes = 0;
    if (!o.no_selection) best = harness::select_final(engine, profile, weights, {}, &selection_episodes);
    const auto report = harness::replay(best.genotype, profile, harness::replay_seed(params.seed), 1000, weights);

    io::write_text_file(stem + ".csv", harness::history_csv(engine.history(), profile.leaves));
    io::write_text_file(stem + "_best.txt", bt::to_text(best.genotype, profile.leaves) + "\n");
    std::printf("generations=%zu episodes=%zu selection_episodes=%zu\n", engine.generation(),
                engine.history().back().total_episodes, selection_episodes);
    std::printf("best=%s\nfitness=%.6f nodes=%zu success=%.3f mean_time=%.3f\n",
                bt::to_text(best.genotype, profile.leaves).c_str(), best.score(), best.genotype.node_count(),
                report.success_rate, report.mean_time);
    return 0;
}

int cmd_replay(const std::string& tree, const std::string& profile_spec, const std::string& pool, double delta,
               std::size_t episodes, std::uint64_t seed) {
    const sim::ScenarioProfile profile = load_profile(profile_spec, pool);
    FitnessWeights weights = kDefaultWeights;
    weights.delta_risk = delta;
    std::string text = tree;
    if (fs::is_regular_file(tree)) {
        std::ifstream in(tree);
        std::getline(in, text);
    }
    const auto g = bt::from_text(text, profile.leaves);
    const auto r = harness::replay(g, profile, seed, episodes, weights);
    std::printf("episodes=%zu success=%.4f mean_fitness=%.6f mean_time=%.4f mean_risk=%.4f\n", r.episodes,
                r.success_rate, r.mean_fitness, r.mean_time, r.mean_risk);
    for (const auto& [id, count] : r.executions) std::printf("  %-22s %zu\n", id.c_str(), count);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Evolve behavior trees for a simulated pick-and-place task"};
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "one GP run on one profile");
    run->add_option("--profile", ro.profile, "builtin profile name or profile JSON file")->capture_default_str();
    run->add_option("--pool", ro.pool, "core9, low_noise, high_noise or safe_paths")->capture_default_str();
    run->add_option("--seed", ro.seed)->capture_default_str();
    run->add_option("--generations", ro.generations)->capture_default_str();
    run->add_option("--population", ro.population)->capture_default_str();
    run->add_option("--delta", ro.delta, "risk weight")->capture_default_str();
    run->add_flag("--full", ro.full, "8000 generations");
    run->add_option("--reevaluate", ro.reevaluate, "none, elites or survivors")->capture_default_str();
    run->add_option("--threads", ro.threads)->capture_default_str();
    run->add_option("--checkpoint-every", ro.checkpoint_every, "generations between checkpoints, 0 = never");
    run->add_option("--resume", ro.resume, "checkpoint file to continue from");
    run->add_flag("--no-selection", ro.no_selection, "return the top cached score instead of replay selection");
    run->add_option("--out", ro.out, "output directory");

    std::string seeds = "0..9";
    bool full = false;
    std::size_t jobs = 1;
    std::string exp_out;
    std::vector<CLI::App*> exps;
    for (const char* id : {"exp1", "exp2", "exp3"}) {
        auto* e = app.add_subcommand(id, std::string("predefined experiment ") + id);
        e->add_option("--seeds", seeds, "a..b or a,b,c")->capture_default_str();
        e->add_flag("--full", full, "8000 generations");
        e->add_option("--jobs", jobs, "concurrent runs")->capture_default_str();
        e->add_option("--out", exp_out, "output directory");
        exps.push_back(e);
    }

    std::string tree, rp_profile = "det", rp_pool = "core9";
    double rp_delta = 0.0;
    std::size_t rp_episodes = 1000;
    std::uint64_t rp_seed = 0;
    auto* rep = app.add_subcommand("replay", "Monte Carlo evaluation of a fixed tree");
    rep->add_option("--tree", tree, "genotype text or file")->required();
    rep->add_option("--profile", rp_profile)->capture_default_str();
    rep->add_option("--pool", rp_pool)->capture_default_str();
    rep->add_option("--delta", rp_delta)->capture_default_str();
    rep->add_option("--episodes", rp_episodes)->capture_default_str();
    rep->add_option("--seed", rp_seed)->capture_default_str();

    std::string config_file;
    auto* cfg = app.add_subcommand("config", "run an experiment described by a JSON file");
    cfg->add_option("file", config_file)->required()->check(CLI::ExistingFile);

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(ro, *run);
        if (rep->parsed()) return cmd_replay(tree, rp_profile, rp_pool, rp_delta, rp_episodes, rp_seed);
        for (auto* e : exps) {
            if (!e->parsed()) continue;
            auto config = harness::make_experiment(e->get_name(), parse_seeds(seeds),
                                                   full ? harness::kFullGenerations : harness::kDeskGenerations);
            config.jobs = jobs;
            config.out_dir = exp_out.empty() ? default_out(e->get_name()) : exp_out;
            print_summary(harness::run_experiment(config), config.out_dir);
            return 0;
        }
        if (cfg->parsed()) {
            auto config = harness::experiment_from_json(io::read_json_file(config_file));
            if (config.out_dir.empty()) config.out_dir = default_out(config.id);
            print_summary(harness::run_experiment(config), config.out_dir);
            return 0;
        }
    } catch (const btgp::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
