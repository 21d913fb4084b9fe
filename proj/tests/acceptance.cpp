// Acceptance suite: one check per criterion, one PASS/FAIL line each.
// Usage: acceptance [--only N] [--jobs J]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "btgp/harness/experiment.hpp"
#include "support/enumerate.hpp"
#include "support/oracles.hpp"

using namespace btgp;
namespace fs = std::filesystem;

namespace {

std::size_t g_jobs = 1;

struct Outcome {
    bool pass = false;
    std::string detail;
};

class Stopwatch {
public:
    [[nodiscard]] double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string format(const char* fmt, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, fmt, args...);
    return buf;
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("btgp_acceptance_" + name);
    fs::remove_all(p);
    return p;
}

std::vector<std::uint64_t> ten_seeds() { return {0, 1, 2, 3, 4, 5, 6, 7, 8, 9}; }

std::vector<harness::ConditionOutcome> run_desk_experiment(const std::string& id) {
    auto config = harness::make_experiment(id, ten_seeds());
    config.jobs = g_jobs;
    config.out_dir = scratch(id).string();
    auto out = harness::run_experiment(config);
    fs::remove_all(config.out_dir);
    return out;
}

std::size_t count_runs(const harness::ConditionOutcome& c, const std::function<bool(const harness::SeedOutcome&)>& f) {
    return static_cast<std::size_t>(std::count_if(c.runs.begin(), c.runs.end(), f));
}

// --- 1: structural validity of everything the engine produces ---------------------

Outcome structural_validity() {
    Stopwatch clock;
    const auto profile = sim::builtin_profile("stoch3");
    std::size_t checked = 0, violations = 0, runs = 0;
    auto check = [&](const std::vector<gp::Individual>& v) {
        for (const auto& ind : v) {
            ++checked;
            violations += bt::is_valid(ind.genotype, profile.leaves) ? 0 : 1;
        }
    };
    while (checked < 100000) {
        gp::GpParams params;
        params.seed = 1000 + runs++;
        params.generations = 50;
        gp::Engine engine(params, profile.leaves, harness::make_evaluator(profile, kDefaultWeights, 1));
        engine.initialize();
        check(engine.population());
        for (std::size_t g = 0; g < 50; ++g) {
            gp::Engine preview = engine;  // breeding a copy exposes the offspring without disturbing the run
            check(preview.breed());
            engine.step();
            check(engine.population());
        }
    }
    const double t = clock.seconds();
    return {violations == 0 && t < 60.0,
            format("%zu individuals from %zu runs x 50 generations, %zu violations, %.1f s", checked, runs, violations,
                   t)};
}

// --- 2: cost against an independent recomputation ---------------------------------

Outcome fitness_oracle() {
    Rng rng(2);
    std::size_t n = 0;
    double worst = 0.0;
    auto compare = [&](const sim::EpisodeResult& r, const sim::Geometry& geo, const FitnessWeights& w) {
        const auto& s = r.final_state;
        const double ref = oracle::brute_force_cost(s.cube.x, s.cube.y, geo.goal.x, geo.goal.y, s.robot_true.x,
                                                     s.robot_true.y, s.holding_cube, s.loc_error(),
                                                     static_cast<double>(r.node_count), s.elapsed_time, s.risk_sum,
                                                     w.delta_risk, r.picked, r.placed);
        const double got = cost(r, geo, w).cost();
        const double rel = ref == 0.0 ? std::abs(got) : std::abs(got - ref) / std::abs(ref);
        worst = std::max(worst, rel);
        ++n;
    };
    // Half from simulated episodes of random trees, half synthetic states.
    for (const char* name : {"stoch3", "stoch4"}) {
        const auto p = sim::builtin_profile(name, sim::Scenario::SafePaths);
        for (int i = 0; i < 250; ++i) {
            const auto g = bt::random_genotype(p.leaves, 1 + uniform_index(rng, 20), rng);
            FitnessWeights w = kDefaultWeights;
            w.delta_risk = i % 2 ? 150.0 : 0.0;
            compare(sim::run_episode(bt::parse(g, p.leaves), p, {}, rng), p.geometry, w);
        }
    }
    const sim::Geometry geo;
    for (int i = 0; i < 500; ++i) {
        sim::EpisodeResult r;
        auto& s = r.final_state;
        s.cube = {6 * uniform01(rng) - 3, 4 * uniform01(rng) - 2};
        s.robot_true = {6 * uniform01(rng) - 3, 4 * uniform01(rng) - 2};
        s.robot_est = s.robot_true + sim::Pose{uniform01(rng), uniform01(rng)};
        s.holding_cube = bernoulli(rng, 0.3);
        s.elapsed_time = 400 * uniform01(rng);
        s.risk_sum = 5 * uniform01(rng);
        r.node_count = 1 + uniform_index(rng, 64);
        r.picked = bernoulli(rng, 0.5);
        r.placed = r.picked && bernoulli(rng, 0.5);
        FitnessWeights w = kDefaultWeights;
        w.delta_risk = 300 * uniform01(rng);
        compare(r, geo, w);
    }
    return {n == 1000 && worst <= 1e-9, format("%zu results, worst relative error %.3g", n, worst)};
}

// --- 3: Monte Carlo calibration of every probabilistic branch ----------------------

Outcome monte_carlo() {
    Stopwatch clock;
    const std::size_t trials = 10000;
    std::size_t branches = 0, failed = 0;
    std::string worst_line;
    double worst_z = 0.0;
    for (const char* column : {"stoch1", "stoch2", "stoch3", "stoch4"}) {
        const auto p = sim::builtin_profile(column);
        const auto& geo = p.geometry;
        Rng rng(derive_seed(3, column[5]));
        auto ready = [&](sim::Pose at, sim::Head head, bool holding) {
            sim::WorldState s = sim::reset(p);
            s.robot_true = at;
            s.robot_est = at;
            s.localized = true;
            s.arm_tucked = true;
            s.head = head;
            s.holding_cube = holding;
            s.cube = holding ? at : geo.pick;
            return s;
        };
        struct Branch {
            const char* name;
            double nominal;
            std::function<bool()> trial;
        };
        const std::vector<Branch> list{
            {"localise failure", p.probabilities.loc_failure,
             [&] {
                 sim::WorldState s = sim::reset(p);
                 return sim::execute(p, "localise", s, rng) == bt::TickStatus::Failure;
             }},
            {"pick failure", p.probabilities.pick_failure,
             [&] {
                 sim::WorldState s = ready(geo.approach(geo.pick), sim::Head::Down, false);
                 return sim::execute(p, "pick", s, rng) == bt::TickStatus::Failure;
             }},
            {"place failure", p.probabilities.place_failure,
             [&] {
                 sim::WorldState s = ready(geo.approach(geo.goal), sim::Head::Down, true);
                 return sim::execute(p, "place", s, rng) == bt::TickStatus::Failure;
             }},
            {"losing cube", p.probabilities.losing_cube,
             [&] {
                 sim::WorldState s = ready(geo.approach(geo.pick), sim::Head::Up, true);
                 sim::execute(p, "move_to_goal", s, rng);
                 return !s.holding_cube;
             }},
            {"losing localization", p.probabilities.losing_localization,
             [&] {
                 sim::WorldState s = ready(geo.start, sim::Head::Up, false);
                 sim::execute(p, "move_to_pick", s, rng);
                 return !s.localized;
             }},
        };
        for (const auto& b : list) {
            std::size_t hits = 0;
            for (std::size_t i = 0; i < trials; ++i) hits += b.trial() ? 1 : 0;
            const double freq = static_cast<double>(hits) / trials;
            const double band = oracle::three_sigma(b.nominal, trials);
            const double dev = std::abs(freq - b.nominal);
            ++branches;
            const bool ok = b.nominal == 0.0 ? hits == 0 : dev <= band;
            failed += ok ? 0 : 1;
            const double z = band > 0.0 ? 3.0 * dev / band : (hits ? 99.0 : 0.0);
            if (z >= worst_z) {
                worst_z = z;
                worst_line = format("%s %s %.4f vs %.2f", column, b.name, freq, b.nominal);
            }
        }
    }
    const double t = clock.seconds();
    return {failed == 0 && t < 60.0,
            format("%zu branches x %zu trials, %zu outside 3 sigma, largest %.2f sigma (%s), %.1f s", branches, trials,
                   failed, worst_z, worst_line.c_str(), t)};
}

// --- 4: exhaustive optimum of the mini-instance -----------------------------------

Outcome mini_optimum() {
    Stopwatch clock;
    const auto p = sim::builtin_profile("mini");
    std::size_t trees = 0;
    double best = -1e300;
    bt::Genotype arg;
    Rng rng(4);
    oracle::TreeEnumerator(p.leaves, 9).run([&](const bt::Genotype& g) {
        ++trees;
        const double j = evaluate(bt::parse(g, p.leaves), p, kDefaultWeights, 1, rng).fitness();
        if (j > best) {
            best = j;
            arg = g;
        }
    });
    const double enum_time = clock.seconds();

    std::size_t hits = 0;
    std::string gens;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        gp::GpParams params;
        params.seed = seed;
        params.generations = 300;
        params.node_cap = 9;
        gp::Engine engine(params, p.leaves, harness::make_evaluator(p, kDefaultWeights, 1));
        engine.run();
        std::size_t reached = 0;
        bool found = false;
        for (const auto& h : engine.history()) {
            if (h.best >= best - 1e-9) {
                reached = h.generation;
                found = true;
                break;
            }
        }
        hits += found ? 1 : 0;
        gens += found ? std::to_string(reached) + " " : "- ";
    }
    return {hits >= 9, format("enumerated %zu trees in %.1f s, optimum J=%.4f (%s); GP reached it in %zu/10 seeds, "
                              "generation per seed: %s",
                              trees, enum_time, best, bt::to_text(arg, p.leaves).c_str(), hits, gens.c_str())};
}

// --- 5 and 8: experiment 1 --------------------------------------------------------

Outcome convergence() {
    Stopwatch clock;
    const auto results = run_desk_experiment("exp1");
    bool pass = true;
    std::string detail;
    for (const auto& c : results) {
        const double need = c.label == "det" ? 1.0 : 0.7;
        const std::size_t ok = count_runs(c, [&](const auto& r) { return r.replay.success_rate >= need; });
        pass = pass && ok >= 8;
        detail += format("%s %zu/10, ", c.label.c_str(), ok);
    }
    detail += format("%.0f s for 5 profiles with %zu jobs", clock.seconds(), g_jobs);
    return {pass, detail};
}

bool duplicated_action(const bt::Genotype& g, const sim::ScenarioProfile& p) {
    std::map<bt::LeafId, int> n;
    for (const auto& t : g.tokens())
        if (t.is_leaf() && !p.leaves.is_condition(t.leaf) && ++n[t.leaf] > 1) return true;
    return false;
}

Outcome complexity_growth() {
    const auto results = run_desk_experiment("exp1");
    std::vector<double> means;
    std::string detail = "mean nodes";
    for (const auto& c : results) {
        double sum = 0.0;
        for (const auto& r : c.runs) sum += static_cast<double>(r.best.genotype.node_count());
        means.push_back(sum / static_cast<double>(c.runs.size()));
        detail += format(" %s=%.1f", c.label.c_str(), means.back());
    }
    bool monotone = true;
    for (std::size_t i = 1; i < means.size(); ++i) monotone = monotone && means[i] >= means[i - 1];
    const auto p4 = sim::builtin_profile("stoch4");
    const std::size_t dup = count_runs(results.back(), [&](const auto& r) { return duplicated_action(r.best.genotype, p4); });
    detail += format("; stoch4 trees with a repeated action %zu/10", dup);
    return {monotone && dup >= 6, detail};
}

// --- 6: experiment 2 --------------------------------------------------------------

Outcome noise_robustness() {
    const auto results = run_desk_experiment("exp2");
    bool pass = true;
    std::string detail;
    for (const auto& c : results) {
        const auto pool = sim::scenario_from_string(c.label);
        const auto p = sim::builtin_profile("stoch3", pool);
        const std::size_t ok = count_runs(c, [](const auto& r) { return r.replay.success_rate >= 0.7; });
        pass = pass && ok >= 8;
        detail += format("%s success %zu/10", c.label.c_str(), ok);
        if (pool != sim::Scenario::Core9) {
            const std::size_t clean =
                count_runs(c, [&](const auto& r) { return !harness::uses_distractor(r.best.genotype, p); });
            pass = pass && clean >= 8;
            detail += format(" distractor-free %zu/10", clean);
        }
        detail += "; ";
    }
    return {pass, detail};
}

// --- 7: experiment 3 --------------------------------------------------------------

Outcome risk_aversion() {
    const auto results = run_desk_experiment("exp3");
    const auto& zero = results[0];
    const auto& averse = results[1];
    auto mean = [](const harness::ConditionOutcome& c, auto field) {
        double s = 0.0;
        for (const auto& r : c.runs) s += field(r);
        return s / static_cast<double>(c.runs.size());
    };
    const std::size_t only_safe =
        count_runs(averse, [](const auto& r) { return r.moves.risky == 0 && r.moves.safe > 0; });
    const std::size_t uses_risky = count_runs(zero, [](const auto& r) { return r.moves.risky > 0; });
    const auto P = [](const harness::SeedOutcome& r) { return r.replay.mean_risk; };
    const auto T = [](const harness::SeedOutcome& r) { return r.replay.mean_time; };
    const double p0 = mean(zero, P), p150 = mean(averse, P), t0 = mean(zero, T), t150 = mean(averse, T);
    const bool pass = only_safe >= 9 && uses_risky >= 7 && p150 < p0 && t150 > t0;
    return {pass, format("delta=150 only safe %zu/10; delta=0 risky %zu/10; mean P %.3f (150) vs %.3f (0); "
                         "mean T %.1f (150) vs %.1f (0)",
                         only_safe, uses_risky, p150, p0, t150, t0)};
}

// --- 9: reproducibility -----------------------------------------------------------

std::map<std::string, std::string> read_tree(const fs::path& root) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(root)) {
        if (!e.is_regular_file()) continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::ostringstream s;
        s << in.rdbuf();
        files[fs::relative(e.path(), root).string()] = s.str();
    }
    return files;
}

Outcome reproducibility() {
    auto base = harness::make_experiment("exp1", {0, 1, 2}, 200);
    base.conditions.erase(base.conditions.begin(), base.conditions.begin() + 3);  // stoch3, stoch4
    struct Variant {
        std::size_t jobs, threads;
    };
    std::vector<std::map<std::string, std::string>> outputs;
    for (const Variant v : {Variant{1, 1}, Variant{1, 1}, Variant{3, 1}, Variant{1, 4}, Variant{2, 3}}) {
        auto c = base;
        c.jobs = v.jobs;
        c.params.threads = v.threads;
        c.out_dir = scratch("repro" + std::to_string(outputs.size())).string();
        harness::run_experiment(c);
        outputs.push_back(read_tree(c.out_dir));
        fs::remove_all(c.out_dir);
    }
    std::size_t differing = 0;
    for (std::size_t k = 1; k < outputs.size(); ++k) differing += outputs[k] == outputs[0] ? 0 : 1;
    return {differing == 0 && outputs[0].size() == 2 * 8,
            format("%zu files per run, 5 runs (serial, serial again, 3 jobs, 4 threads, 2 jobs x 3 threads), "
                   "%zu differ from the first",
                   outputs[0].size(), differing)};
}

// --- 10: episode budget of a full run ---------------------------------------------

Outcome episode_budget() {
    Stopwatch clock;
    gp::GpParams params;  // 8000 generations, N = 30
    params.seed = 0;
    const auto p = sim::builtin_profile("stoch3");
    const auto r = harness::run(params, p, kDefaultWeights);
    const std::size_t gp_episodes = r.history.back().total_episodes;
    const std::size_t total = gp_episodes + r.selection_episodes;
    const bool pass = r.history.size() == 8001 && total >= 350000 && total <= 750000;
    return {pass, format("stoch3 seed 0: %zu episodes (%zu during evolution + %zu for final selection), %.0f s",
                         total, gp_episodes, r.selection_episodes, clock.seconds())};
}

} // namespace

int main(int argc, char** argv) {
    int only = 0;
    g_jobs = std::max(1u, std::thread::hardware_concurrency());
    for (int i = 1; i < argc; ++i) {
        if (!std::strcmp(argv[i], "--only") && i + 1 < argc) only = std::atoi(argv[++i]);
        else if (!std::strcmp(argv[i], "--jobs") && i + 1 < argc) g_jobs = std::max(1, std::atoi(argv[++i]));
        else {
            std::fprintf(stderr, "usage: acceptance [--only N] [--jobs J]\n");
            return 2;
        }
    }
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"structural validity", structural_validity},
        {"fitness oracle", fitness_oracle},
        {"Monte Carlo calibration", monte_carlo},
        {"mini-instance optimum", mini_optimum},
        {"convergence det..stoch4", convergence},
        {"noise robustness", noise_robustness},
        {"risk aversion", risk_aversion},
        {"complexity growth", complexity_growth},
        {"reproducibility", reproducibility},
        {"episode budget", episode_budget},
    };
    if (only < 0 || only > static_cast<int>(criteria.size())) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        if (only != 0 && static_cast<int>(i + 1) != only) continue;
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        std::printf("criterion %2zu %-24s %s  %s\n", i + 1, criteria[i].first, o.pass ? "PASS" : "FAIL",
                    o.detail.c_str());
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    return failures == 0 ? 0 : 1;
}
