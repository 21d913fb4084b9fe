#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <vector>

#include "btgp/bt/validate.hpp"
#include "btgp/fitness.hpp"
#include "btgp/gp/engine.hpp"

namespace btgp::harness {

/// Evaluator that maps a genotype to its tree and averages
/// `episodes_per_eval` simulated episodes.
inline gp::Evaluator make_evaluator(const sim::ScenarioProfile& profile, const FitnessWeights& weights,
                                    std::size_t episodes_per_eval, sim::Budgets budgets = {}) {
    return [&profile, weights, episodes_per_eval, budgets](const bt::Genotype& g, Rng& rng) {
        return evaluate(bt::parse(g, profile.leaves), profile, weights, episodes_per_eval, rng, budgets);
    };
}

/// How the returned best tree is chosen once the run ends. Candidates are the
/// final population plus the distinct generation-best genotypes of the last
/// `window` generations; each is scored by the mean of `episodes` fresh
/// episodes and the highest mean wins (earlier candidate among equals).
/// Cached fitness is a noisy estimate under stochastic profiles, so the
/// cached score alone favours lucky fragile trees.
struct FinalSelection {
    std::size_t window = 1000;
    std::size_t episodes = 200;
};

struct RunResult {
    std::vector<gp::GenerationStats> history;
    gp::Individual best;  // fitness holds the selection mean when selection ran
    std::size_t selection_episodes = 0;
};

/// Candidate order: generation bests newest first, then the population by
/// cached score. Streams use purpose 2 of the final generation, which the
/// engine never uses.
inline gp::Individual select_final(const gp::Engine& engine, const sim::ScenarioProfile& profile,
                                   const FitnessWeights& weights, const FinalSelection& sel,
                                   std::size_t* episodes_used = nullptr) {
    std::vector<gp::Individual> candidates;
    auto add = [&](const bt::Genotype& g) {
        for (const auto& c : candidates)
            if (c.genotype == g) return;
        candidates.push_back({g, std::nullopt, 0});
    };
    const auto& history = engine.history();
    const std::size_t stop = history.size() > sel.window ? history.size() - sel.window : 0;
    for (std::size_t i = history.size(); i-- > stop;) add(history[i].best_genotype);
    std::vector<const gp::Individual*> ranked;
    for (const auto& ind : engine.population()) ranked.push_back(&ind);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const gp::Individual* a, const gp::Individual* b) { return a->score() > b->score(); });
    for (const auto* ind : ranked) add(ind->genotype);

    std::vector<gp::Individual*> batch;
    for (auto& c : candidates) batch.push_back(&c);
    const auto& params = engine.params();
    gp::evaluate_batch(batch, make_evaluator(profile, weights, sel.episodes), params.seed,
                       (static_cast<std::uint64_t>(engine.generation()) << 2) | 2U, params.threads);
    if (episodes_used) *episodes_used = candidates.size() * sel.episodes;

    std::size_t best = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].score() > candidates[best].score()) best = i;
    return candidates[best];
}

/// Full GP run on one scenario profile. With `selection` set the returned
/// best comes from select_final, otherwise it is the top cached score.
inline RunResult run(const gp::GpParams& params, const sim::ScenarioProfile& profile, const FitnessWeights& weights,
                     const std::optional<FinalSelection>& selection = FinalSelection{},
                     const std::function<void(const gp::Engine&)>& on_generation = {}) {
    gp::Engine engine(params, profile.leaves, make_evaluator(profile, weights, params.episodes_per_eval));
    engine.run(on_generation);
    RunResult r{engine.history(), engine.best(), 0};
    if (selection) r.best = select_final(engine, profile, weights, *selection, &r.selection_episodes);
    return r;
}

// --- replay --------------------------------------------------------------------

struct ReplayReport {
    std::size_t episodes = 0;
    double success_rate = 0.0;  // fraction of episodes with the cube placed at the goal
    double mean_time = 0.0;
    double mean_risk = 0.0;
    double mean_fitness = 0.0;
    std::array<std::size_t, 3> terminations{};  // indexed by sim::Termination
    std::map<std::string, std::size_t> executions;  // behavior id -> times executed over all episodes
};

/// Monte Carlo evaluation of a fixed tree. Episode e uses the stream
/// derive_seed(seed, e).
inline ReplayReport replay(const bt::Genotype& genotype, const sim::ScenarioProfile& profile, std::uint64_t seed,
                           std::size_t episodes, const FitnessWeights& weights = kDefaultWeights,
                           sim::Budgets budgets = {}) {
    const bt::BehaviorTree tree = bt::parse(genotype, profile.leaves);
    const auto report = bt::check(tree);
    if (!report.valid())
        throw MalformedGenotype(std::string("tree breaks rule ") + bt::to_string(report.violations.front().rule));

    ReplayReport r;
    r.episodes = episodes;
    std::vector<std::size_t> counts(profile.pool.size(), 0);
    std::vector<bt::LeafId> trace;
    std::size_t placed = 0;
    for (std::size_t e = 0; e < episodes; ++e) {
        Rng rng(derive_seed(seed, e));
        trace.clear();
        const auto result = sim::run_episode(tree, profile, budgets, rng, &trace);
        placed += result.placed ? 1 : 0;
        r.mean_time += result.final_state.elapsed_time;
        r.mean_risk += result.final_state.risk_sum;
        r.mean_fitness += cost(result, profile.geometry, weights).fitness();
        ++r.terminations[static_cast<std::size_t>(result.terminated_by)];
        for (auto id : trace) ++counts[id];
    }
    if (episodes > 0) {
        const double k = static_cast<double>(episodes);
        r.success_rate = static_cast<double>(placed) / k;
        r.mean_time /= k;
        r.mean_risk /= k;
        r.mean_fitness /= k;
    }
    for (std::size_t i = 0; i < counts.size(); ++i)
        if (counts[i] > 0) r.executions[profile.pool[i].id] = counts[i];
    return r;
}

// --- aggregation ---------------------------------------------------------------

struct CurvePoint {
    std::size_t generation = 0;
    double mean_best = 0.0;
    double std_best = 0.0;  // sample standard deviation, 0 for a single seed
    std::vector<double> per_seed;
};

/// Per-generation mean and sample standard deviation of best fitness.
inline std::vector<CurvePoint> aggregate(const std::vector<std::vector<gp::GenerationStats>>& histories) {
    if (histories.empty()) return {};
    const std::size_t len = histories.front().size();
    for (const auto& h : histories)
        if (h.size() != len)
            throw LengthMismatch("histories have " + std::to_string(len) + " and " + std::to_string(h.size()) +
                                 " generations");

    std::vector<CurvePoint> curve(len);
    const double k = static_cast<double>(histories.size());
    for (std::size_t g = 0; g < len; ++g) {
        CurvePoint& p = curve[g];
        p.generation = histories.front()[g].generation;
        double sum = 0.0;
        for (const auto& h : histories) {
            p.per_seed.push_back(h[g].best);
            sum += h[g].best;
        }
        p.mean_best = sum / k;
        if (histories.size() > 1) {
            double ss = 0.0;
            for (double v : p.per_seed) ss += (v - p.mean_best) * (v - p.mean_best);
            p.std_best = std::sqrt(ss / (k - 1.0));
        }
    }
    return curve;
}

} // namespace btgp::harness
