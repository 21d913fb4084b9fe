#pragma once

#include <algorithm>
#include <atomic>
#include <functional>
#include <numeric>
#include <sstream>
#include <thread>
#include <vector>

#include "btgp/gp/operators.hpp"
#include "btgp/gp/selection.hpp"

namespace btgp::gp {

/// Scores one genotype using the supplied stream. Must be safe to call
/// concurrently with distinct streams.
using Evaluator = std::function<FitnessValue(const bt::Genotype&, Rng&)>;

struct GenerationStats {
    std::size_t generation = 0;
    double best = 0.0;
    double mean = 0.0;
    bt::Genotype best_genotype;
    std::size_t episodes = 0;        // consumed by this generation
    std::size_t total_episodes = 0;  // consumed so far, this generation included
};

/// Everything needed to continue a run bit-identically.
struct EngineState {
    std::size_t generation = 0;
    std::vector<Individual> population;
    std::vector<GenerationStats> history;
    std::string rng_state;
};

/// Evaluates `batch` in place, folding the result into any cached mean.
/// Individual k uses a stream derived from (seed, stream_base, k), so any
/// number of threads gives the same result.
inline void evaluate_batch(std::vector<Individual*>& batch, const Evaluator& evaluator, std::uint64_t seed,
                           std::uint64_t stream_base, std::size_t threads) {
    auto work = [&](std::size_t k) {
        Rng rng(derive_seed(seed, stream_base, k));
        Individual& ind = *batch[k];
        const FitnessValue v = evaluator(ind.genotype, rng);
        if (!ind.fitness) ind.fitness = FitnessValue{};
        fold_mean(*ind.fitness, v, ++ind.evaluations);
    };
    threads = std::max<std::size_t>(1, std::min(threads, batch.size()));
    if (threads == 1) {
        for (std::size_t k = 0; k < batch.size(); ++k) work(k);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t k = next++; k < batch.size(); k = next++) work(k);
        });
}

/// The evolutionary loop: tournament-selected parents produce 2N offspring
/// by crossover and mutation, the top elites carry over and single duels
/// over the remaining parents and offspring fill the other slots.
class Engine {
public:
    static constexpr std::size_t kDuplicateRetries = 20;

    Engine(GpParams params, bt::LeafSet leaves, Evaluator evaluator)
        : params_(std::move(params)), leaves_(std::move(leaves)), evaluator_(std::move(evaluator)),
          rng_(params_.seed) {
        params_.validate();
        if (leaves_.empty()) throw PoolEmpty();
    }

    [[nodiscard]] const GpParams& params() const noexcept { return params_; }
    [[nodiscard]] const bt::LeafSet& leaves() const noexcept { return leaves_; }
    [[nodiscard]] const std::vector<Individual>& population() const noexcept { return population_; }
    [[nodiscard]] const std::vector<GenerationStats>& history() const noexcept { return history_; }
    [[nodiscard]] std::size_t generation() const noexcept { return generation_; }
    [[nodiscard]] bool initialized() const noexcept { return !population_.empty(); }

    /// Random population of start_length-node genotypes, evaluated.
    const GenerationStats& initialize() {
        population_.clear();
        history_.clear();
        generation_ = 0;
        for (std::size_t i = 0; i < params_.population; ++i)
            population_.push_back({bt::random_genotype(leaves_, params_.start_length, rng_), std::nullopt, 0});
        std::vector<Individual*> batch;
        for (auto& ind : population_) batch.push_back(&ind);
        evaluate_batch(batch, evaluator_, params_.seed, stream_id(0, 0), params_.threads);
        record(batch.size() * params_.episodes_per_eval);
        return history_.back();
    }

    /// Offspring produced by one generation, before evaluation. Offspring are
    /// re-drawn (a bounded number of times) while they copy a member of the
    /// population or an earlier offspring.
    std::vector<Individual> breed() {
        const std::size_t n = population_.size();
        std::vector<Individual> offspring;
        auto known = [&](const bt::Genotype& g) {
            for (const auto& ind : population_)
                if (ind.genotype == g) return true;
            for (const auto& ind : offspring)
                if (ind.genotype == g) return true;
            return false;
        };

        auto crossover_parents = tournament(population_, slots_for(n, params_.crossover_fraction), rng_);
        shuffle(std::span<Individual>(crossover_parents), rng_);
        for (std::size_t p = 0; p + 1 < crossover_parents.size(); p += 2) {
            const Individual& a = crossover_parents[p];
            const Individual& b = crossover_parents[p + 1];
            for (int round = 0; round < 2; ++round) {
                std::pair<Individual, Individual> kids;
                for (std::size_t attempt = 0; attempt < kDuplicateRetries; ++attempt) {
                    kids = crossover(a, b, leaves_, params_.node_cap, rng_);
                    if (!known(kids.first.genotype) && !known(kids.second.genotype)) break;
                }
                // Identical or exhausted parents: mutate the copies instead.
                for (Individual* kid : {&kids.first, &kids.second}) {
                    for (std::size_t attempt = 0; attempt < kDuplicateRetries && known(kid->genotype); ++attempt)
                        *kid = mutate(*kid, leaves_, params_, rng_);
                    offspring.push_back(std::move(*kid));
                }
            }
        }

        const auto mutation_parents = tournament(population_, slots_for(n, params_.mutation_fraction), rng_);
        for (const auto& parent : mutation_parents) {
            for (int k = 0; k < 2; ++k) {
                Individual child = mutate(parent, leaves_, params_, rng_);
                for (std::size_t attempt = 1; attempt < kDuplicateRetries && known(child.genotype); ++attempt)
                    child = mutate(parent, leaves_, params_, rng_);
                offspring.push_back(std::move(child));
            }
        }
        return offspring;
    }

    /// One generation. The population must have been initialized.
    const GenerationStats& step() {
        if (!initialized()) initialize();
        const std::size_t g = generation_ + 1;
        const std::size_t n = population_.size();

        std::vector<Individual> offspring = breed();
        std::vector<Individual*> batch;
        for (auto& child : offspring) {
            child.birth_generation = g;
            batch.push_back(&child);
        }
        evaluate_batch(batch, evaluator_, params_.seed, stream_id(g, 0), params_.threads);
        std::size_t evaluations = batch.size();

        std::vector<Individual> everyone = std::move(population_);
        everyone.insert(everyone.end(), std::make_move_iterator(offspring.begin()),
                        std::make_move_iterator(offspring.end()));

        // Elites: highest fitness, earlier index first among equals.
        std::vector<std::size_t> order(everyone.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [&](std::size_t a, std::size_t b) { return everyone[a].score() > everyone[b].score(); });
        const std::size_t elite_count = std::min(slots_for(n, params_.elitism_fraction), n);

        std::vector<Individual> next;
        next.reserve(n);
        std::vector<bool> taken(everyone.size(), false);
        for (std::size_t e = 0; e < elite_count; ++e) {
            next.push_back(everyone[order[e]]);
            taken[order[e]] = true;
        }
        std::vector<Individual> rest;
        rest.reserve(everyone.size() - elite_count);
        for (std::size_t i = 0; i < everyone.size(); ++i)
            if (!taken[i]) rest.push_back(std::move(everyone[i]));
        for (auto& survivor : duel_selection(std::move(rest), n - elite_count, rng_)) next.push_back(std::move(survivor));

        if (params_.reevaluate != Reevaluation::None) {
            std::vector<Individual*> again;
            for (std::size_t i = 0; i < next.size(); ++i) {
                const bool elite = i < elite_count;
                const bool carried = next[i].birth_generation < g;
                if (carried && (elite || params_.reevaluate == Reevaluation::Survivors)) again.push_back(&next[i]);
            }
            evaluate_batch(again, evaluator_, params_.seed, stream_id(g, 1), params_.threads);
            evaluations += again.size();
        }

        population_ = std::move(next);
        generation_ = g;
        record(evaluations * params_.episodes_per_eval);
        return history_.back();
    }

    /// Runs until `params.generations` generations exist or early stopping
    /// triggers. Resumes where a restored state left off.
    void run(const std::function<void(const Engine&)>& on_generation = {}) {
        if (!initialized()) {
            initialize();
            if (on_generation) on_generation(*this);
        }
        while (generation_ < params_.generations && !should_stop()) {
            step();
            if (on_generation) on_generation(*this);
        }
    }

    [[nodiscard]] const Individual& best() const {
        return *std::max_element(population_.begin(), population_.end(),
                                 [](const Individual& a, const Individual& b) { return a.score() < b.score(); });
    }

    [[nodiscard]] EngineState snapshot() const {
        std::ostringstream rng;
        rng << rng_;
        return {generation_, population_, history_, rng.str()};
    }

    void restore(const EngineState& state) {
        generation_ = state.generation;
        population_ = state.population;
        history_ = state.history;
        std::istringstream rng(state.rng_state);
        rng >> rng_;
        if (!rng) throw ConfigError("corrupt rng state in checkpoint");
    }

private:
    static std::uint64_t stream_id(std::size_t generation, std::uint64_t purpose) noexcept {
        return (static_cast<std::uint64_t>(generation) << 2) | purpose;
    }

    [[nodiscard]] bool should_stop() const {
        const std::size_t w = params_.early_stop_window;
        if (w == 0 || history_.size() <= w) return false;
        return history_.back().best <= history_[history_.size() - 1 - w].best;
    }

    void record(std::size_t episodes) {
        GenerationStats s;
        s.generation = generation_;
        double sum = 0.0;
        const Individual* top = &population_.front();
        for (const auto& ind : population_) {
            sum += ind.score();
            if (ind.score() > top->score()) top = &ind;
        }
        s.best = top->score();
        s.mean = sum / static_cast<double>(population_.size());
        s.best_genotype = top->genotype;
        s.episodes = episodes;
        s.total_episodes = (history_.empty() ? 0 : history_.back().total_episodes) + episodes;
        history_.push_back(std::move(s));
    }

    GpParams params_;
    bt::LeafSet leaves_;
    Evaluator evaluator_;
    Rng rng_;
    std::vector<Individual> population_;
    std::vector<GenerationStats> history_;
    std::size_t generation_ = 0;
};

} // namespace btgp::gp
