#pragma once

#include <algorithm>
#include <numeric>
#include <vector>

#include "btgp/gp/individual.hpp"
#include "btgp/random.hpp"

namespace btgp::gp {

/// Tournament selection by single duels. Each round shuffles the remaining
/// candidates, pairs them up front to back and drops the loser of just enough
/// duels to reach `slots` (or of every duel, if that is not enough). Ties are
/// broken uniformly. The worst remaining candidate is always put in a duel,
/// so with slots < candidates the best always survives and the worst never
/// does. Returns indices into `scores`, in selection order.
inline std::vector<std::size_t> tournament_indices(const std::vector<double>& scores, std::size_t slots, Rng& rng) {
    if (slots > scores.size()) throw SlotsExceedCandidates(slots, scores.size());
    std::vector<std::size_t> alive(scores.size());
    std::iota(alive.begin(), alive.end(), std::size_t{0});

    while (alive.size() > slots) {
        shuffle(std::span<std::size_t>(alive), rng);
        // Worst first so it meets an opponent this round. Among tied worst the
        // first in shuffled order is taken, which is a uniform pick.
        const auto worst = std::min_element(alive.begin(), alive.end(),
                                            [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });
        std::iter_swap(alive.begin(), worst);

        const std::size_t duels = std::min(alive.size() - slots, alive.size() / 2);
        std::vector<std::size_t> next;
        next.reserve(alive.size() - duels);
        for (std::size_t d = 0; d < duels; ++d) {
            const std::size_t a = alive[2 * d];
            const std::size_t b = alive[2 * d + 1];
            if (scores[a] > scores[b]) next.push_back(a);
            else if (scores[b] > scores[a]) next.push_back(b);
            else next.push_back(bernoulli(rng, 0.5) ? a : b);
        }
        next.insert(next.end(), alive.begin() + static_cast<std::ptrdiff_t>(2 * duels), alive.end());
        alive = std::move(next);
    }
    return alive;
}

/// Survivor selection by independent single duels. Each slot is filled by a
/// duel between two distinct candidates drawn uniformly from those not yet
/// selected; the fitter is selected (ties broken uniformly) and the loser
/// stays in the pool. Selection pressure is one duel per slot whatever the
/// candidate count, and with slots < candidates the worst never survives.
/// Returns indices into `scores`, in selection order.
inline std::vector<std::size_t> duel_indices(const std::vector<double>& scores, std::size_t slots, Rng& rng) {
    if (slots > scores.size()) throw SlotsExceedCandidates(slots, scores.size());
    std::vector<std::size_t> pool(scores.size());
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    if (slots == scores.size()) return pool;

    std::vector<std::size_t> out;
    out.reserve(slots);
    while (out.size() < slots) {
        // pool.size() >= 2 here because slots < candidates.
        const std::size_t i = uniform_index(rng, pool.size());
        std::size_t j = uniform_index(rng, pool.size() - 1);
        if (j >= i) ++j;
        const std::size_t a = pool[i];
        const std::size_t b = pool[j];
        const bool a_wins = scores[a] > scores[b] || (scores[a] == scores[b] && bernoulli(rng, 0.5));
        const std::size_t winner_slot = a_wins ? i : j;
        out.push_back(pool[winner_slot]);
        pool[winner_slot] = pool.back();
        pool.pop_back();
    }
    return out;
}

inline std::vector<Individual> tournament(const std::vector<Individual>& candidates, std::size_t slots, Rng& rng) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) scores.push_back(c.score());
    std::vector<Individual> out;
    out.reserve(slots);
    for (std::size_t i : tournament_indices(scores, slots, rng)) out.push_back(candidates[i]);
    return out;
}

inline std::vector<Individual> duel_selection(std::vector<Individual> candidates, std::size_t slots, Rng& rng) {
    std::vector<double> scores;
    scores.reserve(candidates.size());
    for (const auto& c : candidates) scores.push_back(c.score());
    std::vector<Individual> out;
    out.reserve(slots);
    for (std::size_t i : duel_indices(scores, slots, rng)) out.push_back(std::move(candidates[i]));
    return out;
}

} // namespace btgp::gp
