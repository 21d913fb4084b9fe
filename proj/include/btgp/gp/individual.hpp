#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include "btgp/bt/genotype.hpp"
#include "btgp/fitness.hpp"

namespace btgp::gp {

/// Which carried-over individuals get a fresh evaluation each generation.
/// Fresh samples are folded into the cached mean.
enum class Reevaluation : std::uint8_t { None, Elites, Survivors };

inline const char* to_string(Reevaluation r) noexcept {
    switch (r) {
        case Reevaluation::None: return "none";
        case Reevaluation::Elites: return "elites";
        case Reevaluation::Survivors: return "survivors";
    }
    return "?";
}

inline Reevaluation reevaluation_from_string(const std::string& s) {
    if (s == "none") return Reevaluation::None;
    if (s == "elites") return Reevaluation::Elites;
    if (s == "survivors") return Reevaluation::Survivors;
    throw ConfigError("unknown re-evaluation mode '" + s + "'");
}

/// Defaults: N = 30, start length 4, 8000 generations.
struct GpParams {
    std::size_t population = 30;
    std::size_t start_length = 4;
    std::size_t generations = 8000;
    double crossover_fraction = 0.40;
    double mutation_fraction = 0.60;
    double elitism_fraction = 0.10;
    double p_node_mutation = 0.30;
    double p_node_addition = 0.40;
    double p_node_deletion = 0.30;
    double p_control_node = 0.50;
    std::size_t episodes_per_eval = 1;
    std::size_t node_cap = 64;
    std::uint64_t seed = 0;
    Reevaluation reevaluate = Reevaluation::Survivors;
    std::size_t early_stop_window = 0;  // generations without improvement; 0 = off
    std::size_t threads = 1;

    void validate() const {
        auto fraction = [](double f, const char* what) {
            if (!(f >= 0.0 && f <= 1.0)) throw ConfigError(std::string(what) + " must lie in [0,1]");
        };
        fraction(crossover_fraction, "crossover_fraction");
        fraction(mutation_fraction, "mutation_fraction");
        fraction(elitism_fraction, "elitism_fraction");
        fraction(p_node_mutation, "p_node_mutation");
        fraction(p_node_addition, "p_node_addition");
        fraction(p_node_deletion, "p_node_deletion");
        fraction(p_control_node, "p_control_node");
        const double sum = p_node_mutation + p_node_addition + p_node_deletion;
        if (sum < 1.0 - 1e-12 || sum > 1.0 + 1e-12) throw ConfigError("mutation operator probabilities must sum to 1");
        if (population < 2) throw ConfigError("population must be at least 2");
        if (start_length == 0 || start_length > node_cap) throw ConfigError("start_length must lie in [1, node_cap]");
        if (episodes_per_eval == 0) throw ConfigError("episodes_per_eval must be at least 1");
    }
};

/// round-half-up of n * fraction
inline std::size_t slots_for(std::size_t n, double fraction) noexcept {
    return static_cast<std::size_t>(static_cast<double>(n) * fraction + 0.5);
}

struct Individual {
    bt::Genotype genotype;
    std::optional<FitnessValue> fitness;  // mean over `evaluations` evaluations
    std::size_t birth_generation = 0;
    std::size_t evaluations = 0;

    [[nodiscard]] bool evaluated() const noexcept { return fitness.has_value(); }

    /// Cached fitness J; the individual must have been evaluated.
    [[nodiscard]] double score() const {
        if (!fitness) throw std::logic_error("individual has not been evaluated");
        return fitness->fitness();
    }
};

} // namespace btgp::gp
