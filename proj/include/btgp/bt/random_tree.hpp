#pragma once

#include "btgp/bt/validate.hpp"
#include "btgp/random.hpp"

namespace btgp::bt {

inline constexpr std::size_t kMaxOperatorAttempts = 100;

namespace detail {

/// Insertion slots of a genotype: token positions at which a new child may
/// be inserted, with the kind of the owning control.
struct Slot {
    std::size_t position;
    TokenKind parent_kind;
    bool parent_childless;
};

inline std::vector<Slot> insertion_slots(const std::vector<Token>& tokens) {
    std::vector<Slot> slots;
    std::vector<std::size_t> open;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        const Token& t = tokens[i];
        if (t.is_close()) {
            const std::size_t owner = open.back();
            open.pop_back();
            slots.push_back({i, tokens[owner].kind, owner + 1 == i});
        }
        // A slot just before every child.
        if (!open.empty() && !t.is_close()) slots.push_back({i, tokens[open.back()].kind, false});
        if (t.is_open()) open.push_back(i);
    }
    return slots;
}

inline Token random_leaf(const LeafSet& leaves, Rng& rng) {
    return Token::make_leaf(static_cast<LeafId>(uniform_index(rng, leaves.size())));
}

inline Token opposite_open(TokenKind k) noexcept {
    return k == TokenKind::SequenceOpen ? Token::fallback() : Token::sequence();
}

inline Genotype grow(const LeafSet& leaves, std::size_t length, Rng& rng) {
    if (length == 1) return Genotype({random_leaf(leaves, rng)});

    std::vector<Token> tokens{bernoulli(rng, 0.5) ? Token::sequence() : Token::fallback(), Token::close()};
    std::size_t childless = 1;
    for (std::size_t remaining = length - 1; remaining > 0; --remaining) {
        const auto slots = insertion_slots(tokens);
        std::vector<Slot> choices;
        if (remaining == childless) {
            for (const auto& s : slots)
                if (s.parent_childless) choices.push_back(s);
        } else {
            choices = slots;
        }
        const Slot slot = choices[uniform_index(rng, choices.size())];
        const std::size_t childless_after_leaf = childless - (slot.parent_childless ? 1 : 0);
        // A new control needs at least one of the nodes still to be placed.
        const bool control_fits = remaining - 1 >= childless_after_leaf + 1;
        const auto at = tokens.begin() + static_cast<std::ptrdiff_t>(slot.position);
        if (control_fits && bernoulli(rng, 0.5)) {
            const Token open = opposite_open(slot.parent_kind);
            tokens.insert(at, {open, Token::close()});
            childless = childless_after_leaf + 1;
        } else {
            tokens.insert(at, random_leaf(leaves, rng));
            childless = childless_after_leaf;
        }
    }
    return Genotype(std::move(tokens));
}

inline LeafId first_action(const LeafSet& leaves) {
    for (std::size_t i = 0; i < leaves.size(); ++i)
        if (leaves.kind(static_cast<LeafId>(i)) == LeafKind::Action) return static_cast<LeafId>(i);
    return 0;
}

} // namespace detail

/// Random valid genotype with `length` nodes. Control nodes are picked with
/// probability 1/2 wherever one still fits. Invalid draws are resampled; after
/// kMaxOperatorAttempts the last draw is repaired by node deletion.
inline Genotype random_genotype(const LeafSet& leaves, std::size_t length, Rng& rng) {
    if (leaves.empty()) throw PoolEmpty();
    if (length == 0) throw ConfigError("random genotype length must be at least 1");
    Genotype g;
    for (std::size_t attempt = 0; attempt < kMaxOperatorAttempts; ++attempt) {
        g = detail::grow(leaves, length, rng);
        if (is_valid(g, leaves)) return g;
    }
    return repair(std::move(g), leaves, detail::first_action(leaves));
}

} // namespace btgp::bt
