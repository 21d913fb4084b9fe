#pragma once

#include <optional>
#include <utility>

#include "btgp/bt/random_tree.hpp"
#include "btgp/gp/individual.hpp"

namespace btgp::gp {

// --- token splices ------------------------------------------------------------
// Plain edits with no validity checking; the operators below retry around them.

/// Swaps the subtree at token `i` of `a` with the subtree at token `j` of `b`.
inline std::pair<bt::Genotype, bt::Genotype> swap_subtrees(const bt::Genotype& a, std::size_t i,
                                                            const bt::Genotype& b, std::size_t j) {
    const bt::TokenRange sa = bt::subtree_span(a, i);
    const bt::TokenRange sb = bt::subtree_span(b, j);
    const auto& ta = a.tokens();
    const auto& tb = b.tokens();
    auto at = [](const std::vector<bt::Token>& t, std::size_t k) { return t.begin() + static_cast<std::ptrdiff_t>(k); };

    std::vector<bt::Token> ca(ta.begin(), at(ta, sa.first));
    ca.insert(ca.end(), at(tb, sb.first), at(tb, sb.last));
    ca.insert(ca.end(), at(ta, sa.last), ta.end());

    std::vector<bt::Token> cb(tb.begin(), at(tb, sb.first));
    cb.insert(cb.end(), at(ta, sa.first), at(ta, sa.last));
    cb.insert(cb.end(), at(tb, sb.last), tb.end());
    return {bt::Genotype(std::move(ca)), bt::Genotype(std::move(cb))};
}

/// Inserts `node` (a leaf token) at token position `pos`.
inline bt::Genotype insert_leaf(bt::Genotype g, std::size_t pos, bt::LeafId leaf) {
    auto& t = g.tokens();
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), bt::Token::make_leaf(leaf));
    return g;
}

/// Wraps the sibling run starting at token `pos` and spanning `count` sibling
/// subtrees into a new control node `open`.
inline bt::Genotype wrap_siblings(bt::Genotype g, std::size_t pos, std::size_t count, bt::Token open) {
    std::size_t end = pos;
    for (std::size_t k = 0; k < count; ++k) end = bt::subtree_span(g, end).last;
    auto& t = g.tokens();
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(end), bt::Token::close());
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(pos), open);
    return g;
}

/// Replaces the subtree at token `pos` by `replacement`.
inline bt::Genotype replace_subtree(bt::Genotype g, std::size_t pos, const std::vector<bt::Token>& replacement) {
    const bt::TokenRange span = bt::subtree_span(g, pos);
    auto& t = g.tokens();
    t.erase(t.begin() + static_cast<std::ptrdiff_t>(span.first), t.begin() + static_cast<std::ptrdiff_t>(span.last));
    t.insert(t.begin() + static_cast<std::ptrdiff_t>(span.first), replacement.begin(), replacement.end());
    return g;
}

inline bt::Genotype delete_subtree(bt::Genotype g, std::size_t pos) { return replace_subtree(std::move(g), pos, {}); }

// --- crossover ----------------------------------------------------------------

/// Subtree-swapping crossover. Crossover points are uniform over all nodes of
/// each parent, roots included. Points are re-drawn while an offspring breaks a
/// structural rule or the node cap, or both offspring are equal; after
/// kMaxOperatorAttempts the parents are returned unchanged.
inline std::pair<Individual, Individual> crossover(const Individual& p1, const Individual& p2,
                                                   const bt::LeafSet& leaves, std::size_t node_cap, Rng& rng) {
    const auto n1 = p1.genotype.node_positions();
    const auto n2 = p2.genotype.node_positions();
    for (std::size_t attempt = 0; attempt < bt::kMaxOperatorAttempts; ++attempt) {
        const std::size_t i = n1[uniform_index(rng, n1.size())];
        const std::size_t j = n2[uniform_index(rng, n2.size())];
        auto [c1, c2] = swap_subtrees(p1.genotype, i, p2.genotype, j);
        if (c1 == c2) continue;
        if (c1.node_count() > node_cap || c2.node_count() > node_cap) continue;
        if (!bt::is_valid(c1, leaves) || !bt::is_valid(c2, leaves)) continue;
        return {Individual{std::move(c1), std::nullopt, 0}, Individual{std::move(c2), std::nullopt, 0}};
    }
    return {Individual{p1.genotype, std::nullopt, 0}, Individual{p2.genotype, std::nullopt, 0}};
}

// --- mutation -----------------------------------------------------------------

enum class MutationKind : std::uint8_t { NodeMutation, NodeAddition, NodeDeletion };

namespace detail {

inline bt::Token random_control(Rng& rng) { return bernoulli(rng, 0.5) ? bt::Token::sequence() : bt::Token::fallback(); }

inline bt::LeafId random_leaf_id(const bt::LeafSet& leaves, Rng& rng) {
    return static_cast<bt::LeafId>(uniform_index(rng, leaves.size()));
}

/// A node is replaced by any node of the gene pool. A control keeps its
/// children when replaced by a control and loses them when replaced by a
/// leaf; a leaf replaced by a control becomes that control's only child.
inline std::optional<bt::Genotype> node_mutation(const bt::Genotype& g, const bt::LeafSet& leaves,
                                                 const GpParams& params, Rng& rng) {
    const auto nodes = g.node_positions();
    const std::size_t pos = nodes[uniform_index(rng, nodes.size())];
    const bt::Token target = g[pos];
    if (bernoulli(rng, params.p_control_node)) {
        const bt::Token open = random_control(rng);
        if (target.is_open()) {
            bt::Genotype out = g;
            out.tokens()[pos] = open;
            return out;
        }
        return wrap_siblings(g, pos, 1, open);
    }
    return replace_subtree(g, pos, {bt::Token::make_leaf(random_leaf_id(leaves, rng))});
}

/// A node of the gene pool is added at any level. A new leaf goes into any
/// child slot; a new control adopts a run of consecutive siblings (or the root).
inline std::optional<bt::Genotype> node_addition(const bt::Genotype& g, const bt::LeafSet& leaves,
                                                 const GpParams& params, Rng& rng) {
    if (bernoulli(rng, params.p_control_node)) {
        const auto nodes = g.node_positions();
        const std::size_t pos = nodes[uniform_index(rng, nodes.size())];
        std::size_t run = 1;
        if (pos != 0) {
            // Count the siblings from pos to the end of the parent.
            std::size_t siblings = 0;
            for (std::size_t k = pos; !g[k].is_close(); k = bt::subtree_span(g, k).last) ++siblings;
            run = 1 + uniform_index(rng, siblings);
        }
        return wrap_siblings(g, pos, run, random_control(rng));
    }
    const auto slots = bt::detail::insertion_slots(g.tokens());
    if (slots.empty()) {
        // A lone leaf has no child slot; the new leaf becomes its sibling
        // under a new root control.
        const bt::Token leaf = bt::Token::make_leaf(random_leaf_id(leaves, rng));
        const bool before = bernoulli(rng, 0.5);
        return bt::Genotype({random_control(rng), before ? leaf : g[0], before ? g[0] : leaf, bt::Token::close()});
    }
    const auto& slot = slots[uniform_index(rng, slots.size())];
    return insert_leaf(g, slot.position, random_leaf_id(leaves, rng));
}

/// Removes a non-root node together with its subtree.
inline std::optional<bt::Genotype> node_deletion(const bt::Genotype& g, Rng& rng) {
    const auto nodes = g.node_positions();
    if (nodes.size() < 2) return std::nullopt;
    const std::size_t pos = nodes[1 + uniform_index(rng, nodes.size() - 1)];
    return delete_subtree(g, pos);
}

inline MutationKind draw_kind(const GpParams& params, Rng& rng) {
    const double u = uniform01(rng);
    if (u < params.p_node_mutation) return MutationKind::NodeMutation;
    if (u < params.p_node_mutation + params.p_node_addition) return MutationKind::NodeAddition;
    return MutationKind::NodeDeletion;
}

} // namespace detail

inline std::optional<bt::Genotype> apply_mutation(MutationKind kind, const bt::Genotype& g, const bt::LeafSet& leaves,
                                                  const GpParams& params, Rng& rng) {
    switch (kind) {
        case MutationKind::NodeMutation: return detail::node_mutation(g, leaves, params, rng);
        case MutationKind::NodeAddition: return detail::node_addition(g, leaves, params, rng);
        case MutationKind::NodeDeletion: return detail::node_deletion(g, rng);
    }
    return std::nullopt;
}

/// Draws node mutation / addition / deletion with the configured
/// probabilities and applies it. Draws that are inapplicable, leave the
/// genotype unchanged, exceed the node cap or break a structural rule are
/// re-drawn; after kMaxOperatorAttempts the last candidate is repaired.
inline Individual mutate(const Individual& parent, const bt::LeafSet& leaves, const GpParams& params, Rng& rng) {
    if (leaves.empty()) throw PoolEmpty();
    std::optional<bt::Genotype> last;
    for (std::size_t attempt = 0; attempt < bt::kMaxOperatorAttempts; ++attempt) {
        auto child = apply_mutation(detail::draw_kind(params, rng), parent.genotype, leaves, params, rng);
        if (!child || *child == parent.genotype || child->node_count() > params.node_cap) continue;
        if (bt::is_valid(*child, leaves)) return Individual{std::move(*child), std::nullopt, 0};
        last = std::move(child);
    }
    bt::Genotype fallback = last ? std::move(*last) : parent.genotype;
    return Individual{bt::repair(std::move(fallback), leaves, bt::detail::first_action(leaves)), std::nullopt, 0};
}

} // namespace btgp::gp
