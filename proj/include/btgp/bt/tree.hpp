#pragma once

#include <concepts>
#include <cstdint>
#include <string>
#include <vector>

#include "btgp/bt/genotype.hpp"

namespace btgp::bt {

enum class NodeKind : std::uint8_t { Sequence, Fallback, Leaf };

/// One node of a BehaviorTree stored in depth-first order. The first child of
/// node `i` sits at `i + 1`; the next sibling of `i` at `i + subtree_size`.
struct Node {
    NodeKind kind = NodeKind::Leaf;
    LeafKind leaf_kind = LeafKind::Action;
    LeafId leaf = 0;
    std::uint32_t child_count = 0;
    std::uint32_t subtree_size = 1;  // in nodes, including this one
    std::uint32_t parent = npos;

    static constexpr std::uint32_t npos = UINT32_MAX;

    [[nodiscard]] bool is_control() const noexcept { return kind != NodeKind::Leaf; }
    [[nodiscard]] bool is_condition() const noexcept {
        return kind == NodeKind::Leaf && leaf_kind == LeafKind::Condition;
    }

    friend bool operator==(const Node& a, const Node& b) noexcept {
        return a.kind == b.kind && a.child_count == b.child_count && a.subtree_size == b.subtree_size &&
               (a.kind != NodeKind::Leaf || (a.leaf == b.leaf && a.leaf_kind == b.leaf_kind));
    }
};

/// Parsed behavior tree. Immutable after construction; cheap to tick.
class BehaviorTree {
public:
    BehaviorTree() = default;
    explicit BehaviorTree(std::vector<Node> nodes) : nodes_(std::move(nodes)) {}

    [[nodiscard]] const std::vector<Node>& nodes() const noexcept { return nodes_; }
    [[nodiscard]] const Node& node(std::size_t i) const { return nodes_[i]; }
    [[nodiscard]] const Node& root() const { return nodes_.front(); }
    [[nodiscard]] std::size_t node_count() const noexcept { return nodes_.size(); }
    [[nodiscard]] bool empty() const noexcept { return nodes_.empty(); }

    /// Indices of the children of node `i`, in order.
    [[nodiscard]] std::vector<std::size_t> children(std::size_t i) const {
        std::vector<std::size_t> out;
        out.reserve(nodes_[i].child_count);
        std::size_t c = i + 1;
        for (std::uint32_t k = 0; k < nodes_[i].child_count; ++k) {
            out.push_back(c);
            c += nodes_[c].subtree_size;
        }
        return out;
    }

    friend bool operator==(const BehaviorTree&, const BehaviorTree&) = default;

private:
    std::vector<Node> nodes_;
};

/// Builds the tree for `g`. Throws MalformedGenotype on an empty or
/// unbalanced sequence or a leaf id outside `leaves`.
inline BehaviorTree parse(const Genotype& g, const LeafSet& leaves) {
    const auto& tokens = g.tokens();
    if (tokens.empty()) throw MalformedGenotype("empty token sequence");
    if (!is_well_formed(tokens)) throw MalformedGenotype("unbalanced or trailing tokens");

    std::vector<Node> nodes;
    nodes.reserve(tokens.size());
    std::vector<std::uint32_t> open;  // node indices of unclosed controls
    for (const auto& t : tokens) {
        if (t.is_close()) {
            const auto idx = open.back();
            open.pop_back();
            nodes[idx].subtree_size = static_cast<std::uint32_t>(nodes.size() - idx);
            continue;
        }
        Node n;
        if (t.is_leaf()) {
            if (t.leaf >= leaves.size()) throw MalformedGenotype("unknown leaf id " + std::to_string(t.leaf));
            n.kind = NodeKind::Leaf;
            n.leaf = t.leaf;
            n.leaf_kind = leaves.kind(t.leaf);
        } else {
            n.kind = t.kind == TokenKind::SequenceOpen ? NodeKind::Sequence : NodeKind::Fallback;
        }
        if (!open.empty()) {
            n.parent = open.back();
            ++nodes[open.back()].child_count;
        }
        nodes.push_back(n);
        if (t.is_open()) open.push_back(static_cast<std::uint32_t>(nodes.size() - 1));
    }
    return BehaviorTree(std::move(nodes));
}

inline BehaviorTree parse_text(std::string_view text, const LeafSet& leaves) {
    return parse(from_text(text, leaves), leaves);
}

inline Genotype serialize(const BehaviorTree& tree) {
    std::vector<Token> tokens;
    tokens.reserve(tree.node_count() * 2);
    std::vector<std::size_t> ends;  // node index at which each open control ends
    const auto& nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        while (!ends.empty() && ends.back() == i) {
            tokens.push_back(Token::close());
            ends.pop_back();
        }
        const Node& n = nodes[i];
        switch (n.kind) {
            case NodeKind::Sequence: tokens.push_back(Token::sequence()); break;
            case NodeKind::Fallback: tokens.push_back(Token::fallback()); break;
            case NodeKind::Leaf: tokens.push_back(Token::make_leaf(n.leaf)); break;
        }
        if (n.is_control()) ends.push_back(i + n.subtree_size);
    }
    while (!ends.empty()) {
        tokens.push_back(Token::close());
        ends.pop_back();
    }
    return Genotype(std::move(tokens));
}

// --- execution ---------------------------------------------------------------

/// Anything leaves can be delegated to.
template <class W>
concept TickWorld = requires(W& w, LeafId id) {
    { w.execute(id) } -> std::same_as<TickStatus>;
};

namespace detail {

template <TickWorld World>
TickStatus tick_node(const std::vector<Node>& nodes, std::size_t i, World& world) {
    const Node& n = nodes[i];
    if (n.kind == NodeKind::Leaf) return world.execute(n.leaf);

    // Sequence stops on the first non-Success, Fallback on the first non-Failure.
    const TickStatus pass = n.kind == NodeKind::Sequence ? TickStatus::Success : TickStatus::Failure;
    std::size_t c = i + 1;
    for (std::uint32_t k = 0; k < n.child_count; ++k) {
        const TickStatus s = tick_node(nodes, c, world);
        if (s != pass) return s;
        c += nodes[c].subtree_size;
    }
    return pass;
}

} // namespace detail

/// One memoryless tick from the root. Every visited leaf is executed exactly
/// once through `world`.
template <TickWorld World>
TickStatus tick(const BehaviorTree& tree, World& world) {
    if (tree.empty()) throw MalformedGenotype("ticking an empty tree");
    return detail::tick_node(tree.nodes(), 0, world);
}

inline const char* to_string(TickStatus s) noexcept {
    switch (s) {
        case TickStatus::Success: return "Success";
        case TickStatus::Failure: return "Failure";
        case TickStatus::Running: return "Running";
    }
    return "?";
}

} // namespace btgp::bt
