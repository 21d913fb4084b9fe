#pragma once

#include <string>
#include <vector>

#include "btgp/bt/tree.hpp"

namespace btgp::bt {

/// The structural rules every individual must satisfy. None of the
/// forbidden shapes can change what a tree does when ticked.
enum class Rule : std::uint8_t {
    SameKindNesting,       // control node whose parent control has the same kind
    ConditionLast,         // condition as the last child of a control node
    EmptyControl,          // control node without children
    AdjacentConditions,    // two identical conditions next to each other
};

inline const char* to_string(Rule r) noexcept {
    switch (r) {
        case Rule::SameKindNesting: return "same-kind-nesting";
        case Rule::ConditionLast: return "condition-last";
        case Rule::EmptyControl: return "empty-control";
        case Rule::AdjacentConditions: return "adjacent-conditions";
    }
    return "?";
}

struct Violation {
    Rule rule;
    std::size_t node;  // depth-first node index of the offending node
    friend bool operator==(const Violation&, const Violation&) = default;
};

struct ValidityReport {
    std::vector<Violation> violations;
    [[nodiscard]] bool valid() const noexcept { return violations.empty(); }
    explicit operator bool() const noexcept { return valid(); }

    [[nodiscard]] bool has(Rule r) const noexcept {
        for (const auto& v : violations)
            if (v.rule == r) return true;
        return false;
    }
};

inline ValidityReport check(const BehaviorTree& tree) {
    ValidityReport report;
    const auto& nodes = tree.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Node& n = nodes[i];
        if (!n.is_control()) continue;
        if (n.child_count == 0) report.violations.push_back({Rule::EmptyControl, i});

        std::size_t prev = Node::npos;
        std::size_t c = i + 1;
        for (std::uint32_t k = 0; k < n.child_count; ++k) {
            const Node& child = nodes[c];
            if (child.is_control() && child.kind == n.kind) report.violations.push_back({Rule::SameKindNesting, c});
            if (child.is_condition()) {
                if (k + 1 == n.child_count) report.violations.push_back({Rule::ConditionLast, c});
                if (prev != Node::npos && nodes[prev].is_condition() && nodes[prev].leaf == child.leaf)
                    report.violations.push_back({Rule::AdjacentConditions, c});
            }
            prev = c;
            c += child.subtree_size;
        }
    }
    return report;
}

/// Structural check of a genotype. Parse errors propagate.
inline ValidityReport check(const Genotype& g, const LeafSet& leaves) { return check(parse(g, leaves)); }

inline bool is_valid(const Genotype& g, const LeafSet& leaves) { return check(g, leaves).valid(); }

/// Deletes offending nodes until the genotype satisfies every rule. A
/// same-kind nested control is dissolved into its parent, which keeps its
/// children. May shrink the tree down to a single leaf; an empty result is
/// replaced by `fallback_leaf`.
inline Genotype repair(Genotype g, const LeafSet& leaves, LeafId fallback_leaf) {
    for (;;) {
        if (g.empty()) return Genotype({Token::make_leaf(fallback_leaf)});
        const BehaviorTree tree = parse(g, leaves);
        const ValidityReport report = check(tree);
        if (report.valid()) return g;

        // Map the first violating node back to its token span.
        const Violation& v = report.violations.front();
        const auto positions = g.node_positions();
        const std::size_t at = positions[v.node];
        const TokenRange span = subtree_span(g, at);
        auto& tokens = g.tokens();
        if (v.rule == Rule::SameKindNesting) {
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(span.last - 1));
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(span.first));
        } else {
            tokens.erase(tokens.begin() + static_cast<std::ptrdiff_t>(span.first),
                         tokens.begin() + static_cast<std::ptrdiff_t>(span.last));
        }
    }
}

} // namespace btgp::bt
