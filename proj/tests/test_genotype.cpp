#include <gtest/gtest.h>

#include <functional>
#include <set>

#include "btgp/bt/random_tree.hpp"
#include "support/enumerate.hpp"
#include "support/oracles.hpp"

using namespace btgp;
using namespace btgp::bt;

namespace {

LeafSet letters() {
    return LeafSet({{"a", LeafKind::Action},
                    {"b", LeafKind::Action},
                    {"c", LeafKind::Action},
                    {"pick", LeafKind::Action},
                    {"place", LeafKind::Action},
                    {"move_pick", LeafKind::Action},
                    {"have_block", LeafKind::Condition},
                    {"other_cond", LeafKind::Condition}});
}

Genotype g(const std::string& text) { return from_text(text, letters()); }

// Compares the library tree against the recursive-descent oracle.
void expect_same_shape(const BehaviorTree& tree, std::size_t i, const oracle::TextNode& ref, const LeafSet& leaves) {
    const Node& n = tree.node(i);
    if (ref.label == "s") EXPECT_EQ(n.kind, NodeKind::Sequence);
    else if (ref.label == "f") EXPECT_EQ(n.kind, NodeKind::Fallback);
    else {
        ASSERT_EQ(n.kind, NodeKind::Leaf);
        EXPECT_EQ(leaves.name(n.leaf), ref.label);
    }
    ASSERT_EQ(n.child_count, ref.children.size());
    const auto kids = tree.children(i);
    for (std::size_t k = 0; k < kids.size(); ++k) expect_same_shape(tree, kids[k], *ref.children[k], leaves);
}

/// Scripted world: each leaf returns a fixed status and executions are counted.
struct StubWorld {
    std::vector<TickStatus> status;
    std::vector<int> executed;
    TickStatus execute(LeafId id) {
        ++executed[id];
        return status[id];
    }
};

} // namespace

TEST(Genotype, ParsesSequenceOfTwoActions) {
    const auto tree = parse(g("s( pick place )"), letters());
    ASSERT_EQ(tree.node_count(), 3u);
    EXPECT_EQ(tree.root().kind, NodeKind::Sequence);
    EXPECT_EQ(tree.root().child_count, 2u);
    EXPECT_EQ(letters().name(tree.node(1).leaf), "pick");
    EXPECT_EQ(letters().name(tree.node(2).leaf), "place");
}

TEST(Genotype, SingleConditionLeaf) {
    const auto tree = parse(g("have_block"), letters());
    ASSERT_EQ(tree.node_count(), 1u);
    EXPECT_TRUE(tree.root().is_condition());
}

TEST(Genotype, NestedTreeMatchesRecursiveDescentOracle) {
    for (const char* text : {"f( have_block s( move_pick pick ) )", "s( a f( b s( c pick ) have_block a ) place )",
                             "f( s( a ) s( b c ) )"}) {
        const auto tree = parse(g(text), letters());
        const auto ref = oracle::read_text_tree(text);
        EXPECT_EQ(tree.node_count(), ref->count()) << text;
        expect_same_shape(tree, 0, *ref, letters());
    }
}

TEST(Genotype, SerializeInvertsParse) {
    for (const char* text : {"s( pick place )", "have_block", "f( have_block s( move_pick pick ) )"}) {
        const Genotype x = g(text);
        EXPECT_EQ(serialize(parse(x, letters())), x) << text;
        EXPECT_EQ(to_text(x, letters()), text);
    }
    EXPECT_EQ(g("f( have_block s( move_pick pick ) )").size(), 7u);
    EXPECT_EQ(g("have_block").size(), 1u);
}

TEST(Genotype, MalformedInputsThrow) {
    EXPECT_THROW(parse(Genotype{}, letters()), MalformedGenotype);
    EXPECT_THROW(parse(g("s( a"), letters()), MalformedGenotype);
    EXPECT_THROW(parse(g("a )"), letters()), MalformedGenotype);
    EXPECT_THROW(parse(g("a b"), letters()), MalformedGenotype);
    EXPECT_THROW(from_text("s( nope )", letters()), MalformedGenotype);
    EXPECT_THROW(parse(Genotype({Token::make_leaf(99)}), letters()), MalformedGenotype);
}

TEST(Genotype, SubtreeSpanMatchesReparsedSlice) {
    const Genotype x = g("s( a f( b s( c pick ) have_block a ) place )");
    EXPECT_EQ(subtree_span(x, 1), (TokenRange{1, 2}));
    EXPECT_EQ(subtree_span(x, 0), (TokenRange{0, x.size()}));
    for (std::size_t i : x.node_positions()) {
        const TokenRange r = subtree_span(x, i);
        const Genotype slice(std::vector<Token>(x.tokens().begin() + static_cast<std::ptrdiff_t>(r.first),
                                                x.tokens().begin() + static_cast<std::ptrdiff_t>(r.last)));
        const auto whole = parse(x, letters());
        const std::size_t node = static_cast<std::size_t>(
            std::count_if(x.tokens().begin(), x.tokens().begin() + static_cast<std::ptrdiff_t>(i),
                          [](const Token& t) { return !t.is_close(); }));
        EXPECT_EQ(parse(slice, letters()).node_count(), whole.node(node).subtree_size);
    }
    EXPECT_THROW(subtree_span(x, x.size() - 1), IndexOutOfRange);
}

TEST(Tick, SequenceAndFallbackSemantics) {
    const LeafSet leaves({{"ok", LeafKind::Action}, {"no", LeafKind::Action}, {"x", LeafKind::Action}});
    StubWorld w{{TickStatus::Success, TickStatus::Failure, TickStatus::Running}, {0, 0, 0}};
    EXPECT_EQ(tick(parse_text("s( ok ok )", leaves), w), TickStatus::Success);
    EXPECT_EQ(tick(parse_text("f( no no )", leaves), w), TickStatus::Failure);

    w.executed = {0, 0, 0};
    EXPECT_EQ(tick(parse_text("s( no x )", leaves), w), TickStatus::Failure);
    EXPECT_EQ(w.executed[2], 0);

    w.executed = {0, 0, 0};
    EXPECT_EQ(tick(parse_text("f( x ok )", leaves), w), TickStatus::Running);
    EXPECT_EQ(w.executed[1], 0);
}

TEST(Tick, FallbackRunsSequenceWhenConditionFails) {
    const LeafSet leaves({{"have_block", LeafKind::Condition}, {"pick", LeafKind::Action}});
    StubWorld w{{TickStatus::Failure, TickStatus::Success}, {0, 0}};
    EXPECT_EQ(tick(parse_text("f( have_block s( pick ) )", leaves), w), TickStatus::Success);
    EXPECT_EQ(w.executed[1], 1);
}

TEST(Validate, EachRuleIsDetected) {
    const LeafSet l = letters();
    const auto v1 = check(g("s( s( a b ) c )"), l);
    EXPECT_TRUE(v1.has(Rule::SameKindNesting));
    EXPECT_FALSE(v1.valid());
    EXPECT_TRUE(check(g("s( a have_block )"), l).has(Rule::ConditionLast));
    EXPECT_TRUE(check(Genotype({Token::sequence(), Token::close()}), l).has(Rule::EmptyControl));
    EXPECT_TRUE(check(g("f( have_block have_block a )"), l).has(Rule::AdjacentConditions));
    EXPECT_TRUE(is_valid(g("s( a b )"), l));
    EXPECT_TRUE(is_valid(g("f( have_block other_cond a )"), l));
    EXPECT_TRUE(is_valid(g("s( f( a b ) c )"), l));
    EXPECT_TRUE(is_valid(g("have_block"), l));
}

TEST(Validate, AgreesWithGrammarOnSmallTrees) {
    // Every token sequence of up to 7 tokens over a 3-leaf alphabet: the
    // validator accepts exactly the trees the grammar generates.
    const LeafSet leaves({{"a", LeafKind::Action}, {"b", LeafKind::Action}, {"c", LeafKind::Condition}});
    std::set<std::vector<std::pair<int, int>>> generated;
    auto key = [](const Genotype& x) {
        std::vector<std::pair<int, int>> k;
        for (const auto& t : x.tokens()) k.emplace_back(static_cast<int>(t.kind), t.is_leaf() ? t.leaf : -1);
        return k;
    };
    oracle::TreeEnumerator(leaves, 5).run([&](const Genotype& x) { generated.insert(key(x)); });

    const std::vector<Token> alphabet{Token::sequence(), Token::fallback(), Token::close(), Token::make_leaf(0),
                                      Token::make_leaf(1), Token::make_leaf(2)};
    std::size_t accepted = 0;
    std::vector<Token> cur;
    std::function<void()> rec = [&] {
        if (!cur.empty() && is_well_formed(cur)) {
            const Genotype x(cur);
            if (x.node_count() <= 5 && is_valid(x, leaves)) {
                ++accepted;
                EXPECT_TRUE(generated.count(key(x))) << to_text(x, leaves);
            }
        }
        if (cur.size() == 7) return;
        for (const auto& t : alphabet) {
            cur.push_back(t);
            rec();
            cur.pop_back();
        }
    };
    rec();
    std::size_t expected = 0;
    for (const auto& k : generated) expected += k.size() <= 7 ? 1 : 0;
    EXPECT_EQ(accepted, expected);
}

TEST(Validate, RepairProducesValidTrees) {
    const LeafSet l = letters();
    for (const char* text : {"s( s( a b ) c )", "s( a have_block )", "f( have_block have_block a )",
                             "s( have_block )", "f( s( s( have_block ) ) )"}) {
        const Genotype r = repair(g(text), l, detail::first_action(l));
        EXPECT_TRUE(is_valid(r, l)) << text << " -> " << to_text(r, l);
    }
    EXPECT_EQ(to_text(repair(g("s( s( a b ) c )"), l, 0), l), "s( a b c )");
}

TEST(RandomGenotype, LengthOneIsALeaf) {
    Rng rng(3);
    const auto x = random_genotype(letters(), 1, rng);
    ASSERT_EQ(x.size(), 1u);
    EXPECT_TRUE(x[0].is_leaf());
}

TEST(RandomGenotype, SeededDeterminism) {
    Rng a(42), b(42);
    EXPECT_EQ(random_genotype(letters(), 4, a), random_genotype(letters(), 4, b));
}

TEST(RandomGenotype, AlwaysValidWithRequestedNodeCount) {
    Rng rng(7);
    const LeafSet l = letters();
    for (int i = 0; i < 10000; ++i) {
        const auto x = random_genotype(l, 4, rng);
        ASSERT_TRUE(is_valid(x, l)) << to_text(x, l);
        ASSERT_EQ(x.node_count(), 4u);
    }
    EXPECT_THROW(random_genotype(LeafSet{}, 4, rng), PoolEmpty);
    EXPECT_THROW(random_genotype(l, 0, rng), ConfigError);
}
