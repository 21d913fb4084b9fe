#pragma once

#include <cstdint>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "btgp/error.hpp"

namespace btgp::bt {

enum class TickStatus : std::uint8_t { Success, Failure, Running };

enum class LeafKind : std::uint8_t { Action, Condition };

using LeafId = std::uint16_t;

struct LeafInfo {
    std::string name;
    LeafKind kind = LeafKind::Action;
};

/// The terminal alphabet of the gene pool: leaf names and their static kind.
/// Leaf ids are positions in this table.
class LeafSet {
public:
    LeafSet() = default;

    explicit LeafSet(std::vector<LeafInfo> leaves) : leaves_(std::move(leaves)) {
        for (std::size_t i = 0; i < leaves_.size(); ++i) {
            auto [it, fresh] = index_.emplace(leaves_[i].name, static_cast<LeafId>(i));
            if (!fresh) throw ConfigError("duplicate leaf name '" + leaves_[i].name + "'");
        }
    }

    [[nodiscard]] std::size_t size() const noexcept { return leaves_.size(); }
    [[nodiscard]] bool empty() const noexcept { return leaves_.empty(); }
    [[nodiscard]] const LeafInfo& operator[](LeafId id) const { return leaves_.at(id); }
    [[nodiscard]] const std::string& name(LeafId id) const { return leaves_.at(id).name; }
    [[nodiscard]] LeafKind kind(LeafId id) const { return leaves_.at(id).kind; }
    [[nodiscard]] bool is_condition(LeafId id) const { return kind(id) == LeafKind::Condition; }

    [[nodiscard]] const LeafId* find(std::string_view name) const {
        auto it = index_.find(std::string(name));
        return it == index_.end() ? nullptr : &it->second;
    }

    [[nodiscard]] LeafId id(std::string_view name) const {
        if (const auto* found = find(name)) return *found;
        throw UnknownBehavior(std::string(name));
    }

private:
    std::vector<LeafInfo> leaves_;
    std::unordered_map<std::string, LeafId> index_;
};

enum class TokenKind : std::uint8_t { SequenceOpen, FallbackOpen, Close, Leaf };

struct Token {
    TokenKind kind = TokenKind::Leaf;
    LeafId leaf = 0;  // meaningful only for TokenKind::Leaf

    static constexpr Token sequence() noexcept { return {TokenKind::SequenceOpen, 0}; }
    static constexpr Token fallback() noexcept { return {TokenKind::FallbackOpen, 0}; }
    static constexpr Token close() noexcept { return {TokenKind::Close, 0}; }
    static constexpr Token make_leaf(LeafId id) noexcept { return {TokenKind::Leaf, id}; }

    [[nodiscard]] constexpr bool is_open() const noexcept {
        return kind == TokenKind::SequenceOpen || kind == TokenKind::FallbackOpen;
    }
    [[nodiscard]] constexpr bool is_leaf() const noexcept { return kind == TokenKind::Leaf; }
    [[nodiscard]] constexpr bool is_close() const noexcept { return kind == TokenKind::Close; }

    friend constexpr bool operator==(const Token& a, const Token& b) noexcept {
        return a.kind == b.kind && (a.kind != TokenKind::Leaf || a.leaf == b.leaf);
    }
};

/// Half-open token range [first, last).
struct TokenRange {
    std::size_t first = 0;
    std::size_t last = 0;
    [[nodiscard]] std::size_t size() const noexcept { return last - first; }
    friend bool operator==(const TokenRange&, const TokenRange&) = default;
};

/// Flat string encoding of a behavior tree: `s(`, `f(`, `)` and leaf tokens
/// in depth-first order. This is what the genetic operators manipulate.
class Genotype {
public:
    Genotype() = default;
    explicit Genotype(std::vector<Token> tokens) : tokens_(std::move(tokens)) {}

    [[nodiscard]] const std::vector<Token>& tokens() const noexcept { return tokens_; }
    [[nodiscard]] std::vector<Token>& tokens() noexcept { return tokens_; }
    [[nodiscard]] std::size_t size() const noexcept { return tokens_.size(); }
    [[nodiscard]] bool empty() const noexcept { return tokens_.empty(); }
    [[nodiscard]] const Token& operator[](std::size_t i) const { return tokens_[i]; }

    /// Number of nodes, i.e. tokens that are not Close.
    [[nodiscard]] std::size_t node_count() const noexcept {
        std::size_t n = 0;
        for (const auto& t : tokens_) n += t.is_close() ? 0 : 1;
        return n;
    }

    /// Token indices of every node in depth-first order.
    [[nodiscard]] std::vector<std::size_t> node_positions() const {
        std::vector<std::size_t> out;
        out.reserve(tokens_.size());
        for (std::size_t i = 0; i < tokens_.size(); ++i)
            if (!tokens_[i].is_close()) out.push_back(i);
        return out;
    }

    friend bool operator==(const Genotype&, const Genotype&) = default;

private:
    std::vector<Token> tokens_;
};

/// Contiguous token range of the subtree rooted at token `node_index`.
inline TokenRange subtree_span(const Genotype& g, std::size_t node_index) {
    if (node_index >= g.size())
        throw IndexOutOfRange("token " + std::to_string(node_index) + " of " + std::to_string(g.size()));
    const Token& head = g[node_index];
    if (head.is_close()) throw IndexOutOfRange("token " + std::to_string(node_index) + " is a close token");
    if (head.is_leaf()) return {node_index, node_index + 1};
    std::size_t depth = 0;
    for (std::size_t i = node_index; i < g.size(); ++i) {
        if (g[i].is_open()) ++depth;
        else if (g[i].is_close() && --depth == 0) return {node_index, i + 1};
    }
    throw MalformedGenotype("unterminated control node at token " + std::to_string(node_index));
}

/// True when the token sequence is balanced and forms exactly one tree.
inline bool is_well_formed(const std::vector<Token>& tokens) noexcept {
    if (tokens.empty()) return false;
    if (tokens.size() == 1) return tokens[0].is_leaf();
    if (!tokens.front().is_open()) return false;
    std::size_t depth = 0;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (tokens[i].is_open()) ++depth;
        else if (tokens[i].is_close()) {
            if (depth == 0) return false;
            if (--depth == 0 && i + 1 != tokens.size()) return false;
        }
    }
    return depth == 0;
}

// --- text format -----------------------------------------------------------

inline std::string to_text(const Genotype& g, const LeafSet& leaves) {
    std::string out;
    for (const auto& t : g.tokens()) {
        if (!out.empty()) out += ' ';
        switch (t.kind) {
            case TokenKind::SequenceOpen: out += "s("; break;
            case TokenKind::FallbackOpen: out += "f("; break;
            case TokenKind::Close: out += ')'; break;
            case TokenKind::Leaf: out += leaves.name(t.leaf); break;
        }
    }
    return out;
}

/// Parses whitespace-separated tokens. Only lexical checks happen here;
/// structure is checked by parse().
inline Genotype from_text(std::string_view text, const LeafSet& leaves) {
    std::vector<Token> tokens;
    std::istringstream in{std::string(text)};
    std::string word;
    while (in >> word) {
        if (word == "s(") tokens.push_back(Token::sequence());
        else if (word == "f(") tokens.push_back(Token::fallback());
        else if (word == ")") tokens.push_back(Token::close());
        else if (const auto* id = leaves.find(word)) tokens.push_back(Token::make_leaf(*id));
        else throw MalformedGenotype("unknown leaf id '" + word + "'");
    }
    return Genotype(std::move(tokens));
}

} // namespace btgp::bt
