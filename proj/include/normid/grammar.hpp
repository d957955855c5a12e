#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "normid/domain.hpp"

namespace normid {

// One production lhs -> rhs. Productions derived from ground methods carry
// the method identity so parse trees can be turned back into decomposition
// trees; synthetic productions only exist to give multi-goal grammars a
// single start symbol.
struct Production {
    Task lhs;
    std::vector<Task> rhs;
    std::string method_name;
    Substitution method_grounding;
    bool synthetic = false;

    friend auto operator<=>(const Production&, const Production&) = default;
};

// Context-free grammar over ground tasks: nonterminals are ground compound
// tasks, terminals ground primitive tasks. Productions are held in
// canonical order, which fixes the enumeration order of parse trees.
class Grammar {
public:
    Grammar(std::vector<Task> terminals, std::vector<Task> nonterminals,
            std::vector<Production> productions, Task start, bool synthetic_start);

    const std::vector<Task>& terminals() const { return terminals_; }
    const std::vector<Task>& nonterminals() const { return nonterminals_; }
    const std::vector<Production>& productions() const { return productions_; }
    const Task& start() const { return start_; }
    bool synthetic_start() const { return synthetic_start_; }

    bool is_terminal(const Task& symbol) const;
    bool is_nonterminal(const Task& symbol) const;

private:
    std::vector<Task> terminals_;     // sorted
    std::vector<Task> nonterminals_;  // sorted
    std::vector<Production> productions_;
    Task start_;
    bool synthetic_start_;
};

// Parse trees reference productions owned by the grammar, so a tree must
// not outlive the grammar it was parsed with.
struct ParseTree {
    Task symbol;
    const Production* production = nullptr;  // nullptr for terminal leaves
    std::vector<std::shared_ptr<const ParseTree>> children;

    std::string to_string() const;  // "t1(t2(a1,a2),t3(a3))"
};

using ParseTreePtr = std::shared_ptr<const ParseTree>;

// All complete parses of the observed sequence, Earley-style chart parsing
// over an arbitrary (possibly ambiguous) context-free grammar. Trees come
// out in canonical order: production order at the root, then split points
// left to right, recursively. Throws NoParseError when nothing derives the
// sequence.
std::vector<ParseTreePtr> parse(const Grammar& grammar, std::span<const Task> observed);

// Builds the grammar of a ground domain: one production per ground method.
// With several goal tasks, a synthetic start symbol with one production per
// goal is added. Throws EmptyGrammarError when no goal task has a method.
Grammar to_grammar(const GroundDomain& ground, const std::vector<Task>& goal_tasks);

} // namespace normid
