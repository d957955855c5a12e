#pragma once

#include <compare>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace normid {

enum class TermKind { Constant, Variable };

// First-order terms are flat: a term is either a constant or a variable.
// Spelling follows the Prolog convention, identifiers starting with an
// uppercase letter or underscore are variables, everything else a constant.
struct Term {
    TermKind kind = TermKind::Constant;
    std::string name;

    bool is_variable() const { return kind == TermKind::Variable; }
    const std::string& to_string() const { return name; }

    friend auto operator<=>(const Term&, const Term&) = default;
};

bool is_variable_name(const std::string& name);
Term make_term(std::string name);           // classifies by spelling
Term make_constant(std::string name);
Term make_variable(std::string name);

struct Atom {
    std::string predicate;
    std::vector<Term> args;

    bool ground() const;
    std::string to_string() const;           // "at(aberdeen)", "p"

    friend auto operator<=>(const Atom&, const Atom&) = default;
};

struct Literal {
    Atom atom;
    bool positive = true;

    std::string to_string() const;           // negation rendered as "!at(x)"

    friend auto operator<=>(const Literal&, const Literal&) = default;
};

// A state is a finite set of ground atoms, kept sorted so that equal states
// compare and serialize identically.
class State {
public:
    State() = default;
    explicit State(std::vector<Atom> atoms);  // sorts, dedupes, checks ground

    bool contains(const Atom& atom) const;
    bool empty() const { return atoms_.empty(); }
    std::size_t size() const { return atoms_.size(); }

    const std::vector<Atom>& atoms() const { return atoms_; }
    auto begin() const { return atoms_.begin(); }
    auto end() const { return atoms_.end(); }

    // (state ∪ add) \ del: additions are applied before deletions, so an
    // atom both added and deleted ends up absent.
    State apply_effects(const std::vector<Atom>& add, const std::vector<Atom>& del) const;

    std::string to_string() const;           // "{at(aberdeen), connect(a,b)}"

    friend auto operator<=>(const State&, const State&) = default;

private:
    std::vector<Atom> atoms_;
};

// Variable bindings. All code paths bind variables directly to constants,
// so application never needs chain resolution.
class Substitution {
public:
    Substitution() = default;

    // Returns false when var is already bound to a different term.
    bool bind(const std::string& var, const Term& value);
    const Term* lookup(const std::string& var) const;
    bool binds(const std::string& var) const { return lookup(var) != nullptr; }

    Term apply(const Term& t) const;
    Atom apply(const Atom& a) const;
    Literal apply(const Literal& l) const;

    bool empty() const { return bindings_.empty(); }
    std::size_t size() const { return bindings_.size(); }
    auto begin() const { return bindings_.begin(); }
    auto end() const { return bindings_.end(); }

    std::string to_string() const;           // "{X=aberdeen, Y=paris}"

    friend auto operator<=>(const Substitution&, const Substitution&) = default;

private:
    std::map<std::string, Term> bindings_;
};

// Extends base so that pattern matches ground; nullopt if impossible.
std::optional<Substitution> match_atom(const Atom& pattern, const Atom& ground,
                                       const Substitution& base = {});

// All substitutions that make every positive literal of goal a member of
// state and no negative literal a member. Variables are bound by matching
// positive literals against state atoms; a negative literal that still has
// free variables rejects a candidate when any state atom matches it.
std::vector<Substitution> satisfying_substitutions(const State& state,
                                                   const std::vector<Literal>& goal);

// The canonically least satisfying substitution, or nullopt.
std::optional<Substitution> satisfies(const State& state, const std::vector<Literal>& goal);

} // namespace normid
