#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "normid/model.hpp"

namespace normid {

inline constexpr std::size_t kDefaultGroundCap = 1'000'000;

struct Task {
    std::string symbol;
    std::vector<Term> args;

    bool ground() const;
    std::string to_string() const;

    friend auto operator<=>(const Task&, const Task&) = default;
};

using TaskNetwork = std::vector<Task>;

// Matches a task pattern against a ground instance, extending base.
std::optional<Substitution> unify_task(const Task& pattern, const Task& instance,
                                       const Substitution& base = {});

struct Operator {
    std::string name;                     // doubles as the primitive task symbol
    std::vector<std::string> params;      // pairwise distinct variable names
    std::vector<Literal> preconditions;
    std::vector<Atom> add_effects;
    std::vector<Atom> delete_effects;
};

// A fully grounded operator instance; the task's args are the grounding in
// parameter order.
struct Action {
    Task task;

    std::string to_string() const { return task.to_string(); }

    friend auto operator<=>(const Action&, const Action&) = default;
};

struct Method {
    std::string name;
    std::vector<std::string> params;
    Task task;                            // compound task pattern this method decomposes
    std::vector<Atom> precond_pos;
    std::vector<Atom> precond_neg;
    TaskNetwork network;                  // totally ordered subtasks

    // Variables a ground instance must bind: params plus task pattern
    // variables, in declaration order without duplicates.
    std::vector<std::string> scope() const;
};

struct Lang {
    std::map<std::string, std::size_t> predicates;  // name -> arity
    std::vector<std::string> constants;             // sorted unique
};

// An HTN domain. Construction validates the declaration: disjoint symbol
// namespaces, arity consistency, one operator per primitive symbol, at
// least one method per compound symbol, and an acyclic decomposition graph.
class Domain {
public:
    Domain() = default;
    Domain(Lang lang, std::vector<Operator> operators, std::vector<Method> methods);

    const Lang& lang() const { return lang_; }
    const std::vector<Operator>& operators() const { return operators_; }
    const std::vector<Method>& methods() const { return methods_; }

    bool is_primitive(const std::string& symbol) const;
    bool is_compound(const std::string& symbol) const;

    const Operator& operator_for(const std::string& symbol) const;
    std::span<const Method> methods_for(const std::string& symbol) const;

    // Compound symbols that appear in no method network.
    std::vector<std::string> top_level_symbols() const;

    Action make_action(const Task& ground_primitive) const;
    Substitution action_grounding(const Action& action) const;

private:
    Lang lang_;
    std::vector<Operator> operators_;   // sorted by name
    std::vector<Method> methods_;       // sorted by (task.symbol, name)

    void validate() const;
    void validate_atom(const Atom& atom, const std::string& where) const;
};

bool applicable(const Domain& domain, const Action& action, const State& state);

// (state ∪ add) \ del when applicable, otherwise the state unchanged.
State apply(const Domain& domain, const Action& action, const State& state);

struct GroundOperator {
    Task task;
    std::vector<Literal> preconditions;
    std::vector<Atom> add_effects;
    std::vector<Atom> delete_effects;

    friend auto operator<=>(const GroundOperator&, const GroundOperator&) = default;
};

struct GroundMethod {
    std::string name;
    Substitution grounding;             // total over the lifted method's scope
    Task task;
    std::vector<Atom> precond_pos;
    std::vector<Atom> precond_neg;
    TaskNetwork network;

    friend auto operator<=>(const GroundMethod&, const GroundMethod&) = default;
};

struct GroundDomain {
    std::vector<GroundOperator> operators;  // sorted by task
    std::vector<GroundMethod> methods;      // sorted by (task, name, grounding)
    // Task symbols that are compound in the lifted domain, kept even when
    // pruning removed all their instances.
    std::vector<std::string> compound_symbols;

    std::vector<Task> primitive_tasks() const;
    std::vector<Task> compound_tasks() const;   // tasks with at least one method
};

// Instantiates every operator and method over the constants. When an
// initial state is given, instances whose positive preconditions cannot all
// become true under delete-relaxed reachability from that state are
// dropped; without one, nothing is pruned. Throws GroundingExplosionError
// when the pre-pruning instance count exceeds cap.
GroundDomain ground_domain(const Domain& domain, const std::optional<State>& initial = {},
                           std::size_t cap = kDefaultGroundCap);

} // namespace normid
