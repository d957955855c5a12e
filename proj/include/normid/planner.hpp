#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "normid/domain.hpp"

namespace normid {

inline constexpr std::size_t kDefaultDepthCap = 64;

struct AppliedMethod {
    std::string name;
    Substitution grounding;

    friend auto operator<=>(const AppliedMethod&, const AppliedMethod&) = default;
};

struct DecompositionNode;
using NodePtr = std::shared_ptr<const DecompositionNode>;

// One node of a decomposition tree. Primitive nodes (no method, not
// synthetic) are the executed actions; their state_after is the result of
// executing them in state_before. Interior nodes thread state through their
// children left to right. A synthetic node wraps multi-task or empty goal
// networks and never counts as a norm context.
struct DecompositionNode {
    Task task;
    std::optional<AppliedMethod> method;
    std::vector<NodePtr> children;
    State state_before;
    State state_after;
    bool synthetic = false;

    bool primitive() const { return !method.has_value() && !synthetic; }
};

bool deep_equal(const DecompositionNode& a, const DecompositionNode& b);

struct Plan {
    std::vector<Action> actions;
    NodePtr root;
    State initial_state;
};

bool operator==(const Plan& a, const Plan& b);

// Every (method, grounding) pair whose instantiated task equals task and
// whose preconditions hold in state. The grounding is total over the
// method's scope; scope variables not fixed by the task pattern or the
// positive preconditions are enumerated over the domain constants.
// Canonical order: (method name, grounding).
std::vector<std::pair<const Method*, Substitution>>
applicable_methods(const Task& task, const State& state, const Domain& domain);

// All plans decomposing goal from initial, in the deterministic
// depth-first enumeration order (methods in canonical order at every choice
// point). Throws DepthCapError when decomposition nests deeper than
// depth_cap.
std::vector<Plan> all_plans(const Domain& domain, const State& initial, const Task& goal,
                            std::size_t depth_cap = kDefaultDepthCap);

// First plan of the enumeration for a whole task network, or nullopt.
// A network with exactly one task yields that task's node as root;
// otherwise the root is synthetic.
std::optional<Plan> plan(const Domain& domain, const State& initial, const TaskNetwork& network,
                         std::size_t depth_cap = kDefaultDepthCap);

// initial state followed by the state after each action, in order.
std::vector<State> states_of(const Plan& plan);

// Chain of states a node passes through, state_before first and
// state_after last.
std::vector<State> state_chain(const DecompositionNode& node);

// States produced by the actions inside the node: the chain without its
// starting state. Empty for nodes that execute nothing.
std::vector<State> entered_states(const DecompositionNode& node);

// Preorder visit of the non-synthetic nodes of a tree.
void for_each_node(const NodePtr& root, const std::function<void(const DecompositionNode&)>& fn);

std::vector<const DecompositionNode*> collect_nodes(const Plan& plan);

} // namespace normid
