#include "normid/recognizer.hpp"

#include <algorithm>

#include "normid/errors.hpp"

namespace normid {

std::vector<Task> default_goal_tasks(const Domain& domain, const GroundDomain& ground) {
    std::vector<std::string> top = domain.top_level_symbols();
    std::vector<Task> goals;
    for (const GroundMethod& m : ground.methods) {
        if (std::find(top.begin(), top.end(), m.task.symbol) != top.end())
            goals.push_back(m.task);
    }
    std::sort(goals.begin(), goals.end());
    goals.erase(std::unique(goals.begin(), goals.end()), goals.end());
    return goals;
}

namespace {

// Turns a parse tree into a decomposition tree, replaying the actions to
// recover the state at every node.
NodePtr replay(const Domain& domain, const ParseTree& tree, State& state) {
    auto node = std::make_shared<DecompositionNode>();
    node->task = tree.symbol;
    node->state_before = state;
    if (tree.production == nullptr) {
        Action action = domain.make_action(tree.symbol);
        if (!applicable(domain, action, state))
            throw StateMismatchError("observed action " + action.to_string() +
                                     " is not applicable in state " + state.to_string());
        state = apply(domain, action, state);
        node->state_after = state;
        return node;
    }
    node->method = AppliedMethod{tree.production->method_name, tree.production->method_grounding};
    for (const ParseTreePtr& child : tree.children)
        node->children.push_back(replay(domain, *child, state));
    node->state_after = state;
    return node;
}

} // namespace

Recognition recognize_with_grammar(const Domain& domain, const Grammar& grammar, const Run& run) {
    std::vector<Task> observed;
    observed.reserve(run.observations.size());
    for (const Action& a : run.observations)
        observed.push_back(a.task);

    std::vector<ParseTreePtr> trees = parse(grammar, observed);
    const ParseTree* winner = trees.front().get();
    if (grammar.synthetic_start())
        winner = winner->children.front().get();

    State state = run.initial_state;
    Plan plan;
    plan.initial_state = run.initial_state;
    plan.root = replay(domain, *winner, state);
    plan.actions = run.observations;
    return Recognition{std::move(plan), trees.size()};
}

Recognition recognize(const Domain& domain, const Run& run, const std::vector<Task>& goal_tasks,
                      std::size_t ground_cap) {
    GroundDomain ground = ground_domain(domain, run.initial_state, ground_cap);
    std::vector<Task> goals;
    if (run.goal)
        goals.push_back(*run.goal);
    else if (!goal_tasks.empty())
        goals = goal_tasks;
    else
        goals = default_goal_tasks(domain, ground);
    Grammar grammar = to_grammar(ground, goals);
    return recognize_with_grammar(domain, grammar, run);
}

Run run_of(const Plan& plan) {
    Run run;
    run.initial_state = plan.initial_state;
    run.observations = plan.actions;
    if (plan.root && !plan.root->synthetic)
        run.goal = plan.root->task;
    return run;
}

} // namespace normid
