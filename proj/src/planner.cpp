#include "normid/planner.hpp"

#include <algorithm>

#include "normid/errors.hpp"

namespace normid {

bool deep_equal(const DecompositionNode& a, const DecompositionNode& b) {
    if (a.task != b.task || a.method != b.method || a.synthetic != b.synthetic ||
        a.state_before != b.state_before || a.state_after != b.state_after ||
        a.children.size() != b.children.size())
        return false;
    for (std::size_t i = 0; i < a.children.size(); ++i)
        if (!deep_equal(*a.children[i], *b.children[i]))
            return false;
    return true;
}

bool operator==(const Plan& a, const Plan& b) {
    if (a.actions != b.actions || a.initial_state != b.initial_state)
        return false;
    if (!a.root || !b.root)
        return !a.root && !b.root;
    return deep_equal(*a.root, *b.root);
}

std::vector<std::pair<const Method*, Substitution>>
applicable_methods(const Task& task, const State& state, const Domain& domain) {
    std::vector<std::pair<const Method*, Substitution>> result;
    for (const Method& m : domain.methods_for(task.symbol)) {
        auto base = unify_task(m.task, task);
        if (!base)
            continue;

        // Join positive preconditions against the state to extend the binding.
        std::vector<Substitution> candidates{*base};
        for (const Atom& atom : m.precond_pos) {
            std::vector<Substitution> next;
            for (const Substitution& s : candidates) {
                Atom pattern = s.apply(atom);
                if (pattern.ground()) {
                    if (state.contains(pattern))
                        next.push_back(s);
                    continue;
                }
                for (const Atom& a : state) {
                    if (auto extended = match_atom(pattern, a, s))
                        next.push_back(std::move(*extended));
                }
            }
            candidates = std::move(next);
            if (candidates.empty())
                break;
        }

        // Any scope variable still free is enumerated over the constants, so
        // the instantiated network is always ground.
        std::vector<std::string> scope = m.scope();
        std::vector<Substitution> total;
        for (const Substitution& s : candidates) {
            std::vector<Substitution> stack{s};
            for (const std::string& var : scope) {
                if (s.binds(var))
                    continue;
                std::vector<Substitution> grown;
                for (const Substitution& g : stack) {
                    for (const std::string& c : domain.lang().constants) {
                        Substitution next = g;
                        next.bind(var, make_constant(c));
                        grown.push_back(std::move(next));
                    }
                }
                stack = std::move(grown);
            }
            total.insert(total.end(), stack.begin(), stack.end());
        }

        for (const Substitution& s : total) {
            bool ok = true;
            for (const Atom& atom : m.precond_neg) {
                if (state.contains(s.apply(atom))) {
                    ok = false;
                    break;
                }
            }
            if (ok)
                result.emplace_back(&m, s);
        }
    }
    std::sort(result.begin(), result.end(), [](const auto& a, const auto& b) {
        return std::tie(a.first->name, a.second) < std::tie(b.first->name, b.second);
    });
    result.erase(std::unique(result.begin(), result.end(),
                             [](const auto& a, const auto& b) {
                                 return a.first == b.first && a.second == b.second;
                             }),
                 result.end());
    return result;
}

namespace {

// Receives one finished decomposition; returning false aborts the search.
using Sink = std::function<bool(const std::vector<NodePtr>&, const State&)>;

class Search {
public:
    Search(const Domain& domain, std::size_t depth_cap) : domain_(domain), depth_cap_(depth_cap) {}

    // Enumerates decompositions of task from state depth-first, methods in
    // canonical order, and feeds each (nodes, end state) pair to sink.
    bool visit_task(const Task& task, const State& state, std::size_t depth, const Sink& sink) {
        if (depth > depth_cap_)
            throw DepthCapError("decomposition of " + task.to_string() + " exceeds depth cap " +
                                std::to_string(depth_cap_));
        if (domain_.is_primitive(task.symbol)) {
            Action action = domain_.make_action(task);
            if (!applicable(domain_, action, state))
                return true;  // dead branch, keep enumerating elsewhere
            auto node = std::make_shared<DecompositionNode>();
            node->task = task;
            node->state_before = state;
            node->state_after = apply(domain_, action, state);
            State end = node->state_after;
            std::vector<NodePtr> nodes{std::move(node)};
            return sink(nodes, end);
        }
        if (!task.ground())
            throw DomainError("cannot decompose non-ground task " + task.to_string());
        for (const auto& [method, grounding] : applicable_methods(task, state, domain_)) {
            TaskNetwork network;
            network.reserve(method->network.size());
            for (const Task& sub : method->network) {
                Task ground{sub.symbol, {}};
                for (const Term& arg : sub.args)
                    ground.args.push_back(grounding.apply(arg));
                network.push_back(std::move(ground));
            }
            std::vector<NodePtr> scratch;
            bool keep = visit_network(
                network, 0, state, depth + 1, scratch,
                [&](const std::vector<NodePtr>& children, const State& end) {
                    auto node = std::make_shared<DecompositionNode>();
                    node->task = task;
                    node->method = AppliedMethod{method->name, grounding};
                    node->children = children;
                    node->state_before = state;
                    node->state_after = end;
                    std::vector<NodePtr> nodes{std::move(node)};
                    return sink(nodes, end);
                });
            if (!keep)
                return false;
        }
        return true;
    }

    // Expands network[idx..] from state, accumulating nodes in prefix.
    bool visit_network(const TaskNetwork& network, std::size_t idx, const State& state,
                       std::size_t depth, std::vector<NodePtr>& prefix, const Sink& sink) {
        if (idx == network.size())
            return sink(prefix, state);
        return visit_task(network[idx], state, depth,
                          [&](const std::vector<NodePtr>& nodes, const State& end) {
                              std::size_t mark = prefix.size();
                              prefix.insert(prefix.end(), nodes.begin(), nodes.end());
                              bool keep = visit_network(network, idx + 1, end, depth, prefix, sink);
                              prefix.resize(mark);
                              return keep;
                          });
    }

private:
    const Domain& domain_;
    std::size_t depth_cap_;
};

std::vector<Action> leaf_actions(const NodePtr& root) {
    std::vector<Action> actions;
    auto walk = [&](auto&& self, const DecompositionNode& node) -> void {
        if (node.primitive()) {
            actions.push_back(Action{node.task});
            return;
        }
        for (const NodePtr& child : node.children)
            self(self, *child);
    };
    walk(walk, *root);
    return actions;
}

Plan plan_from_nodes(std::vector<NodePtr> nodes, const State& initial, const State& end,
                     bool single_task_network) {
    Plan p;
    p.initial_state = initial;
    if (single_task_network && nodes.size() == 1) {
        p.root = std::move(nodes.front());
    } else {
        auto root = std::make_shared<DecompositionNode>();
        root->task = Task{"<network>", {}};
        root->synthetic = true;
        root->children = std::move(nodes);
        root->state_before = initial;
        root->state_after = end;
        p.root = std::move(root);
    }
    p.actions = leaf_actions(p.root);
    return p;
}

} // namespace

std::vector<Plan> all_plans(const Domain& domain, const State& initial, const Task& goal,
                            std::size_t depth_cap) {
    Search search(domain, depth_cap);
    std::vector<Plan> plans;
    search.visit_task(goal, initial, 0, [&](const std::vector<NodePtr>& nodes, const State& end) {
        plans.push_back(plan_from_nodes(nodes, initial, end, true));
        return true;
    });
    return plans;
}

std::optional<Plan> plan(const Domain& domain, const State& initial, const TaskNetwork& network,
                         std::size_t depth_cap) {
    Search search(domain, depth_cap);
    std::optional<Plan> result;
    std::vector<NodePtr> scratch;
    search.visit_network(network, 0, initial, 0, scratch,
                         [&](const std::vector<NodePtr>& nodes, const State& end) {
                             result = plan_from_nodes(nodes, initial, end, network.size() == 1);
                             return false;  // first plan only
                         });
    return result;
}

std::vector<State> states_of(const Plan& plan) {
    std::vector<State> states{plan.initial_state};
    if (plan.root) {
        for (State& s : entered_states(*plan.root))
            states.push_back(std::move(s));
    }
    return states;
}

static void collect_entered(const DecompositionNode& node, std::vector<State>& out) {
    if (node.primitive()) {
        out.push_back(node.state_after);
        return;
    }
    for (const NodePtr& child : node.children)
        collect_entered(*child, out);
}

std::vector<State> state_chain(const DecompositionNode& node) {
    std::vector<State> states{node.state_before};
    collect_entered(node, states);
    return states;
}

std::vector<State> entered_states(const DecompositionNode& node) {
    std::vector<State> states;
    collect_entered(node, states);
    return states;
}

void for_each_node(const NodePtr& root, const std::function<void(const DecompositionNode&)>& fn) {
    if (!root)
        return;
    if (!root->synthetic)
        fn(*root);
    for (const NodePtr& child : root->children)
        for_each_node(child, fn);
}

std::vector<const DecompositionNode*> collect_nodes(const Plan& plan) {
    std::vector<const DecompositionNode*> nodes;
    auto walk = [&](auto&& self, const NodePtr& node) -> void {
        if (!node)
            return;
        if (!node->synthetic)
            nodes.push_back(node.get());
        for (const NodePtr& child : node->children)
            self(self, child);
    };
    walk(walk, plan.root);
    return nodes;
}

} // namespace normid
