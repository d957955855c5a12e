#include "normid/norms.hpp"

#include <algorithm>

#include "normid/errors.hpp"

namespace normid {

char modality_letter(Modality m) { return m == Modality::Obligation ? 'O' : 'F'; }

std::string condition_to_string(const NormCondition& c) {
    if (const Task* t = std::get_if<Task>(&c))
        return t->to_string();
    return std::get<State>(c).to_string();
}

bool condition_ground(const NormCondition& c) {
    if (const Task* t = std::get_if<Task>(&c))
        return t->ground();
    return true;
}

std::string Norm::to_string() const {
    std::string out;
    out += modality_letter(modality);
    out += '[';
    out += context.to_string();
    out += "] ";
    out += condition_to_string(condition);
    return out;
}

bool operator==(const Norm& a, const Norm& b) {
    return a.modality == b.modality && a.context == b.context && a.condition == b.condition;
}

bool operator<(const Norm& a, const Norm& b) {
    return std::tie(a.modality, a.context, a.condition) <
           std::tie(b.modality, b.context, b.condition);
}

NormSet::NormSet(std::vector<Norm> norms) : norms_(std::move(norms)) {
    std::sort(norms_.begin(), norms_.end());
    norms_.erase(std::unique(norms_.begin(), norms_.end()), norms_.end());
    for (const Norm& n : norms_) {
        Norm twin = n;
        twin.modality =
            n.modality == Modality::Obligation ? Modality::Prohibition : Modality::Obligation;
        if (std::binary_search(norms_.begin(), norms_.end(), twin))
            throw DomainError("norm set obliges and prohibits the same condition: " +
                              n.to_string());
    }
}

bool NormSet::contains(Modality m, const Task& context, const NormCondition& condition) const {
    Norm probe{m, context, condition, std::nullopt};
    return std::binary_search(norms_.begin(), norms_.end(), probe);
}

namespace {

bool task_occurs_below(const Task& condition, const DecompositionNode& node) {
    for (const NodePtr& child : node.children) {
        if (!child->synthetic && unify_task(condition, child->task))
            return true;
        if (task_occurs_below(condition, *child))
            return true;
    }
    return false;
}

} // namespace

bool occurs(const NormCondition& condition, const DecompositionNode& node) {
    if (const Task* t = std::get_if<Task>(&condition))
        return task_occurs_below(*t, node);
    const State& s = std::get<State>(condition);
    for (const State& entered : entered_states(node))
        if (entered == s)
            return true;
    return false;
}

bool violated_at(const Norm& norm, const DecompositionNode& node) {
    if (node.synthetic)
        return false;
    auto binding = unify_task(norm.context, node.task);
    if (!binding)
        return false;
    NormCondition condition = norm.condition;
    if (Task* t = std::get_if<Task>(&condition)) {
        Task bound{t->symbol, {}};
        for (const Term& arg : t->args)
            bound.args.push_back(binding->apply(arg));
        condition = std::move(bound);
    }
    bool happened = occurs(condition, node);
    return norm.modality == Modality::Obligation ? !happened : happened;
}

bool violated(const Norm& norm, const Plan& plan) {
    bool found = false;
    for_each_node(plan.root, [&](const DecompositionNode& node) {
        if (!found && violated_at(norm, node))
            found = true;
    });
    return found;
}

} // namespace normid
