#pragma once

#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "normid/planner.hpp"

namespace normid {

enum class Modality { Obligation, Prohibition };

char modality_letter(Modality m);  // 'O' / 'F'

// What a norm demands or forbids: either a task (with or without variables)
// or a fully specified state.
using NormCondition = std::variant<Task, State>;

std::string condition_to_string(const NormCondition& c);
bool condition_ground(const NormCondition& c);

struct Evidence {
    std::uint64_t supporting = 0;
    std::uint64_t refuting = 0;

    friend auto operator<=>(const Evidence&, const Evidence&) = default;
};

// A conditional norm: within any execution of a task matching context, the
// condition must occur (obligation) or must not occur (prohibition).
struct Norm {
    Modality modality;
    Task context;
    NormCondition condition;
    std::optional<Evidence> evidence;  // attached by threshold learning

    std::string to_string() const;     // "O[travel(X,Y)] goto(X,Z)"
};

// Identity ignores evidence.
bool operator==(const Norm& a, const Norm& b);
bool operator<(const Norm& a, const Norm& b);

// Canonically ordered set of norms. No context/condition pair may carry
// both modalities.
class NormSet {
public:
    NormSet() = default;
    explicit NormSet(std::vector<Norm> norms);

    bool contains(Modality m, const Task& context, const NormCondition& condition) const;
    bool empty() const { return norms_.empty(); }
    std::size_t size() const { return norms_.size(); }
    auto begin() const { return norms_.begin(); }
    auto end() const { return norms_.end(); }
    const std::vector<Norm>& norms() const { return norms_; }

private:
    std::vector<Norm> norms_;
};

// Whether the condition happens while node executes. A task condition
// occurs when it unifies with the task of some proper descendant; callers
// must already have applied the context binding to the condition. A state
// condition occurs when it equals one of the states the node's actions
// produce: the state the node started in does not count, the state it ends
// in does.
bool occurs(const NormCondition& condition, const DecompositionNode& node);

// Violation at one context instance: the node's task must unify with the
// norm's context for the question to make sense (returns false otherwise).
bool violated_at(const Norm& norm, const DecompositionNode& node);

// A plan violates a norm when any node of its tree violates it.
bool violated(const Norm& norm, const Plan& plan);

} // namespace normid
