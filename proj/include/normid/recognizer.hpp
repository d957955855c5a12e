#pragma once

#include <optional>
#include <vector>

#include "normid/grammar.hpp"
#include "normid/planner.hpp"

namespace normid {

// A fully observed execution: who did what from where, and optionally the
// goal task the actor pursued.
struct Run {
    State initial_state;
    std::vector<Action> observations;
    std::optional<Task> goal;
};

struct Recognition {
    Plan plan;                  // canonically least parse, states replayed
    std::size_t parse_count;    // > 1 means the observations were ambiguous
};

// Goal tasks used when neither the run nor the caller names any: every
// ground instance of a top-level compound symbol that has a method.
std::vector<Task> default_goal_tasks(const Domain& domain, const GroundDomain& ground);

// Reconstructs the decomposition tree behind a run by grounding the domain
// against the run's initial state, parsing the observed actions with the
// induced grammar, and replaying the winning tree to recover states.
// Throws NoParseError / EmptyGrammarError / StateMismatchError.
Recognition recognize(const Domain& domain, const Run& run, const std::vector<Task>& goal_tasks,
                      std::size_t ground_cap = kDefaultGroundCap);

// Same, with a previously built grammar (callers caching per initial state).
Recognition recognize_with_grammar(const Domain& domain, const Grammar& grammar, const Run& run);

// The run an outside observer would record for a plan.
Run run_of(const Plan& plan);

} // namespace normid
