#include "normid/simulator.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <tuple>

#include "normid/errors.hpp"

namespace normid {

double Rng::next_unit() {
    // Top 53 bits of one engine output, scaled into [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::size_t Rng::next_index(std::size_t n) {
    if (n == 0)
        throw DomainError("cannot draw an index from an empty range");
    const std::uint64_t bound = n;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() / bound * bound;
    std::uint64_t draw = engine_();
    while (draw >= limit)
        draw = engine_();
    return static_cast<std::size_t>(draw % bound);
}

namespace {

bool violates_any(const Plan& plan, const NormSet& norms) {
    for (const Norm& norm : norms)
        if (violated(norm, plan))
            return true;
    return false;
}

} // namespace

std::vector<Plan> compliant_plans(const Domain& domain, const State& initial, const Task& goal,
                                  const NormSet& norms, std::size_t depth_cap) {
    std::vector<Plan> result;
    for (Plan& p : all_plans(domain, initial, goal, depth_cap))
        if (!violates_any(p, norms))
            result.push_back(std::move(p));
    if (result.empty())
        throw NoCompliantPlanError("no plan for " + goal.to_string() + " from " +
                                   initial.to_string() + " complies with the norms");
    return result;
}

std::vector<Run> generate_runs(const Scenario& scenario, std::size_t n, std::size_t depth_cap) {
    if (scenario.goals.empty())
        throw DomainError("scenario declares no goals");
    if (!(scenario.violation_rate >= 0.0 && scenario.violation_rate <= 1.0))
        throw DomainError("violation rate must lie in [0, 1]");
    double total_weight = 0.0;
    for (const GoalChoice& g : scenario.goals) {
        if (!(g.weight > 0.0))
            throw DomainError("goal weight must be positive: " + g.task.to_string());
        total_weight += g.weight;
    }

    struct Pools {
        std::vector<Plan> compliant;
        std::vector<Plan> violating;
    };
    std::map<Task, Pools> pools;
    auto pools_for = [&](const Task& goal) -> const Pools& {
        auto it = pools.find(goal);
        if (it == pools.end()) {
            Pools p;
            for (Plan& plan :
                 all_plans(scenario.domain, scenario.initial_state, goal, depth_cap)) {
                auto& bucket = violates_any(plan, scenario.planted) ? p.violating : p.compliant;
                bucket.push_back(std::move(plan));
            }
            it = pools.emplace(goal, std::move(p)).first;
        }
        return it->second;
    };

    // Fixed per-run draw order, part of the determinism contract: first the
    // goal, then whether to violate, then the plan index. All three are
    // consumed on every run, even for single-element pools.
    Rng rng(scenario.seed);
    std::vector<Run> runs;
    runs.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double roll = rng.next_unit() * total_weight;
        std::size_t goal_idx = scenario.goals.size() - 1;
        double cumulative = 0.0;
        for (std::size_t j = 0; j < scenario.goals.size(); ++j) {
            cumulative += scenario.goals[j].weight;
            if (roll < cumulative) {
                goal_idx = j;
                break;
            }
        }
        const Task& goal = scenario.goals[goal_idx].task;
        const bool want_violation = rng.next_unit() < scenario.violation_rate;

        const Pools& pool = pools_for(goal);
        const std::vector<Plan>* chosen;
        if (want_violation && !pool.violating.empty()) {
            chosen = &pool.violating;
        } else {
            if (pool.compliant.empty())
                throw NoCompliantPlanError("no plan for " + goal.to_string() + " from " +
                                           scenario.initial_state.to_string() +
                                           " complies with the norms");
            chosen = &pool.compliant;
        }
        const Plan& plan = (*chosen)[rng.next_index(chosen->size())];

        Run run;
        run.initial_state = scenario.initial_state;
        run.observations = plan.actions;
        run.goal = goal;
        runs.push_back(std::move(run));
    }
    return runs;
}

namespace {

// Ground instantiations of a task pattern: variables bound by base are
// substituted, any left over range across every constant.
std::vector<Task> ground_instances(const Task& pattern, const Substitution& base,
                                   const std::vector<std::string>& constants) {
    Task seed{pattern.symbol, {}};
    std::vector<std::string> free_vars;
    for (const Term& arg : pattern.args) {
        Term bound = base.apply(arg);
        if (bound.is_variable() &&
            std::find(free_vars.begin(), free_vars.end(), bound.name) == free_vars.end())
            free_vars.push_back(bound.name);
        seed.args.push_back(std::move(bound));
    }
    if (free_vars.empty())
        return {seed};
    if (constants.empty())
        return {};

    std::vector<Task> out;
    std::vector<std::size_t> odometer(free_vars.size(), 0);
    while (true) {
        Substitution extra;
        for (std::size_t v = 0; v < free_vars.size(); ++v)
            extra.bind(free_vars[v], make_constant(constants[odometer[v]]));
        Task instance{seed.symbol, {}};
        for (const Term& arg : seed.args)
            instance.args.push_back(extra.apply(arg));
        out.push_back(std::move(instance));

        std::size_t pos = free_vars.size();
        while (pos > 0) {
            --pos;
            if (++odometer[pos] < constants.size())
                break;
            odometer[pos] = 0;
            if (pos == 0)
                return out;
        }
    }
}

// Every ground norm a (possibly lifted) planted norm stands for across the
// observed context tasks.
std::vector<Norm> planted_instances(const Norm& planted, const std::set<Task>& contexts,
                                    const std::vector<std::string>& constants) {
    std::vector<Norm> out;
    for (const Task& context : contexts) {
        auto binding = unify_task(planted.context, context);
        if (!binding)
            continue;
        if (const Task* cond = std::get_if<Task>(&planted.condition)) {
            for (Task& instance : ground_instances(*cond, *binding, constants))
                out.push_back(Norm{planted.modality, context, std::move(instance), std::nullopt});
        } else {
            out.push_back(Norm{planted.modality, context, planted.condition, std::nullopt});
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

} // namespace

EvaluationReport evaluate(const NormSet& learned, const NormSet& planted,
                          const std::vector<Run>& runs, const Domain& domain,
                          const std::vector<Task>& goal_tasks, std::size_t depth_cap,
                          std::size_t ground_cap) {
    // Contexts and start states the runs actually exercised. Identical runs
    // are recognized once.
    std::set<std::pair<Task, State>> observed_pairs;
    using RunKey = std::tuple<State, std::vector<Action>, std::optional<Task>>;
    std::set<RunKey> seen;
    for (const Run& run : runs) {
        if (!seen.insert({run.initial_state, run.observations, run.goal}).second)
            continue;
        Recognition rec = recognize(domain, run, goal_tasks, ground_cap);
        for (const DecompositionNode* node : collect_nodes(rec.plan))
            observed_pairs.insert({node->task, node->state_before});
    }
    std::set<Task> observed_contexts;
    for (const auto& [task, state] : observed_pairs)
        observed_contexts.insert(task);

    std::vector<Norm> all_instances;
    for (const Norm& norm : planted) {
        std::vector<Norm> instances =
            planted_instances(norm, observed_contexts, domain.lang().constants);
        all_instances.insert(all_instances.end(), instances.begin(), instances.end());
    }
    std::sort(all_instances.begin(), all_instances.end());
    all_instances.erase(std::unique(all_instances.begin(), all_instances.end()),
                        all_instances.end());

    // A planted instance is detectable only if its condition occurs in some
    // but not all decompositions of its context from the observed start
    // states. Occurring never means no behavior can reveal it; occurring
    // always means no behavior can violate it.
    PlanCache cache;
    auto detectable = [&](const Norm& instance) {
        bool in_some = false;
        bool in_all = true;
        for (const auto& [task, state] : observed_pairs) {
            if (task != instance.context)
                continue;
            for (const Plan& plan : cache.plans(domain, task, state, depth_cap)) {
                if (occurs(instance.condition, *plan.root))
                    in_some = true;
                else
                    in_all = false;
            }
        }
        return in_some && !in_all;
    };

    EvaluationReport report;
    report.observed_context_count = observed_contexts.size();
    for (Modality modality : {Modality::Obligation, Modality::Prohibition}) {
        ModalityReport& mr =
            modality == Modality::Obligation ? report.obligations : report.prohibitions;

        std::vector<Norm> instances;
        for (const Norm& n : all_instances)
            if (n.modality == modality)
                instances.push_back(n);

        std::size_t learned_count = 0;
        for (const Norm& n : learned) {
            if (n.modality != modality)
                continue;
            ++learned_count;
            bool matches_planted =
                std::binary_search(all_instances.begin(), all_instances.end(),
                                   Norm{n.modality, n.context, n.condition, std::nullopt});
            (matches_planted ? mr.true_positives : mr.false_positives).push_back(n);
        }

        std::size_t falsifiable = 0;
        std::size_t recalled = 0;
        for (const Norm& instance : instances) {
            if (!detectable(instance)) {
                mr.undetectable.push_back(instance);
                continue;
            }
            ++falsifiable;
            if (learned.contains(instance.modality, instance.context, instance.condition))
                ++recalled;
            else
                mr.misses.push_back(instance);
        }

        mr.empty_learned = learned_count == 0;
        mr.empty_planted = falsifiable == 0;
        mr.precision = mr.empty_learned
                           ? 1.0
                           : static_cast<double>(mr.true_positives.size()) / learned_count;
        mr.recall = mr.empty_planted ? 1.0 : static_cast<double>(recalled) / falsifiable;
    }
    return report;
}

} // namespace normid
