#include "normid/learner.hpp"

#include <algorithm>

#include "normid/errors.hpp"

namespace normid {

namespace {

// Ground tasks of the proper descendants of a node, deduplicated.
std::set<Task> subtasks_of(const DecompositionNode& node) {
    std::set<Task> out;
    auto walk = [&](auto&& self, const DecompositionNode& n) -> void {
        for (const NodePtr& child : n.children) {
            if (!child->synthetic)
                out.insert(child->task);
            self(self, *child);
        }
    };
    walk(walk, node);
    return out;
}

std::set<State> entered_state_set(const DecompositionNode& node) {
    std::vector<State> chain = entered_states(node);
    return std::set<State>(chain.begin(), chain.end());
}

// All conditions realized under one node: subtasks and produced states.
std::set<NormCondition> realized_conditions(const DecompositionNode& node) {
    std::set<NormCondition> out;
    for (const Task& t : subtasks_of(node))
        out.insert(t);
    for (const State& s : entered_state_set(node))
        out.insert(s);
    return out;
}

struct ObservedIndex {
    // Per ground task, the union over all its nodes in the observed plan.
    std::map<Task, std::set<Task>> subtasks;
    std::map<Task, std::set<State>> states;

    explicit ObservedIndex(const Plan& plan) {
        for (const DecompositionNode* node : collect_nodes(plan)) {
            std::set<Task> subs = subtasks_of(*node);
            subtasks[node->task].insert(subs.begin(), subs.end());
            std::set<State> entered = entered_state_set(*node);
            states[node->task].insert(entered.begin(), entered.end());
        }
    }

    bool saw_subtask(const Task& context, const Task& condition) const {
        auto it = subtasks.find(context);
        return it != subtasks.end() && it->second.count(condition) > 0;
    }

    bool saw_state(const Task& context, const State& condition) const {
        auto it = states.find(context);
        return it != states.end() && it->second.count(condition) > 0;
    }
};

} // namespace

ComplianceEvidence extract_compliance_evidence(const Plan& plan) {
    ComplianceEvidence out;
    for (const DecompositionNode* node : collect_nodes(plan)) {
        for (const NormCondition& condition : realized_conditions(*node)) {
            out.obligations.insert(CandidateNorm{Modality::Obligation, node->task, condition});
            out.executed.insert(CandidateNorm{Modality::Prohibition, node->task, condition});
        }
    }
    return out;
}

const std::vector<Plan>& PlanCache::plans(const Domain& domain, const Task& task,
                                          const State& state, std::size_t depth_cap) {
    auto key = std::make_pair(task, state);
    auto it = cache_.find(key);
    if (it == cache_.end()) {
        auto computed = std::make_shared<std::vector<Plan>>(all_plans(domain, state, task, depth_cap));
        it = cache_.emplace(key, std::move(computed)).first;
    }
    return *it->second;
}

std::set<CandidateNorm> extract_avoidance_evidence(const Plan& plan, const Domain& domain,
                                                   std::size_t depth_cap, PlanCache* cache) {
    PlanCache local;
    PlanCache& plans = cache ? *cache : local;
    ObservedIndex observed(plan);

    std::set<CandidateNorm> out;
    for (const DecompositionNode* node : collect_nodes(plan)) {
        for (const Plan& alternative : plans.plans(domain, node->task, node->state_before,
                                                   depth_cap)) {
            for (const DecompositionNode* alt : collect_nodes(alternative)) {
                for (const Task& sub : subtasks_of(*alt)) {
                    if (!observed.saw_subtask(alt->task, sub))
                        out.insert(CandidateNorm{Modality::Prohibition, alt->task, sub});
                }
                for (const State& entered : entered_state_set(*alt)) {
                    if (!observed.saw_state(alt->task, entered))
                        out.insert(CandidateNorm{Modality::Prohibition, alt->task, entered});
                }
            }
        }
    }
    return out;
}

bool ObligationLattice::observed(const Task& context) const {
    return entries_.count(context) > 0;
}

const std::set<NormCondition>* ObligationLattice::conditions(const Task& context) const {
    auto it = entries_.find(context);
    return it == entries_.end() ? nullptr : &it->second;
}

void ObligationLattice::intersect(const std::set<CandidateNorm>& obligations) {
    std::map<Task, std::set<NormCondition>> incoming;
    for (const CandidateNorm& c : obligations) {
        if (c.modality == Modality::Obligation)
            incoming[c.context].insert(c.condition);
    }
    for (const auto& [context, conditions] : incoming) {
        auto it = entries_.find(context);
        if (it == entries_.end()) {
            entries_.emplace(context, conditions);
            continue;
        }
        std::set<NormCondition> narrowed;
        std::set_intersection(it->second.begin(), it->second.end(), conditions.begin(),
                              conditions.end(), std::inserter(narrowed, narrowed.begin()));
        it->second = std::move(narrowed);
    }
}

std::vector<Norm> ObligationLattice::to_norms() const {
    std::vector<Norm> out;
    for (const auto& [context, conditions] : entries_)
        for (const NormCondition& condition : conditions)
            out.push_back(Norm{Modality::Obligation, context, condition, std::nullopt});
    return out;
}

NormLearner::NormLearner(Domain domain, LearnerConfig config)
    : domain_(std::move(domain)), config_(std::move(config)) {}

Recognition NormLearner::recognize_cached(
    const Domain& domain, const LearnerConfig& config, const Run& run, std::size_t run_index,
    std::map<std::pair<State, std::vector<Task>>, std::shared_ptr<const Grammar>>& grammars) {
    try {
        std::vector<Task> goals;
        if (run.goal)
            goals.push_back(*run.goal);
        else
            goals = config.goal_tasks;
        auto key = std::make_pair(run.initial_state, goals);
        auto it = grammars.find(key);
        if (it == grammars.end()) {
            GroundDomain ground = ground_domain(domain, run.initial_state, config.ground_cap);
            std::vector<Task> effective = goals;
            if (effective.empty())
                effective = default_goal_tasks(domain, ground);
            auto grammar = std::make_shared<const Grammar>(to_grammar(ground, effective));
            it = grammars.emplace(std::move(key), std::move(grammar)).first;
        }
        return recognize_with_grammar(domain, *it->second, run);
    } catch (Error& e) {
        e.add_context("run #" + std::to_string(run_index + 1));
        throw;
    }
}

Recognition NormLearner::observe(const Run& run) {
    Recognition recognition = recognize_cached(domain_, config_, run, runs_, grammars_);
    const Plan& plan = recognition.plan;

    ComplianceEvidence compliance = extract_compliance_evidence(plan);
    std::set<CandidateNorm> avoided =
        extract_avoidance_evidence(plan, domain_, config_.depth_cap, &plans_);

    disproved_.insert(compliance.executed.begin(), compliance.executed.end());
    potential_.insert(avoided.begin(), avoided.end());
    for (auto it = potential_.begin(); it != potential_.end();) {
        if (disproved_.count(*it))
            it = potential_.erase(it);
        else
            ++it;
    }
    lattice_.intersect(compliance.obligations);

    ++runs_;
    return recognition;
}

NormSet NormLearner::result() const {
    std::vector<Norm> norms = lattice_.to_norms();
    for (const CandidateNorm& c : potential_)
        norms.push_back(c.to_norm());
    return NormSet(std::move(norms));
}

LearnResult learn_norms(const std::vector<Run>& runs, const Domain& domain, LearnerConfig config) {
    NormLearner learner(domain, std::move(config));
    for (const Run& run : runs)
        learner.observe(run);
    return LearnResult{learner.potential_obligations(), learner.potential_prohibitions()};
}

const Counter* CounterTable::find(const Task& context, const NormCondition& condition) const {
    auto it = entries_.find(context);
    if (it == entries_.end())
        return nullptr;
    auto jt = it->second.find(condition);
    return jt == it->second.end() ? nullptr : &jt->second;
}

Counter CounterTable::get(const Task& context, const NormCondition& condition) const {
    const Counter* c = find(context, condition);
    return c ? *c : Counter{};
}

void CounterTable::add_supporting(const Task& context, const NormCondition& condition,
                                  std::uint64_t n) {
    entries_[context][condition].supporting += n;
}

void CounterTable::add_refuting(const Task& context, const NormCondition& condition,
                                std::uint64_t n) {
    entries_[context][condition].refuting += n;
}

void CounterTable::merge(const CounterTable& other) {
    for (const auto& [context, conditions] : other.entries_) {
        for (const auto& [condition, counter] : conditions) {
            Counter& mine = entries_[context][condition];
            mine.supporting += counter.supporting;
            mine.refuting += counter.refuting;
        }
    }
}

std::size_t CounterTable::size() const {
    std::size_t n = 0;
    for (const auto& [_, conditions] : entries_)
        n += conditions.size();
    return n;
}

void update_counters(const Plan& plan, const Domain& domain, CounterTable& obligation_counters,
                     CounterTable& prohibition_counters, bool obligation_refutation,
                     std::size_t depth_cap, PlanCache* cache) {
    PlanCache local;
    PlanCache& plans = cache ? *cache : local;

    std::vector<const DecompositionNode*> nodes = collect_nodes(plan);
    std::vector<std::set<NormCondition>> realized(nodes.size());

    for (std::size_t i = 0; i < nodes.size(); ++i) {
        realized[i] = realized_conditions(*nodes[i]);
        for (const NormCondition& condition : realized[i]) {
            obligation_counters.add_supporting(nodes[i]->task, condition);
            prohibition_counters.add_refuting(nodes[i]->task, condition);
        }
    }

    ObservedIndex observed(plan);
    for (const DecompositionNode* node : nodes) {
        for (const Plan& alternative : plans.plans(domain, node->task, node->state_before,
                                                   depth_cap)) {
            for (const DecompositionNode* alt : collect_nodes(alternative)) {
                for (const Task& sub : subtasks_of(*alt)) {
                    if (!observed.saw_subtask(alt->task, sub))
                        prohibition_counters.add_supporting(alt->task, sub);
                }
                for (const State& entered : entered_state_set(*alt)) {
                    if (!observed.saw_state(alt->task, entered))
                        prohibition_counters.add_supporting(alt->task, entered);
                }
            }
        }
    }

    if (obligation_refutation) {
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            auto it = obligation_counters.entries().find(nodes[i]->task);
            if (it == obligation_counters.entries().end())
                continue;
            std::vector<NormCondition> missed;
            for (const auto& [condition, _] : it->second) {
                if (!realized[i].count(condition))
                    missed.push_back(condition);
            }
            for (const NormCondition& condition : missed)
                obligation_counters.add_refuting(nodes[i]->task, condition);
        }
    }
}

ThresholdLearner::ThresholdLearner(Domain domain, ThresholdConfig config)
    : domain_(std::move(domain)), config_(std::move(config)) {
    if (!(config_.obligation_threshold > 0.0) || !(config_.prohibition_threshold > 0.0))
        throw InvalidThresholdError("thresholds must be positive, got OT=" +
                                    std::to_string(config_.obligation_threshold) + " FT=" +
                                    std::to_string(config_.prohibition_threshold));
}

Recognition ThresholdLearner::observe(const Run& run) {
    LearnerConfig base{config_.goal_tasks, config_.depth_cap, config_.ground_cap};
    Recognition recognition =
        NormLearner::recognize_cached(domain_, base, run, runs_, grammars_);
    update_counters(recognition.plan, domain_, obligation_counters_, prohibition_counters_,
                    config_.obligation_refutation, config_.depth_cap, &plans_);
    ++runs_;
    return recognition;
}

NormSet ThresholdLearner::result() const {
    std::set<CandidateNorm> obligations;
    for (const auto& [context, conditions] : obligation_counters_.entries()) {
        for (const auto& [condition, counter] : conditions) {
            bool keep = counter.refuting == 0
                            ? counter.supporting > 0
                            : static_cast<double>(counter.supporting) /
                                      static_cast<double>(counter.refuting) >
                                  config_.obligation_threshold;
            if (keep)
                obligations.insert(CandidateNorm{Modality::Obligation, context, condition});
        }
    }
    std::set<CandidateNorm> prohibitions;
    for (const auto& [context, conditions] : prohibition_counters_.entries()) {
        for (const auto& [condition, counter] : conditions) {
            bool keep = counter.refuting == 0 ||
                        static_cast<double>(counter.supporting) /
                                static_cast<double>(counter.refuting) >
                            config_.prohibition_threshold;
            if (keep)
                prohibitions.insert(CandidateNorm{Modality::Prohibition, context, condition});
        }
    }

    // A condition cannot be both obligatory and forbidden in one context;
    // contradictory survivors eliminate each other.
    std::vector<Norm> norms;
    for (const CandidateNorm& o : obligations) {
        CandidateNorm twin{Modality::Prohibition, o.context, o.condition};
        if (prohibitions.count(twin))
            continue;
        Norm n = o.to_norm();
        Counter c = obligation_counters_.get(o.context, o.condition);
        n.evidence = Evidence{c.supporting, c.refuting};
        norms.push_back(std::move(n));
    }
    for (const CandidateNorm& f : prohibitions) {
        CandidateNorm twin{Modality::Obligation, f.context, f.condition};
        if (obligations.count(twin))
            continue;
        Norm n = f.to_norm();
        Counter c = prohibition_counters_.get(f.context, f.condition);
        n.evidence = Evidence{c.supporting, c.refuting};
        norms.push_back(std::move(n));
    }
    return NormSet(std::move(norms));
}

NormSet threshold_learn(const std::vector<Run>& runs, const Domain& domain,
                        const ThresholdConfig& config) {
    ThresholdLearner learner(domain, config);
    for (const Run& run : runs)
        learner.observe(run);
    return learner.result();
}

} // namespace normid
