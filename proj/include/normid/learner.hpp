#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <vector>

#include "normid/norms.hpp"
#include "normid/recognizer.hpp"

namespace normid {

// A norm hypothesis over ground context and condition.
struct CandidateNorm {
    Modality modality;
    Task context;
    NormCondition condition;

    Norm to_norm() const { return Norm{modality, context, condition, std::nullopt}; }
    std::string to_string() const { return to_norm().to_string(); }

    friend auto operator<=>(const CandidateNorm&, const CandidateNorm&) = default;
};

// What one compliant plan reveals: everything that occurred under every
// context node. The same (context, condition) pairs read as obligations
// "it happened, maybe it had to" and as disproofs of prohibitions "it
// happened unsanctioned, so it cannot be forbidden".
struct ComplianceEvidence {
    std::set<CandidateNorm> obligations;
    std::set<CandidateNorm> executed;
};

ComplianceEvidence extract_compliance_evidence(const Plan& plan);

// Memoizes full plan enumerations keyed by (task, start state).
class PlanCache {
public:
    const std::vector<Plan>& plans(const Domain& domain, const Task& task, const State& state,
                                   std::size_t depth_cap);

private:
    std::map<std::pair<Task, State>, std::shared_ptr<const std::vector<Plan>>> cache_;
};

// Prohibition hypotheses from the roads not taken: for every node of the
// plan, every alternative decomposition of that node's task from that
// node's start state is enumerated, and any subtask or intermediate state
// the alternative contains under some task but the observed plan does not
// becomes a candidate prohibition in that task's context.
std::set<CandidateNorm> extract_avoidance_evidence(const Plan& plan, const Domain& domain,
                                                   std::size_t depth_cap = kDefaultDepthCap,
                                                   PlanCache* cache = nullptr);

// Per-context candidate sets for obligations. A context nobody has
// observed yet is implicitly at top ("anything might be obligatory");
// the first observation materializes an explicit set, which afterwards
// only ever shrinks.
class ObligationLattice {
public:
    bool observed(const Task& context) const;
    // nullptr means the context is still at top.
    const std::set<NormCondition>* conditions(const Task& context) const;

    // Context-wise intersection: contexts present in evidence are
    // materialized or narrowed, all others stay untouched.
    void intersect(const std::set<CandidateNorm>& obligations);

    const std::map<Task, std::set<NormCondition>>& entries() const { return entries_; }
    std::vector<Norm> to_norms() const;

private:
    std::map<Task, std::set<NormCondition>> entries_;
};

struct LearnerConfig {
    std::vector<Task> goal_tasks;  // empty: use the run's goal or the domain's top-level tasks
    std::size_t depth_cap = kDefaultDepthCap;
    std::size_t ground_cap = kDefaultGroundCap;
};

// Streaming candidate-elimination learner. Observing a run recognizes its
// plan, then narrows potential obligations by intersection and maintains
// potential prohibitions as everything avoided so far minus everything
// ever executed. Disproofs accumulate over the whole stream, so a
// prohibition executed in any run stays disproved forever.
class NormLearner {
public:
    explicit NormLearner(Domain domain, LearnerConfig config = {});

    Recognition observe(const Run& run);

    const ObligationLattice& potential_obligations() const { return lattice_; }
    const std::set<CandidateNorm>& potential_prohibitions() const { return potential_; }
    const std::set<CandidateNorm>& disproved_prohibitions() const { return disproved_; }
    std::size_t runs_observed() const { return runs_; }

    // Explicit lattice entries plus surviving prohibitions as one norm set.
    NormSet result() const;

    const Domain& domain() const { return domain_; }

private:
    Domain domain_;
    LearnerConfig config_;
    ObligationLattice lattice_;
    std::set<CandidateNorm> potential_;
    std::set<CandidateNorm> disproved_;
    std::size_t runs_ = 0;
    std::map<std::pair<State, std::vector<Task>>, std::shared_ptr<const Grammar>> grammars_;
    PlanCache plans_;

    friend class ThresholdLearner;
    static Recognition recognize_cached(
        const Domain& domain, const LearnerConfig& config, const Run& run, std::size_t run_index,
        std::map<std::pair<State, std::vector<Task>>, std::shared_ptr<const Grammar>>& grammars);
};

struct LearnResult {
    ObligationLattice obligations;
    std::set<CandidateNorm> prohibitions;
};

LearnResult learn_norms(const std::vector<Run>& runs, const Domain& domain,
                        LearnerConfig config = {});

struct Counter {
    std::uint64_t supporting = 0;
    std::uint64_t refuting = 0;

    friend auto operator<=>(const Counter&, const Counter&) = default;
};

// Evidence counters grouped by context. Absent entries count as (0, 0);
// entries are only materialized by increments.
class CounterTable {
public:
    const Counter* find(const Task& context, const NormCondition& condition) const;
    Counter get(const Task& context, const NormCondition& condition) const;
    void add_supporting(const Task& context, const NormCondition& condition,
                        std::uint64_t n = 1);
    void add_refuting(const Task& context, const NormCondition& condition, std::uint64_t n = 1);

    // Entry-wise addition; associative and commutative.
    void merge(const CounterTable& other);

    const std::map<Task, std::map<NormCondition, Counter>>& entries() const { return entries_; }
    std::size_t size() const;

    friend bool operator==(const CounterTable&, const CounterTable&) = default;

private:
    std::map<Task, std::map<NormCondition, Counter>> entries_;
};

// Folds one recognized plan into the obligation and prohibition counters.
// Occurrences support obligations and refute prohibitions; conditions only
// reachable through alternative decompositions support prohibitions. With
// obligation_refutation on, a context node also refutes every already
// materialized obligation whose condition it did not realize; that step
// runs after the occurrence counting of the same plan, which makes the
// fold order-sensitive in exactly that one respect.
void update_counters(const Plan& plan, const Domain& domain, CounterTable& obligation_counters,
                     CounterTable& prohibition_counters, bool obligation_refutation = true,
                     std::size_t depth_cap = kDefaultDepthCap, PlanCache* cache = nullptr);

struct ThresholdConfig {
    std::vector<Task> goal_tasks;
    std::size_t depth_cap = kDefaultDepthCap;
    std::size_t ground_cap = kDefaultGroundCap;
    double obligation_threshold = 3.0;
    double prohibition_threshold = 3.0;
    bool obligation_refutation = true;
};

// Counter-based learner tolerating norm-violating runs. Keeps an
// obligation when it was never refuted (and supported at least once) or
// its support/refutation ratio exceeds the obligation threshold; keeps a
// prohibition when never refuted or above the prohibition threshold; and
// drops any (context, condition) claimed by both modalities.
class ThresholdLearner {
public:
    ThresholdLearner(Domain domain, ThresholdConfig config);  // validates thresholds

    Recognition observe(const Run& run);

    const CounterTable& obligation_counters() const { return obligation_counters_; }
    const CounterTable& prohibition_counters() const { return prohibition_counters_; }
    std::size_t runs_observed() const { return runs_; }

    NormSet result() const;

private:
    Domain domain_;
    ThresholdConfig config_;
    CounterTable obligation_counters_;
    CounterTable prohibition_counters_;
    std::size_t runs_ = 0;
    std::map<std::pair<State, std::vector<Task>>, std::shared_ptr<const Grammar>> grammars_;
    PlanCache plans_;
};

NormSet threshold_learn(const std::vector<Run>& runs, const Domain& domain,
                        const ThresholdConfig& config);

} // namespace normid
