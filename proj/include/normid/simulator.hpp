#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "normid/learner.hpp"

namespace normid {

// Deterministic random source. Built on std::mt19937_64, whose output
// sequence the standard pins down exactly, with hand-rolled sampling on
// top so that artifacts are byte-identical across platforms and library
// implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    // Uniform in [0, 1), 53 bits of the next engine output.
    double next_unit();

    // Uniform in [0, n), unbiased via rejection; n must be positive.
    std::size_t next_index(std::size_t n);

private:
    std::mt19937_64 engine_;
};

struct GoalChoice {
    Task task;
    double weight = 1.0;
};

// A society to simulate: agents pursue weighted goals from a fixed initial
// state and comply with the planted norms, except that each run violates
// with probability violation_rate.
struct Scenario {
    Domain domain;
    NormSet planted;
    std::vector<GoalChoice> goals;
    double violation_rate = 0.0;
    std::uint64_t seed = 0;
    State initial_state;
};

// Plans for goal that violate none of the norms. Throws
// NoCompliantPlanError when the norms exclude every plan.
std::vector<Plan> compliant_plans(const Domain& domain, const State& initial, const Task& goal,
                                  const NormSet& norms, std::size_t depth_cap = kDefaultDepthCap);

// n runs, each sampled with three draws: goal by weight, violate-or-not,
// then a uniform plan from the compliant pool (or from the violating pool
// when violating; a goal with no violating plan falls back to compliant).
// Every run records its goal.
std::vector<Run> generate_runs(const Scenario& scenario, std::size_t n,
                               std::size_t depth_cap = kDefaultDepthCap);

struct ModalityReport {
    double precision = 1.0;
    double recall = 1.0;
    bool empty_learned = false;  // precision 1.0 by convention
    bool empty_planted = false;  // recall 1.0 by convention
    std::vector<Norm> true_positives;
    std::vector<Norm> false_positives;
    std::vector<Norm> misses;
    // Planted norms no compliant stream can reveal: obligations whose
    // condition every plan realizes, either modality when no plan can
    // realize the condition at all. Excluded from the recall denominator.
    std::vector<Norm> undetectable;
};

struct EvaluationReport {
    ModalityReport obligations;
    ModalityReport prohibitions;
    std::size_t observed_context_count = 0;
};

// Scores learned against planted norms over the contexts the runs actually
// visited. Planted norms with variables are instantiated against observed
// context tasks before comparison.
EvaluationReport evaluate(const NormSet& learned, const NormSet& planted,
                          const std::vector<Run>& runs, const Domain& domain,
                          const std::vector<Task>& goal_tasks = {},
                          std::size_t depth_cap = kDefaultDepthCap,
                          std::size_t ground_cap = kDefaultGroundCap);

} // namespace normid
