#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "normid/simulator.hpp"

namespace normid {

// Textual grammar shared by all file formats:
//
//   name    := [A-Za-z0-9_-]+        leading upper case or '_' marks a variable
//   term    := name
//   atom    := name | name '(' term (',' term)* ')'
//   literal := ['!'] atom
//   task    := same shape as atom
//
// Spaces are allowed after '(' and ',', before ')', around '!', and around
// the whole expression. Parsers consume the entire string or throw IoError.
Term parse_term(const std::string& text);
Atom parse_atom(const std::string& text);
Literal parse_literal(const std::string& text);
Task parse_task(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& content);

// Domain file: a JSON object
//   {"constants": [...], "predicates": ["at/1", ...],
//    "operators": [{"name", "params", "pre", "add", "del"}, ...],
//    "methods":   [{"name", "params", "task", "precond_pos", "precond_neg",
//                   "subtasks"}, ...]}
// pre/add/del and precond_pos/precond_neg/subtasks/params default to empty.
// Unknown keys are rejected.
Domain load_domain(const std::filesystem::path& path);
Domain parse_domain(const std::string& text, const std::string& origin);

// Run-trace file: a JSON array of
//   {"initial_state": [atom, ...], "actions": [task, ...], "goal": task?}
// Actions are validated against the domain's operators.
std::vector<Run> load_runs(const std::filesystem::path& path, const Domain& domain);
std::vector<Run> parse_runs(const std::string& text, const Domain& domain,
                            const std::string& origin);
std::string runs_to_string(const std::vector<Run>& runs);
void save_runs(const std::vector<Run>& runs, const std::filesystem::path& path);

// Norm file: a JSON array of
//   {"modality": "O"|"F", "context": task,
//    "condition": task | {"state": [atom, ...]},
//    "evidence": {"supporting": n, "refuting": n}?}
NormSet load_norms(const std::filesystem::path& path);
NormSet parse_norms(const std::string& text, const std::string& origin);
std::string norms_to_string(const NormSet& norms);
void save_norms(const NormSet& norms, const std::filesystem::path& path);

// Atom strings -> validated ground state; goal string -> validated ground
// task. Used for command-line arguments.
State parse_state_strings(const std::vector<std::string>& atoms, const Domain& domain,
                          const std::string& where);
Task parse_goal_task(const std::string& text, const Domain& domain);

// Scenario file: a JSON object
//   {"domain": path, "norms": path, "goals": [{"task": task, "weight": w}],
//    "violation_rate": p, "seed": n, "initial_state": [atom, ...]?}
// Relative domain/norms paths resolve against the scenario file's directory;
// weight defaults to 1, initial_state to the empty state.
Scenario load_scenario(const std::filesystem::path& path);

// Indented tree rendering, two spaces per level, compound nodes annotated
// with the method that produced them:
//   travel(aberdeen,paris)  [fly {X=aberdeen, Y=paris, Z=london}]
//     goto(aberdeen,london)
//     goto(london,paris)
std::string render_tree(const NodePtr& root);
std::string tree_to_json_string(const NodePtr& root);

std::string recognition_to_text(const Recognition& recognition);
std::string recognition_to_json_string(const Recognition& recognition);
std::string recognitions_to_json_string(const std::vector<Recognition>& recognitions);

std::string report_to_text(const EvaluationReport& report);
std::string report_to_json_string(const EvaluationReport& report);

} // namespace normid
