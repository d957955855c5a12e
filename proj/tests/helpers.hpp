#pragma once

#include <cstdint>
#include <functional>
#include <initializer_list>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "normid/io.hpp"
#include "normid/learner.hpp"
#include "normid/planner.hpp"

namespace testutil {

inline std::string fixture_path(const std::string& name) {
    return std::string(NORMID_FIXTURE_DIR) + "/" + name;
}

inline normid::Domain fixture_domain(const std::string& name) {
    return normid::load_domain(fixture_path(name));
}

inline normid::State st(std::initializer_list<std::string> atoms) {
    std::vector<normid::Atom> v;
    for (const auto& a : atoms)
        v.push_back(normid::parse_atom(a));
    return normid::State(std::move(v));
}

inline normid::State travel_initial() {
    return st({"at(aberdeen)", "connect(aberdeen,london)", "connect(london,paris)"});
}

inline normid::Task gt(const std::string& text) { return normid::parse_task(text); }

inline normid::CandidateNorm ctask(normid::Modality m, const std::string& ctx,
                                   const std::string& cond) {
    return normid::CandidateNorm{m, normid::parse_task(ctx), normid::parse_task(cond)};
}

inline normid::CandidateNorm cstate(normid::Modality m, const std::string& ctx,
                                    const normid::State& s) {
    return normid::CandidateNorm{m, normid::parse_task(ctx), s};
}

inline normid::Norm ntask(normid::Modality m, const std::string& ctx, const std::string& cond) {
    return normid::Norm{m, normid::parse_task(ctx), normid::parse_task(cond), std::nullopt};
}

inline normid::Norm nstate(normid::Modality m, const std::string& ctx, const normid::State& s) {
    return normid::Norm{m, normid::parse_task(ctx), s, std::nullopt};
}

inline normid::Run mk_run(const normid::Domain& domain, const normid::State& initial,
                          std::initializer_list<std::string> actions,
                          std::optional<std::string> goal = std::nullopt) {
    normid::Run run;
    run.initial_state = initial;
    for (const auto& a : actions)
        run.observations.push_back(domain.make_action(normid::parse_task(a)));
    if (goal)
        run.goal = normid::parse_task(*goal);
    return run;
}

inline const normid::DecompositionNode* find_node(const normid::Plan& plan,
                                                  const std::string& symbol) {
    for (const normid::DecompositionNode* n : normid::collect_nodes(plan))
        if (n->task.symbol == symbol)
            return n;
    return nullptr;
}

inline std::vector<std::string> action_symbols(const normid::Plan& plan) {
    std::vector<std::string> out;
    for (const normid::Action& a : plan.actions)
        out.push_back(a.task.symbol);
    return out;
}

// ---------------------------------------------------------------------------
// Random effect-free domains for differential testing. Compound symbols
// c0..c{k-1} only ever reference higher numbered compounds, so the
// decomposition graph is acyclic and c0 is a top-level task. With markers
// every method opens with a primitive unique to it, which makes the induced
// grammar unambiguous.

struct GeneratedMethod {
    std::string name;
    std::string lhs;
    std::vector<std::string> network;
};

struct GeneratedDomain {
    normid::Domain domain;
    std::vector<std::string> compounds;
    std::vector<std::string> primitives;
    std::vector<GeneratedMethod> methods;
};

inline GeneratedDomain generate_effect_free_domain(std::mt19937_64& rng, bool markers,
                                                   std::size_t yield_cap = 80,
                                                   std::size_t length_cap = 40) {
    auto pick = [&rng](std::size_t lo, std::size_t hi) {
        return lo + static_cast<std::size_t>(rng() % (hi - lo + 1));
    };
    for (int attempt = 0; attempt < 256; ++attempt) {
        GeneratedDomain g;
        std::size_t nc = pick(2, 5), np = pick(2, 4);
        for (std::size_t i = 0; i < nc; ++i)
            g.compounds.push_back("c" + std::to_string(i));
        for (std::size_t i = 0; i < np; ++i)
            g.primitives.push_back("p" + std::to_string(i));
        std::size_t marker_seq = 0;
        for (std::size_t i = 0; i < nc; ++i) {
            std::size_t nm = pick(1, 3);
            for (std::size_t j = 0; j < nm; ++j) {
                GeneratedMethod m;
                m.name = "m" + std::to_string(i) + "_" + std::to_string(j);
                m.lhs = g.compounds[i];
                std::size_t len = pick(0, 3);
                std::size_t deeper = nc - i - 1;
                for (std::size_t k = 0; k < len; ++k) {
                    std::size_t r = pick(0, deeper + np - 1);
                    m.network.push_back(r < deeper ? g.compounds[i + 1 + r]
                                                   : g.primitives[r - deeper]);
                }
                if (markers) {
                    std::string mk = "k" + std::to_string(marker_seq++);
                    g.primitives.push_back(mk);
                    m.network.insert(m.network.begin(), mk);
                }
                g.methods.push_back(std::move(m));
            }
        }
        // Reject shapes whose plan count or plan length would blow up.
        std::map<std::string, std::size_t> count, max_len;
        for (const auto& p : g.primitives) {
            count[p] = 1;
            max_len[p] = 1;
        }
        bool ok = true;
        for (std::size_t i = nc; i-- > 0 && ok;) {
            std::size_t total = 0, longest = 0;
            for (const auto& m : g.methods) {
                if (m.lhs != g.compounds[i])
                    continue;
                std::size_t prod = 1, len = 0;
                for (const auto& s : m.network) {
                    prod = std::min<std::size_t>(prod * count[s], yield_cap + 1);
                    len += max_len[s];
                }
                total = std::min<std::size_t>(total + prod, yield_cap + 1);
                longest = std::max(longest, len);
            }
            count[g.compounds[i]] = total;
            max_len[g.compounds[i]] = longest;
            ok = total <= yield_cap && longest <= length_cap;
        }
        if (!ok)
            continue;
        std::vector<normid::Operator> ops;
        for (const auto& p : g.primitives)
            ops.push_back(normid::Operator{p, {}, {}, {}, {}});
        std::vector<normid::Method> ms;
        for (const auto& m : g.methods) {
            normid::Method mm;
            mm.name = m.name;
            mm.task = normid::Task{m.lhs, {}};
            for (const auto& s : m.network)
                mm.network.push_back(normid::Task{s, {}});
            ms.push_back(std::move(mm));
        }
        g.domain = normid::Domain(normid::Lang{}, std::move(ops), std::move(ms));
        return g;
    }
    throw std::runtime_error("could not generate a bounded random domain");
}

// Depth-first expansion in the planner's order: methods of a task by name,
// leftmost subtask varying slowest. Rows are (action sequence, tree text).
struct OracleRow {
    std::vector<std::string> yield;
    std::string tree;
};

inline bool is_generated_compound(const GeneratedDomain& g, const std::string& sym) {
    for (const auto& c : g.compounds)
        if (c == sym)
            return true;
    return false;
}

inline std::vector<OracleRow> dfs_expansion(const GeneratedDomain& g, const std::string& symbol) {
    if (!is_generated_compound(g, symbol))
        return {OracleRow{{symbol}, symbol}};
    std::vector<const GeneratedMethod*> ms;
    for (const auto& m : g.methods)
        if (m.lhs == symbol)
            ms.push_back(&m);
    std::sort(ms.begin(), ms.end(),
              [](const GeneratedMethod* a, const GeneratedMethod* b) { return a->name < b->name; });
    std::vector<OracleRow> out;
    for (const GeneratedMethod* m : ms) {
        std::vector<OracleRow> acc = {OracleRow{{}, ""}};
        for (const auto& sub : m->network) {
            std::vector<OracleRow> next;
            for (const auto& left : acc) {
                for (const auto& right : dfs_expansion(g, sub)) {
                    OracleRow row = left;
                    row.yield.insert(row.yield.end(), right.yield.begin(), right.yield.end());
                    row.tree += (left.tree.empty() ? "" : ",") + right.tree;
                    next.push_back(std::move(row));
                }
            }
            acc = std::move(next);
        }
        for (auto& row : acc) {
            row.tree = row.tree.empty() ? symbol : symbol + "(" + row.tree + ")";
            out.push_back(std::move(row));
        }
    }
    return out;
}

} // namespace testutil
