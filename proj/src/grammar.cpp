#include "normid/grammar.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <set>

#include "normid/errors.hpp"

namespace normid {

Grammar::Grammar(std::vector<Task> terminals, std::vector<Task> nonterminals,
                 std::vector<Production> productions, Task start, bool synthetic_start)
    : terminals_(std::move(terminals)), nonterminals_(std::move(nonterminals)),
      productions_(std::move(productions)), start_(std::move(start)),
      synthetic_start_(synthetic_start) {
    std::sort(terminals_.begin(), terminals_.end());
    terminals_.erase(std::unique(terminals_.begin(), terminals_.end()), terminals_.end());
    std::sort(nonterminals_.begin(), nonterminals_.end());
    nonterminals_.erase(std::unique(nonterminals_.begin(), nonterminals_.end()),
                        nonterminals_.end());
    std::sort(productions_.begin(), productions_.end());
    if (!is_nonterminal(start_))
        throw DomainError("grammar start symbol " + start_.to_string() + " is not a nonterminal");
    for (const Production& p : productions_) {
        if (!is_nonterminal(p.lhs))
            throw DomainError("production head " + p.lhs.to_string() + " is not a nonterminal");
        for (const Task& t : p.rhs) {
            if (!is_terminal(t) && !is_nonterminal(t))
                throw DomainError("production symbol " + t.to_string() + " is not declared");
        }
    }
}

bool Grammar::is_terminal(const Task& symbol) const {
    return std::binary_search(terminals_.begin(), terminals_.end(), symbol);
}

bool Grammar::is_nonterminal(const Task& symbol) const {
    return std::binary_search(nonterminals_.begin(), nonterminals_.end(), symbol);
}

std::string ParseTree::to_string() const {
    std::string out = symbol.to_string();
    if (!children.empty()) {
        out += '(';
        for (std::size_t i = 0; i < children.size(); ++i) {
            if (i > 0)
                out += ',';
            out += children[i]->to_string();
        }
        out += ')';
    }
    return out;
}

namespace {

struct Item {
    int production;
    int dot;
    int origin;

    friend auto operator<=>(const Item&, const Item&) = default;
};

// Earley chart plus the bookkeeping needed to enumerate every parse tree
// afterwards. Symbols are interned to small integers; negative ids never
// occur, terminals and nonterminals share one id space.
class Parser {
public:
    Parser(const Grammar& grammar, std::span<const Task> observed)
        : grammar_(grammar), n_(observed.size()) {
        for (const Task& t : grammar.nonterminals())
            intern(t, false);
        for (const Task& t : grammar.terminals())
            intern(t, true);
        productions_by_lhs_.resize(symbols_.size());
        rhs_ids_.resize(grammar.productions().size());
        for (std::size_t p = 0; p < grammar.productions().size(); ++p) {
            const Production& prod = grammar.productions()[p];
            productions_by_lhs_[id_of(prod.lhs)].push_back(static_cast<int>(p));
            for (const Task& t : prod.rhs)
                rhs_ids_[p].push_back(id_of(t));
        }
        observed_.reserve(observed.size());
        for (std::size_t i = 0; i < observed.size(); ++i) {
            auto it = ids_.find(observed[i]);
            if (it == ids_.end() || !terminal_[it->second])
                throw NoParseError("observed action #" + std::to_string(i + 1) + " (" +
                                   observed[i].to_string() + ") is not a derivable primitive task");
            observed_.push_back(it->second);
        }
    }

    std::vector<ParseTreePtr> run() {
        build_chart();
        int start = id_of(grammar_.start());
        if (!has_span(start, 0, static_cast<int>(n_)))
            throw NoParseError("observed sequence of " + std::to_string(n_) +
                               " action(s) is not derivable from goal " +
                               grammar_.start().to_string());
        auto trees = trees_for(start, 0, static_cast<int>(n_));
        return *trees;
    }

private:
    const Grammar& grammar_;
    std::size_t n_;
    std::map<Task, int> ids_;
    std::vector<const Task*> symbols_;
    std::vector<bool> terminal_;
    std::vector<std::vector<int>> productions_by_lhs_;
    std::vector<std::vector<int>> rhs_ids_;
    std::vector<int> observed_;

    std::vector<std::set<Item>> chart_;
    std::deque<Item> work_;
    // completed_[sym] maps origin -> set of end positions.
    std::map<int, std::map<int, std::set<int>>> completed_;

    void intern(const Task& t, bool is_terminal) {
        auto [it, inserted] = ids_.emplace(t, static_cast<int>(symbols_.size()));
        if (inserted) {
            symbols_.push_back(&it->first);
            terminal_.push_back(is_terminal);
        }
    }

    int id_of(const Task& t) const { return ids_.at(t); }

    bool has_span(int sym, int from, int to) const {
        auto by_sym = completed_.find(sym);
        if (by_sym == completed_.end())
            return false;
        auto by_origin = by_sym->second.find(from);
        return by_origin != by_sym->second.end() && by_origin->second.count(to) > 0;
    }

    void add_item(int position, const Item& item) {
        if (chart_[position].insert(item).second)
            work_.push_back(item);
    }

    void build_chart() {
        chart_.assign(n_ + 1, {});
        int start = id_of(grammar_.start());
        for (int position = 0; position <= static_cast<int>(n_); ++position) {
            if (position == 0) {
                for (int p : productions_by_lhs_[start])
                    add_item(0, Item{p, 0, 0});
            }
            while (!work_.empty()) {
                Item item = work_.front();
                work_.pop_front();
                const std::vector<int>& rhs = rhs_ids_[item.production];
                if (item.dot < static_cast<int>(rhs.size())) {
                    int next = rhs[item.dot];
                    if (terminal_[next]) {
                        if (position < static_cast<int>(n_) && observed_[position] == next)
                            chart_[position + 1].insert(Item{item.production, item.dot + 1,
                                                             item.origin});
                    } else {
                        for (int p : productions_by_lhs_[next])
                            add_item(position, Item{p, 0, position});
                        // A nullable completion of next at this position may
                        // already be recorded; advance over it now, the
                        // completer handles the opposite arrival order.
                        if (has_span(next, position, position))
                            add_item(position, Item{item.production, item.dot + 1, item.origin});
                    }
                } else {
                    int lhs = id_of(grammar_.productions()[item.production].lhs);
                    completed_[lhs][item.origin].insert(position);
                    std::vector<Item> waiting(chart_[item.origin].begin(),
                                              chart_[item.origin].end());
                    for (const Item& w : waiting) {
                        const std::vector<int>& wrhs = rhs_ids_[w.production];
                        if (w.dot < static_cast<int>(wrhs.size()) && wrhs[w.dot] == lhs)
                            add_item(position, Item{w.production, w.dot + 1, w.origin});
                    }
                }
            }
            if (position < static_cast<int>(n_)) {
                for (const Item& item : chart_[position + 1])
                    work_.push_back(item);
            }
        }
    }

    // End positions a symbol can span starting at from, per the chart.
    std::vector<int> spans(int sym, int from) const {
        if (terminal_[sym]) {
            if (from < static_cast<int>(n_) && observed_[from] == sym)
                return {from + 1};
            return {};
        }
        auto by_sym = completed_.find(sym);
        if (by_sym == completed_.end())
            return {};
        auto by_origin = by_sym->second.find(from);
        if (by_origin == by_sym->second.end())
            return {};
        return {by_origin->second.begin(), by_origin->second.end()};
    }

    std::map<std::tuple<int, int, int>, std::set<int>> seq_reach_memo_;

    // Ends reachable from position from by deriving rhs[k..] of production p.
    const std::set<int>& seq_reach(int p, int k, int from) {
        auto key = std::make_tuple(p, k, from);
        auto it = seq_reach_memo_.find(key);
        if (it != seq_reach_memo_.end())
            return it->second;
        std::set<int>& out = seq_reach_memo_[key];
        const std::vector<int>& rhs = rhs_ids_[p];
        if (k == static_cast<int>(rhs.size())) {
            out.insert(from);
            return out;
        }
        for (int mid : spans(rhs[k], from)) {
            const std::set<int>& rest = seq_reach(p, k + 1, mid);
            out.insert(rest.begin(), rest.end());
        }
        return out;
    }

    std::map<std::tuple<int, int, int>, std::shared_ptr<std::vector<ParseTreePtr>>> tree_memo_;

    std::shared_ptr<std::vector<ParseTreePtr>> trees_for(int sym, int from, int to) {
        auto key = std::make_tuple(sym, from, to);
        auto it = tree_memo_.find(key);
        if (it != tree_memo_.end())
            return it->second;
        auto out = std::make_shared<std::vector<ParseTreePtr>>();
        tree_memo_[key] = out;
        if (terminal_[sym]) {
            if (to == from + 1 && observed_[from] == sym) {
                auto leaf = std::make_shared<ParseTree>();
                leaf->symbol = *symbols_[sym];
                out->push_back(std::move(leaf));
            }
            return out;
        }
        for (int p : productions_by_lhs_[sym]) {
            std::vector<std::vector<ParseTreePtr>> child_rows;
            std::vector<ParseTreePtr> prefix;
            collect_rows(p, 0, from, to, prefix, child_rows);
            for (std::vector<ParseTreePtr>& row : child_rows) {
                auto node = std::make_shared<ParseTree>();
                node->symbol = *symbols_[sym];
                node->production = &grammar_.productions()[p];
                node->children = std::move(row);
                out->push_back(std::move(node));
            }
        }
        return out;
    }

    // Depth-first split enumeration for rhs[k..] of production p over
    // [from, to), ascending split points, collecting child vectors.
    void collect_rows(int p, int k, int from, int to, std::vector<ParseTreePtr>& prefix,
                      std::vector<std::vector<ParseTreePtr>>& rows) {
        const std::vector<int>& rhs = rhs_ids_[p];
        if (k == static_cast<int>(rhs.size())) {
            if (from == to)
                rows.push_back(prefix);
            return;
        }
        for (int mid : spans(rhs[k], from)) {
            if (mid > to || !seq_reach(p, k + 1, mid).count(to))
                continue;
            for (const ParseTreePtr& tree : *trees_for(rhs[k], from, mid)) {
                prefix.push_back(tree);
                collect_rows(p, k + 1, mid, to, prefix, rows);
                prefix.pop_back();
            }
        }
    }
};

} // namespace

std::vector<ParseTreePtr> parse(const Grammar& grammar, std::span<const Task> observed) {
    Parser parser(grammar, observed);
    return parser.run();
}

Grammar to_grammar(const GroundDomain& ground, const std::vector<Task>& goal_tasks) {
    if (goal_tasks.empty())
        throw EmptyGrammarError("no goal tasks given");
    std::vector<Task> goals = goal_tasks;
    std::sort(goals.begin(), goals.end());
    goals.erase(std::unique(goals.begin(), goals.end()), goals.end());
    for (const Task& g : goals) {
        if (!g.ground())
            throw DomainError("goal task " + g.to_string() + " is not ground");
    }

    std::set<std::string> compound_symbols(ground.compound_symbols.begin(),
                                           ground.compound_symbols.end());
    auto is_compound_task = [&](const Task& t) { return compound_symbols.count(t.symbol) > 0; };

    std::vector<Task> terminals = ground.primitive_tasks();
    std::set<Task> nonterminals;
    std::vector<Production> productions;
    for (const GroundMethod& m : ground.methods) {
        nonterminals.insert(m.task);
        Production p;
        p.lhs = m.task;
        p.rhs = m.network;
        p.method_name = m.name;
        p.method_grounding = m.grounding;
        for (const Task& t : m.network) {
            if (is_compound_task(t))
                nonterminals.insert(t);
            else
                terminals.push_back(t);
        }
        productions.push_back(std::move(p));
    }

    std::size_t derivable_goals = 0;
    for (const Task& g : goals) {
        bool has_method = std::any_of(ground.methods.begin(), ground.methods.end(),
                                      [&](const GroundMethod& m) { return m.task == g; });
        if (has_method)
            ++derivable_goals;
        if (is_compound_task(g))
            nonterminals.insert(g);
    }
    if (derivable_goals == 0)
        throw EmptyGrammarError("no goal task has a method in the ground domain");

    Task start;
    bool synthetic_start = goals.size() > 1;
    if (synthetic_start) {
        start = Task{"<start>", {}};
        nonterminals.insert(start);
        for (const Task& g : goals) {
            Production p;
            p.lhs = start;
            p.rhs = {g};
            p.synthetic = true;
            if (!is_compound_task(g))
                terminals.push_back(g);
            productions.push_back(std::move(p));
        }
    } else {
        start = goals.front();
        if (!is_compound_task(start))
            throw EmptyGrammarError("goal task " + start.to_string() + " has no methods");
    }

    return Grammar(std::move(terminals),
                   std::vector<Task>(nonterminals.begin(), nonterminals.end()),
                   std::move(productions), std::move(start), synthetic_start);
}

} // namespace normid
