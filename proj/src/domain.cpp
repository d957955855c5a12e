#include "normid/domain.hpp"

#include <algorithm>
#include <set>

#include "normid/errors.hpp"

namespace normid {

bool Task::ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

std::string Task::to_string() const {
    std::string out = symbol;
    if (!args.empty()) {
        out += '(';
        for (std::size_t i = 0; i < args.size(); ++i) {
            if (i > 0)
                out += ',';
            out += args[i].name;
        }
        out += ')';
    }
    return out;
}

std::optional<Substitution> unify_task(const Task& pattern, const Task& instance,
                                       const Substitution& base) {
    if (pattern.symbol != instance.symbol || pattern.args.size() != instance.args.size())
        return std::nullopt;
    Substitution out = base;
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& p = pattern.args[i];
        const Term& g = instance.args[i];
        if (p.is_variable()) {
            if (!out.bind(p.name, g))
                return std::nullopt;
        } else if (p != g) {
            return std::nullopt;
        }
    }
    return out;
}

std::vector<std::string> Method::scope() const {
    std::vector<std::string> vars = params;
    for (const Term& t : task.args) {
        if (t.is_variable() && std::find(vars.begin(), vars.end(), t.name) == vars.end())
            vars.push_back(t.name);
    }
    return vars;
}

Domain::Domain(Lang lang, std::vector<Operator> operators, std::vector<Method> methods)
    : lang_(std::move(lang)), operators_(std::move(operators)), methods_(std::move(methods)) {
    std::sort(lang_.constants.begin(), lang_.constants.end());
    lang_.constants.erase(std::unique(lang_.constants.begin(), lang_.constants.end()),
                          lang_.constants.end());
    std::sort(operators_.begin(), operators_.end(),
              [](const Operator& a, const Operator& b) { return a.name < b.name; });
    std::sort(methods_.begin(), methods_.end(), [](const Method& a, const Method& b) {
        return std::tie(a.task.symbol, a.name) < std::tie(b.task.symbol, b.name);
    });
    validate();
}

void Domain::validate_atom(const Atom& atom, const std::string& where) const {
    auto it = lang_.predicates.find(atom.predicate);
    if (it == lang_.predicates.end())
        throw DomainError(where + ": undeclared predicate '" + atom.predicate + "'");
    if (it->second != atom.args.size())
        throw DomainError(where + ": predicate '" + atom.predicate + "' expects " +
                          std::to_string(it->second) + " arguments, got " +
                          std::to_string(atom.args.size()));
    for (const Term& t : atom.args) {
        if (!t.is_variable() &&
            !std::binary_search(lang_.constants.begin(), lang_.constants.end(), t.name))
            throw DomainError(where + ": undeclared constant '" + t.name + "'");
    }
}

void Domain::validate() const {
    for (const std::string& c : lang_.constants) {
        if (is_variable_name(c))
            throw DomainError("constant '" + c + "' is spelled like a variable");
    }

    std::set<std::string> primitive_symbols;
    for (const Operator& op : operators_) {
        if (!primitive_symbols.insert(op.name).second)
            throw DomainError("duplicate operator '" + op.name + "'");
        std::set<std::string> params(op.params.begin(), op.params.end());
        if (params.size() != op.params.size())
            throw DomainError("operator '" + op.name + "': parameters are not pairwise distinct");
        for (const std::string& p : op.params) {
            if (!is_variable_name(p))
                throw DomainError("operator '" + op.name + "': parameter '" + p +
                                  "' is not a variable name");
        }
        auto check_vars = [&](const Atom& atom, const char* part) {
            validate_atom(atom, "operator '" + op.name + "' " + part);
            for (const Term& t : atom.args) {
                if (t.is_variable() && !params.count(t.name))
                    throw DomainError("operator '" + op.name + "': free variable '" + t.name +
                                      "' in " + part);
            }
        };
        for (const Literal& l : op.preconditions)
            check_vars(l.atom, "precondition");
        for (const Atom& a : op.add_effects)
            check_vars(a, "add effect");
        for (const Atom& a : op.delete_effects)
            check_vars(a, "delete effect");
    }

    std::set<std::string> compound_symbols;
    std::set<std::string> method_names;
    for (const Method& m : methods_) {
        compound_symbols.insert(m.task.symbol);
        if (!method_names.insert(m.name).second)
            throw DomainError("duplicate method name '" + m.name + "'");
        if (primitive_symbols.count(m.task.symbol))
            throw DomainError("symbol '" + m.task.symbol +
                              "' is both an operator and a method task");
        std::set<std::string> params(m.params.begin(), m.params.end());
        if (params.size() != m.params.size())
            throw DomainError("method '" + m.name + "': parameters are not pairwise distinct");
        for (const std::string& p : m.params) {
            if (!is_variable_name(p))
                throw DomainError("method '" + m.name + "': parameter '" + p +
                                  "' is not a variable name");
        }
        std::vector<std::string> scope_list = m.scope();
        std::set<std::string> scope(scope_list.begin(), scope_list.end());
        auto check_scope = [&](const std::vector<Term>& args, const std::string& where) {
            for (const Term& t : args) {
                if (t.is_variable() && !scope.count(t.name))
                    throw DomainError("method '" + m.name + "': free variable '" + t.name +
                                      "' in " + where);
                if (!t.is_variable() && !std::binary_search(lang_.constants.begin(),
                                                            lang_.constants.end(), t.name))
                    throw DomainError("method '" + m.name + "': undeclared constant '" + t.name +
                                      "' in " + where);
            }
        };
        for (const Atom& a : m.precond_pos) {
            validate_atom(a, "method '" + m.name + "' precondition");
            check_scope(a.args, "precondition");
        }
        for (const Atom& a : m.precond_neg) {
            validate_atom(a, "method '" + m.name + "' precondition");
            check_scope(a.args, "precondition");
        }
        for (const Task& t : m.network)
            check_scope(t.args, "subtask " + t.to_string());
        check_scope(m.task.args, "task pattern");
    }

    // Networks may only reference declared task symbols.
    for (const Method& m : methods_) {
        for (const Task& t : m.network) {
            if (!primitive_symbols.count(t.symbol) && !compound_symbols.count(t.symbol))
                throw DomainError("method '" + m.name + "': subtask symbol '" + t.symbol +
                                  "' has no operator and no method");
        }
    }

    // The decomposition graph over task symbols must be acyclic.
    std::map<std::string, std::set<std::string>> edges;
    for (const Method& m : methods_)
        for (const Task& t : m.network)
            edges[m.task.symbol].insert(t.symbol);
    std::map<std::string, int> mark;  // 0 new, 1 open, 2 done
    auto dfs = [&](auto&& self, const std::string& symbol) -> void {
        int& state = mark[symbol];
        if (state == 1)
            throw DomainError("decomposition graph has a cycle through '" + symbol + "'");
        if (state == 2)
            return;
        state = 1;
        auto it = edges.find(symbol);
        if (it != edges.end())
            for (const std::string& next : it->second)
                self(self, next);
        state = 2;
    };
    for (const auto& [symbol, _] : edges)
        dfs(dfs, symbol);
}

bool Domain::is_primitive(const std::string& symbol) const {
    auto it = std::lower_bound(operators_.begin(), operators_.end(), symbol,
                               [](const Operator& op, const std::string& s) { return op.name < s; });
    return it != operators_.end() && it->name == symbol;
}

bool Domain::is_compound(const std::string& symbol) const {
    return !methods_for(symbol).empty();
}

const Operator& Domain::operator_for(const std::string& symbol) const {
    auto it = std::lower_bound(operators_.begin(), operators_.end(), symbol,
                               [](const Operator& op, const std::string& s) { return op.name < s; });
    if (it == operators_.end() || it->name != symbol)
        throw DomainError("no operator for task symbol '" + symbol + "'");
    return *it;
}

std::span<const Method> Domain::methods_for(const std::string& symbol) const {
    auto lo = std::lower_bound(methods_.begin(), methods_.end(), symbol,
                               [](const Method& m, const std::string& s) { return m.task.symbol < s; });
    auto hi = lo;
    while (hi != methods_.end() && hi->task.symbol == symbol)
        ++hi;
    return {lo, hi};
}

std::vector<std::string> Domain::top_level_symbols() const {
    std::set<std::string> in_network;
    for (const Method& m : methods_)
        for (const Task& t : m.network)
            in_network.insert(t.symbol);
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const Method& m : methods_) {
        if (!in_network.count(m.task.symbol) && seen.insert(m.task.symbol).second)
            out.push_back(m.task.symbol);
    }
    return out;
}

Action Domain::make_action(const Task& ground_primitive) const {
    const Operator& op = operator_for(ground_primitive.symbol);
    if (op.params.size() != ground_primitive.args.size())
        throw DomainError("action " + ground_primitive.to_string() + ": operator '" + op.name +
                          "' expects " + std::to_string(op.params.size()) + " arguments");
    if (!ground_primitive.ground())
        throw DomainError("action " + ground_primitive.to_string() + " is not ground");
    return Action{ground_primitive};
}

Substitution Domain::action_grounding(const Action& action) const {
    const Operator& op = operator_for(action.task.symbol);
    Substitution s;
    for (std::size_t i = 0; i < op.params.size(); ++i)
        s.bind(op.params[i], action.task.args[i]);
    return s;
}

bool applicable(const Domain& domain, const Action& action, const State& state) {
    const Operator& op = domain.operator_for(action.task.symbol);
    Substitution s = domain.action_grounding(action);
    for (const Literal& lit : op.preconditions) {
        Atom ground = s.apply(lit.atom);
        if (state.contains(ground) != lit.positive)
            return false;
    }
    return true;
}

State apply(const Domain& domain, const Action& action, const State& state) {
    if (!applicable(domain, action, state))
        return state;
    const Operator& op = domain.operator_for(action.task.symbol);
    Substitution s = domain.action_grounding(action);
    std::vector<Atom> add, del;
    add.reserve(op.add_effects.size());
    del.reserve(op.delete_effects.size());
    for (const Atom& a : op.add_effects)
        add.push_back(s.apply(a));
    for (const Atom& a : op.delete_effects)
        del.push_back(s.apply(a));
    return state.apply_effects(add, del);
}

std::vector<Task> GroundDomain::primitive_tasks() const {
    std::vector<Task> out;
    out.reserve(operators.size());
    for (const GroundOperator& op : operators)
        out.push_back(op.task);
    return out;
}

std::vector<Task> GroundDomain::compound_tasks() const {
    std::vector<Task> out;
    for (const GroundMethod& m : methods)
        out.push_back(m.task);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

namespace {

// Enumerates assignments of constants to vars in lexicographic order and
// feeds each resulting substitution to fn.
template <typename Fn>
void enumerate_groundings(const std::vector<std::string>& vars,
                          const std::vector<std::string>& constants, Substitution base, Fn&& fn,
                          std::size_t index = 0) {
    if (index == vars.size()) {
        fn(base);
        return;
    }
    if (base.binds(vars[index])) {
        enumerate_groundings(vars, constants, base, fn, index + 1);
        return;
    }
    for (const std::string& c : constants) {
        Substitution next = base;
        next.bind(vars[index], make_constant(c));
        enumerate_groundings(vars, constants, next, fn, index + 1);
    }
}

std::size_t instance_count(std::size_t var_count, std::size_t constant_count, std::size_t cap) {
    std::size_t count = 1;
    for (std::size_t i = 0; i < var_count; ++i) {
        if (constant_count == 0)
            return var_count == 0 ? 1 : 0;
        if (count > cap / constant_count)
            return cap + 1;  // saturates; caller only compares against cap
        count *= constant_count;
    }
    return count;
}

// Delete-relaxed reachability: the set of atoms that can ever hold starting
// from initial, ignoring delete effects and negative preconditions.
std::set<Atom> reachable_atoms(const State& initial, const std::vector<GroundOperator>& ops) {
    std::set<Atom> reached(initial.begin(), initial.end());
    bool changed = true;
    while (changed) {
        changed = false;
        for (const GroundOperator& op : ops) {
            bool ok = true;
            for (const Literal& lit : op.preconditions) {
                if (lit.positive && !reached.count(lit.atom)) {
                    ok = false;
                    break;
                }
            }
            if (!ok)
                continue;
            for (const Atom& a : op.add_effects)
                changed |= reached.insert(a).second;
        }
    }
    return reached;
}

} // namespace

GroundDomain ground_domain(const Domain& domain, const std::optional<State>& initial,
                           std::size_t cap) {
    const std::vector<std::string>& constants = domain.lang().constants;

    std::size_t total = 0;
    for (const Operator& op : domain.operators()) {
        total += instance_count(op.params.size(), constants.size(), cap);
        if (total > cap)
            throw GroundingExplosionError("grounding would exceed cap of " + std::to_string(cap) +
                                          " instances (operator '" + op.name + "')");
    }
    for (const Method& m : domain.methods()) {
        total += instance_count(m.scope().size(), constants.size(), cap);
        if (total > cap)
            throw GroundingExplosionError("grounding would exceed cap of " + std::to_string(cap) +
                                          " instances (method '" + m.name + "')");
    }

    GroundDomain out;
    {
        std::set<std::string> compound;
        for (const Method& m : domain.methods())
            compound.insert(m.task.symbol);
        out.compound_symbols.assign(compound.begin(), compound.end());
    }
    for (const Operator& op : domain.operators()) {
        std::vector<std::string> vars = op.params;
        enumerate_groundings(vars, constants, {}, [&](const Substitution& s) {
            GroundOperator g;
            g.task.symbol = op.name;
            for (const std::string& p : op.params)
                g.task.args.push_back(s.apply(make_variable(p)));
            for (const Literal& l : op.preconditions)
                g.preconditions.push_back(s.apply(l));
            for (const Atom& a : op.add_effects)
                g.add_effects.push_back(s.apply(a));
            for (const Atom& a : op.delete_effects)
                g.delete_effects.push_back(s.apply(a));
            out.operators.push_back(std::move(g));
        });
    }
    for (const Method& m : domain.methods()) {
        std::vector<std::string> vars = m.scope();
        enumerate_groundings(vars, constants, {}, [&](const Substitution& s) {
            GroundMethod g;
            g.name = m.name;
            g.grounding = s;
            g.task.symbol = m.task.symbol;
            for (const Term& t : m.task.args)
                g.task.args.push_back(s.apply(t));
            for (const Atom& a : m.precond_pos)
                g.precond_pos.push_back(s.apply(a));
            for (const Atom& a : m.precond_neg)
                g.precond_neg.push_back(s.apply(a));
            for (const Task& t : m.network) {
                Task sub{t.symbol, {}};
                for (const Term& arg : t.args)
                    sub.args.push_back(s.apply(arg));
                g.network.push_back(std::move(sub));
            }
            out.methods.push_back(std::move(g));
        });
    }

    if (initial) {
        std::set<Atom> reached = reachable_atoms(*initial, out.operators);
        auto pos_reachable = [&](const std::vector<Atom>& atoms) {
            return std::all_of(atoms.begin(), atoms.end(),
                               [&](const Atom& a) { return reached.count(a) > 0; });
        };
        std::erase_if(out.operators, [&](const GroundOperator& op) {
            for (const Literal& lit : op.preconditions)
                if (lit.positive && !reached.count(lit.atom))
                    return true;
            return false;
        });
        std::erase_if(out.methods,
                      [&](const GroundMethod& m) { return !pos_reachable(m.precond_pos); });
    }

    std::sort(out.operators.begin(), out.operators.end());
    std::sort(out.methods.begin(), out.methods.end(), [](const GroundMethod& a, const GroundMethod& b) {
        return std::tie(a.task, a.name, a.grounding) < std::tie(b.task, b.name, b.grounding);
    });
    return out;
}

} // namespace normid
