#include "normid/model.hpp"

#include <algorithm>
#include <cctype>

#include "normid/errors.hpp"

namespace normid {

bool is_variable_name(const std::string& name) {
    if (name.empty())
        return false;
    unsigned char c = static_cast<unsigned char>(name.front());
    return std::isupper(c) != 0 || c == '_';
}

Term make_term(std::string name) {
    TermKind kind = is_variable_name(name) ? TermKind::Variable : TermKind::Constant;
    return Term{kind, std::move(name)};
}

Term make_constant(std::string name) { return Term{TermKind::Constant, std::move(name)}; }

Term make_variable(std::string name) { return Term{TermKind::Variable, std::move(name)}; }

bool Atom::ground() const {
    return std::none_of(args.begin(), args.end(), [](const Term& t) { return t.is_variable(); });
}

static void append_args(std::string& out, const std::vector<Term>& args) {
    if (args.empty())
        return;
    out += '(';
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (i > 0)
            out += ',';
        out += args[i].name;
    }
    out += ')';
}

std::string Atom::to_string() const {
    std::string out = predicate;
    append_args(out, args);
    return out;
}

std::string Literal::to_string() const {
    return positive ? atom.to_string() : "!" + atom.to_string();
}

State::State(std::vector<Atom> atoms) : atoms_(std::move(atoms)) {
    for (const Atom& a : atoms_) {
        if (!a.ground())
            throw DomainError("state atom is not ground: " + a.to_string());
    }
    std::sort(atoms_.begin(), atoms_.end());
    atoms_.erase(std::unique(atoms_.begin(), atoms_.end()), atoms_.end());
}

bool State::contains(const Atom& atom) const {
    return std::binary_search(atoms_.begin(), atoms_.end(), atom);
}

State State::apply_effects(const std::vector<Atom>& add, const std::vector<Atom>& del) const {
    std::vector<Atom> next = atoms_;
    next.insert(next.end(), add.begin(), add.end());
    std::sort(next.begin(), next.end());
    next.erase(std::unique(next.begin(), next.end()), next.end());
    std::vector<Atom> sorted_del = del;
    std::sort(sorted_del.begin(), sorted_del.end());
    std::vector<Atom> result;
    result.reserve(next.size());
    std::set_difference(next.begin(), next.end(), sorted_del.begin(), sorted_del.end(),
                        std::back_inserter(result));
    State out;
    out.atoms_ = std::move(result);
    return out;
}

std::string State::to_string() const {
    std::string out = "{";
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (i > 0)
            out += ", ";
        out += atoms_[i].to_string();
    }
    out += '}';
    return out;
}

bool Substitution::bind(const std::string& var, const Term& value) {
    auto [it, inserted] = bindings_.emplace(var, value);
    return inserted || it->second == value;
}

const Term* Substitution::lookup(const std::string& var) const {
    auto it = bindings_.find(var);
    return it == bindings_.end() ? nullptr : &it->second;
}

Term Substitution::apply(const Term& t) const {
    if (t.is_variable()) {
        if (const Term* bound = lookup(t.name))
            return *bound;
    }
    return t;
}

Atom Substitution::apply(const Atom& a) const {
    Atom out{a.predicate, {}};
    out.args.reserve(a.args.size());
    for (const Term& t : a.args)
        out.args.push_back(apply(t));
    return out;
}

Literal Substitution::apply(const Literal& l) const { return Literal{apply(l.atom), l.positive}; }

std::string Substitution::to_string() const {
    std::string out = "{";
    bool first = true;
    for (const auto& [var, value] : bindings_) {
        if (!first)
            out += ", ";
        first = false;
        out += var;
        out += '=';
        out += value.name;
    }
    out += '}';
    return out;
}

std::optional<Substitution> match_atom(const Atom& pattern, const Atom& ground,
                                       const Substitution& base) {
    if (pattern.predicate != ground.predicate || pattern.args.size() != ground.args.size())
        return std::nullopt;
    Substitution out = base;
    for (std::size_t i = 0; i < pattern.args.size(); ++i) {
        const Term& p = pattern.args[i];
        const Term& g = ground.args[i];
        if (p.is_variable()) {
            if (!out.bind(p.name, g))
                return std::nullopt;
        } else if (p != g) {
            return std::nullopt;
        }
    }
    return out;
}

// True when some state atom matches the (possibly non-ground) atom.
static bool matches_any(const State& state, const Atom& pattern) {
    if (pattern.ground())
        return state.contains(pattern);
    for (const Atom& a : state) {
        if (match_atom(pattern, a))
            return true;
    }
    return false;
}

std::vector<Substitution> satisfying_substitutions(const State& state,
                                                   const std::vector<Literal>& goal) {
    std::vector<Substitution> candidates{Substitution{}};
    for (const Literal& lit : goal) {
        if (!lit.positive)
            continue;
        std::vector<Substitution> next;
        for (const Substitution& s : candidates) {
            Atom pattern = s.apply(lit.atom);
            if (pattern.ground()) {
                if (state.contains(pattern))
                    next.push_back(s);
                continue;
            }
            for (const Atom& a : state) {
                if (auto extended = match_atom(pattern, a, s))
                    next.push_back(std::move(*extended));
            }
        }
        candidates = std::move(next);
        if (candidates.empty())
            return candidates;
    }
    std::vector<Substitution> result;
    for (const Substitution& s : candidates) {
        bool ok = true;
        for (const Literal& lit : goal) {
            if (lit.positive)
                continue;
            if (matches_any(state, s.apply(lit.atom))) {
                ok = false;
                break;
            }
        }
        if (ok)
            result.push_back(s);
    }
    std::sort(result.begin(), result.end());
    result.erase(std::unique(result.begin(), result.end()), result.end());
    return result;
}

std::optional<Substitution> satisfies(const State& state, const std::vector<Literal>& goal) {
    std::vector<Substitution> all = satisfying_substitutions(state, goal);
    if (all.empty())
        return std::nullopt;
    return all.front();
}

} // namespace normid
