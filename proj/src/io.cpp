#include "normid/io.hpp"

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "normid/errors.hpp"

namespace normid {

using nlohmann::json;

namespace {

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
}

// Cursor over one expression string; the public parse_* functions require
// full consumption.
class Cursor {
public:
    explicit Cursor(const std::string& text) : text_(text) {}

    void skip_spaces() {
        while (pos_ < text_.size() && text_[pos_] == ' ')
            ++pos_;
    }

    bool eat(char c) {
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    std::string name() {
        std::size_t start = pos_;
        while (pos_ < text_.size() && ident_char(text_[pos_]))
            ++pos_;
        if (pos_ == start)
            fail("expected a name");
        return text_.substr(start, pos_ - start);
    }

    bool done() const { return pos_ == text_.size(); }

    [[noreturn]] void fail(const std::string& why) const {
        throw IoError("cannot parse '" + text_ + "': " + why + " at position " +
                      std::to_string(pos_));
    }

private:
    const std::string& text_;
    std::size_t pos_ = 0;
};

std::vector<Term> parse_args(Cursor& cur) {
    std::vector<Term> args;
    if (!cur.eat('('))
        return args;
    while (true) {
        cur.skip_spaces();
        args.push_back(make_term(cur.name()));
        cur.skip_spaces();
        if (cur.eat(','))
            continue;
        if (cur.eat(')'))
            return args;
        cur.fail("expected ',' or ')'");
    }
}

Atom parse_atom_at(Cursor& cur) {
    std::string predicate = cur.name();
    return Atom{std::move(predicate), parse_args(cur)};
}

void expect_end(Cursor& cur) {
    cur.skip_spaces();
    if (!cur.done())
        cur.fail("trailing characters");
}

} // namespace

Term parse_term(const std::string& text) {
    Cursor cur(text);
    cur.skip_spaces();
    Term t = make_term(cur.name());
    expect_end(cur);
    return t;
}

Atom parse_atom(const std::string& text) {
    Cursor cur(text);
    cur.skip_spaces();
    Atom a = parse_atom_at(cur);
    expect_end(cur);
    return a;
}

Literal parse_literal(const std::string& text) {
    Cursor cur(text);
    cur.skip_spaces();
    bool positive = !cur.eat('!');
    cur.skip_spaces();
    Atom a = parse_atom_at(cur);
    expect_end(cur);
    return Literal{std::move(a), positive};
}

Task parse_task(const std::string& text) {
    Atom a = parse_atom(text);
    return Task{std::move(a.predicate), std::move(a.args)};
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot open " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    if (!in.good() && !in.eof())
        throw IoError("cannot read " + path.string());
    return buffer.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw IoError("cannot open " + path.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out.good())
        throw IoError("cannot write " + path.string());
}

namespace {

void check_keys(const json& obj, std::initializer_list<const char*> allowed,
                const std::string& where) {
    for (const auto& [key, _] : obj.items()) {
        bool known = false;
        for (const char* a : allowed)
            if (key == a)
                known = true;
        if (!known)
            throw IoError(where + ": unknown key '" + key + "'");
    }
}

const json& require_key(const json& obj, const char* key, const std::string& where) {
    auto it = obj.find(key);
    if (it == obj.end())
        throw IoError(where + ": missing key '" + std::string(key) + "'");
    return *it;
}

std::string get_string(const json& v, const std::string& where) {
    if (!v.is_string())
        throw IoError(where + ": expected a string");
    return v.get<std::string>();
}

const json& get_array(const json& v, const std::string& where) {
    if (!v.is_array())
        throw IoError(where + ": expected an array");
    return v;
}

const json& get_object(const json& v, const std::string& where) {
    if (!v.is_object())
        throw IoError(where + ": expected an object");
    return v;
}

std::vector<std::string> string_list(const json& v, const std::string& where) {
    std::vector<std::string> out;
    for (const json& item : get_array(v, where))
        out.push_back(get_string(item, where));
    return out;
}

// Callers wrap this in a block that adds the origin context, so the message
// must not carry the origin itself.
json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const std::exception& e) {
        throw IoError(e.what());
    }
}

// Predicate declaration "name/arity".
std::pair<std::string, std::size_t> parse_predicate_decl(const std::string& decl) {
    std::size_t slash = decl.find('/');
    if (slash == std::string::npos || slash == 0 || slash + 1 == decl.size())
        throw IoError("predicate declaration '" + decl + "' is not of the form name/arity");
    std::string name = decl.substr(0, slash);
    for (char c : name)
        if (!ident_char(c))
            throw IoError("predicate declaration '" + decl + "' has an invalid name");
    std::size_t arity = 0;
    for (std::size_t i = slash + 1; i < decl.size(); ++i) {
        char c = decl[i];
        if (!std::isdigit(static_cast<unsigned char>(c)))
            throw IoError("predicate declaration '" + decl + "' has a non-numeric arity");
        arity = arity * 10 + static_cast<std::size_t>(c - '0');
    }
    return {std::move(name), arity};
}

// Validation of data files against the domain's language; the Domain class
// checks its own declarations, this covers runs/norms/scenarios.
void check_atom(const Lang& lang, const Atom& atom, const std::string& where) {
    auto it = lang.predicates.find(atom.predicate);
    if (it == lang.predicates.end())
        throw IoError(where + ": undeclared predicate '" + atom.predicate + "'");
    if (it->second != atom.args.size())
        throw IoError(where + ": predicate '" + atom.predicate + "' expects " +
                      std::to_string(it->second) + " arguments, got " +
                      std::to_string(atom.args.size()));
    for (const Term& t : atom.args)
        if (!t.is_variable() &&
            !std::binary_search(lang.constants.begin(), lang.constants.end(), t.name))
            throw IoError(where + ": undeclared constant '" + t.name + "'");
}

void check_task(const Domain& domain, const Task& task, const std::string& where) {
    if (!domain.is_primitive(task.symbol) && !domain.is_compound(task.symbol))
        throw IoError(where + ": unknown task symbol '" + task.symbol + "'");
    for (const Term& t : task.args)
        if (!t.is_variable() && !std::binary_search(domain.lang().constants.begin(),
                                                    domain.lang().constants.end(), t.name))
            throw IoError(where + ": undeclared constant '" + t.name + "'");
}

State parse_state(const json& v, const Lang& lang, const std::string& where) {
    std::vector<Atom> atoms;
    for (const std::string& s : string_list(v, where)) {
        Atom atom = parse_atom(s);
        check_atom(lang, atom, where);
        atoms.push_back(std::move(atom));
    }
    return State(std::move(atoms));
}

std::string fmt_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

Domain parse_domain(const std::string& text, const std::string& origin) {
    try {
        json j = parse_json(text);
        get_object(j, "domain file");
        check_keys(j, {"constants", "predicates", "operators", "methods"}, "domain file");

        Lang lang;
        for (const std::string& c : string_list(require_key(j, "constants", "domain file"),
                                                "constants")) {
            Term t = parse_term(c);
            lang.constants.push_back(t.name);
        }
        for (const std::string& decl : string_list(require_key(j, "predicates", "domain file"),
                                                   "predicates")) {
            auto [name, arity] = parse_predicate_decl(decl);
            if (!lang.predicates.emplace(name, arity).second)
                throw IoError("predicate '" + name + "' declared twice");
        }

        std::vector<Operator> operators;
        for (const json& node : get_array(require_key(j, "operators", "domain file"),
                                          "operators")) {
            get_object(node, "operator entry");
            check_keys(node, {"name", "params", "pre", "add", "del"}, "operator entry");
            Operator op;
            op.name = get_string(require_key(node, "name", "operator entry"), "operator name");
            std::string where = "operator '" + op.name + "'";
            if (node.contains("params"))
                op.params = string_list(node["params"], where + " params");
            if (node.contains("pre"))
                for (const std::string& s : string_list(node["pre"], where + " pre"))
                    op.preconditions.push_back(parse_literal(s));
            if (node.contains("add"))
                for (const std::string& s : string_list(node["add"], where + " add"))
                    op.add_effects.push_back(parse_atom(s));
            if (node.contains("del"))
                for (const std::string& s : string_list(node["del"], where + " del"))
                    op.delete_effects.push_back(parse_atom(s));
            operators.push_back(std::move(op));
        }

        std::vector<Method> methods;
        for (const json& node : get_array(require_key(j, "methods", "domain file"), "methods")) {
            get_object(node, "method entry");
            check_keys(node, {"name", "params", "task", "precond_pos", "precond_neg", "subtasks"},
                       "method entry");
            Method m;
            m.name = get_string(require_key(node, "name", "method entry"), "method name");
            std::string where = "method '" + m.name + "'";
            if (node.contains("params"))
                m.params = string_list(node["params"], where + " params");
            m.task = parse_task(get_string(require_key(node, "task", where), where + " task"));
            if (node.contains("precond_pos"))
                for (const std::string& s : string_list(node["precond_pos"], where))
                    m.precond_pos.push_back(parse_atom(s));
            if (node.contains("precond_neg"))
                for (const std::string& s : string_list(node["precond_neg"], where))
                    m.precond_neg.push_back(parse_atom(s));
            if (node.contains("subtasks"))
                for (const std::string& s : string_list(node["subtasks"], where + " subtasks"))
                    m.network.push_back(parse_task(s));
            methods.push_back(std::move(m));
        }

        return Domain(std::move(lang), std::move(operators), std::move(methods));
    } catch (Error& e) {
        e.add_context(origin);
        throw;
    }
}

Domain load_domain(const std::filesystem::path& path) {
    return parse_domain(read_text_file(path), path.string());
}

std::vector<Run> parse_runs(const std::string& text, const Domain& domain,
                            const std::string& origin) {
    try {
        json j = parse_json(text);
        get_array(j, "run file");
        std::vector<Run> runs;
        for (std::size_t i = 0; i < j.size(); ++i) {
            std::string where = "run #" + std::to_string(i + 1);
            try {
                const json& node = get_object(j[i], "run entry");
                check_keys(node, {"initial_state", "actions", "goal"}, "run entry");
                Run run;
                run.initial_state = parse_state(require_key(node, "initial_state", "run entry"),
                                                domain.lang(), "initial_state");
                for (const std::string& s :
                     string_list(require_key(node, "actions", "run entry"), "actions")) {
                    Task task = parse_task(s);
                    check_task(domain, task, "actions");
                    run.observations.push_back(domain.make_action(task));
                }
                if (node.contains("goal")) {
                    Task goal = parse_task(get_string(node["goal"], "goal"));
                    check_task(domain, goal, "goal");
                    if (!goal.ground())
                        throw IoError("goal " + goal.to_string() + " is not ground");
                    run.goal = std::move(goal);
                }
                runs.push_back(std::move(run));
            } catch (Error& e) {
                e.add_context(where);
                throw;
            }
        }
        return runs;
    } catch (Error& e) {
        e.add_context(origin);
        throw;
    }
}

std::vector<Run> load_runs(const std::filesystem::path& path, const Domain& domain) {
    return parse_runs(read_text_file(path), domain, path.string());
}

std::string runs_to_string(const std::vector<Run>& runs) {
    json out = json::array();
    for (const Run& run : runs) {
        json node = json::object();
        json state = json::array();
        for (const Atom& atom : run.initial_state)
            state.push_back(atom.to_string());
        node["initial_state"] = std::move(state);
        json actions = json::array();
        for (const Action& action : run.observations)
            actions.push_back(action.to_string());
        node["actions"] = std::move(actions);
        if (run.goal)
            node["goal"] = run.goal->to_string();
        out.push_back(std::move(node));
    }
    return out.dump(2) + "\n";
}

void save_runs(const std::vector<Run>& runs, const std::filesystem::path& path) {
    write_text_file(path, runs_to_string(runs));
}

NormSet parse_norms(const std::string& text, const std::string& origin) {
    try {
        json j = parse_json(text);
        get_array(j, "norm file");
        std::vector<Norm> norms;
        for (std::size_t i = 0; i < j.size(); ++i) {
            std::string where = "norm #" + std::to_string(i + 1);
            try {
                const json& node = get_object(j[i], "norm entry");
                check_keys(node, {"modality", "context", "condition", "evidence"}, "norm entry");
                Norm norm;
                std::string modality =
                    get_string(require_key(node, "modality", "norm entry"), "modality");
                if (modality == "O")
                    norm.modality = Modality::Obligation;
                else if (modality == "F")
                    norm.modality = Modality::Prohibition;
                else
                    throw IoError("modality must be \"O\" or \"F\"");
                norm.context = parse_task(
                    get_string(require_key(node, "context", "norm entry"), "context"));
                const json& cond = require_key(node, "condition", "norm entry");
                if (cond.is_string()) {
                    norm.condition = parse_task(cond.get<std::string>());
                } else {
                    get_object(cond, "condition");
                    check_keys(cond, {"state"}, "condition");
                    std::vector<Atom> atoms;
                    for (const std::string& s : string_list(
                             require_key(cond, "state", "condition"), "condition state"))
                        atoms.push_back(parse_atom(s));
                    norm.condition = State(std::move(atoms));
                }
                if (node.contains("evidence")) {
                    const json& ev = get_object(node["evidence"], "evidence");
                    check_keys(ev, {"supporting", "refuting"}, "evidence");
                    auto count = [&](const char* key) {
                        const json& v = require_key(ev, key, "evidence");
                        if (!v.is_number_unsigned())
                            throw IoError("evidence counts must be non-negative integers");
                        return v.get<std::uint64_t>();
                    };
                    norm.evidence = Evidence{count("supporting"), count("refuting")};
                }
                norms.push_back(std::move(norm));
            } catch (Error& e) {
                e.add_context(where);
                throw;
            }
        }
        return NormSet(std::move(norms));
    } catch (Error& e) {
        e.add_context(origin);
        throw;
    }
}

NormSet load_norms(const std::filesystem::path& path) {
    return parse_norms(read_text_file(path), path.string());
}

std::string norms_to_string(const NormSet& norms) {
    json out = json::array();
    for (const Norm& norm : norms) {
        json node = json::object();
        node["modality"] = std::string(1, modality_letter(norm.modality));
        node["context"] = norm.context.to_string();
        if (const Task* t = std::get_if<Task>(&norm.condition)) {
            node["condition"] = t->to_string();
        } else {
            json atoms = json::array();
            for (const Atom& atom : std::get<State>(norm.condition))
                atoms.push_back(atom.to_string());
            node["condition"] = json{{"state", std::move(atoms)}};
        }
        if (norm.evidence) {
            node["evidence"] = json{{"supporting", norm.evidence->supporting},
                                    {"refuting", norm.evidence->refuting}};
        }
        out.push_back(std::move(node));
    }
    return out.dump(2) + "\n";
}

void save_norms(const NormSet& norms, const std::filesystem::path& path) {
    write_text_file(path, norms_to_string(norms));
}

State parse_state_strings(const std::vector<std::string>& atoms, const Domain& domain,
                          const std::string& where) {
    std::vector<Atom> parsed;
    for (const std::string& s : atoms) {
        Atom atom = parse_atom(s);
        check_atom(domain.lang(), atom, where);
        parsed.push_back(std::move(atom));
    }
    return State(std::move(parsed));
}

Task parse_goal_task(const std::string& text, const Domain& domain) {
    Task task = parse_task(text);
    check_task(domain, task, "goal task");
    if (!task.ground())
        throw IoError("goal task " + task.to_string() + " is not ground");
    return task;
}

Scenario load_scenario(const std::filesystem::path& path) {
    const std::string origin = path.string();
    try {
        json j = parse_json(read_text_file(path));
        get_object(j, "scenario file");
        check_keys(j, {"domain", "norms", "goals", "violation_rate", "seed", "initial_state"},
                   "scenario file");

        auto resolve = [&](const std::string& p) {
            std::filesystem::path target(p);
            return target.is_absolute() ? target : path.parent_path() / target;
        };
        Scenario scenario;
        scenario.domain = load_domain(
            resolve(get_string(require_key(j, "domain", "scenario file"), "domain path")));
        scenario.planted = load_norms(
            resolve(get_string(require_key(j, "norms", "scenario file"), "norms path")));

        for (const json& node : get_array(require_key(j, "goals", "scenario file"), "goals")) {
            get_object(node, "goal entry");
            check_keys(node, {"task", "weight"}, "goal entry");
            GoalChoice choice;
            choice.task =
                parse_task(get_string(require_key(node, "task", "goal entry"), "goal task"));
            check_task(scenario.domain, choice.task, "goal task");
            if (!choice.task.ground())
                throw IoError("goal task " + choice.task.to_string() + " is not ground");
            if (node.contains("weight")) {
                if (!node["weight"].is_number())
                    throw IoError("goal weight must be a number");
                choice.weight = node["weight"].get<double>();
            }
            scenario.goals.push_back(std::move(choice));
        }

        const json& rate = require_key(j, "violation_rate", "scenario file");
        if (!rate.is_number())
            throw IoError("violation_rate must be a number");
        scenario.violation_rate = rate.get<double>();
        const json& seed = require_key(j, "seed", "scenario file");
        if (!seed.is_number_unsigned())
            throw IoError("seed must be a non-negative integer");
        scenario.seed = seed.get<std::uint64_t>();
        if (j.contains("initial_state"))
            scenario.initial_state =
                parse_state(j["initial_state"], scenario.domain.lang(), "initial_state");

        for (const Norm& norm : scenario.planted) {
            std::string where = "planted norm " + norm.to_string();
            check_task(scenario.domain, norm.context, where);
            if (const Task* t = std::get_if<Task>(&norm.condition))
                check_task(scenario.domain, *t, where);
            else
                for (const Atom& atom : std::get<State>(norm.condition))
                    check_atom(scenario.domain.lang(), atom, where);
        }
        return scenario;
    } catch (Error& e) {
        e.add_context(origin);
        throw;
    }
}

namespace {

void render_node(const NodePtr& node, std::size_t depth, std::string& out) {
    out.append(depth * 2, ' ');
    out += node->task.to_string();
    if (node->method) {
        out += "  [";
        out += node->method->name;
        if (node->method->grounding.size() > 0) {
            out += ' ';
            out += node->method->grounding.to_string();
        }
        out += ']';
    }
    out += '\n';
    for (const NodePtr& child : node->children)
        render_node(child, depth + 1, out);
}

json node_to_json(const NodePtr& node) {
    json j = json::object();
    j["task"] = node->task.to_string();
    if (node->method) {
        j["method"] = node->method->name;
        json grounding = json::object();
        for (const auto& [var, value] : node->method->grounding)
            grounding[var] = value.name;
        j["grounding"] = std::move(grounding);
    }
    j["synthetic"] = node->synthetic;
    json before = json::array();
    for (const Atom& atom : node->state_before)
        before.push_back(atom.to_string());
    j["state_before"] = std::move(before);
    json after = json::array();
    for (const Atom& atom : node->state_after)
        after.push_back(atom.to_string());
    j["state_after"] = std::move(after);
    json children = json::array();
    for (const NodePtr& child : node->children)
        children.push_back(node_to_json(child));
    j["children"] = std::move(children);
    return j;
}

json recognition_json(const Recognition& recognition) {
    json j = json::object();
    j["parse_count"] = recognition.parse_count;
    j["goal"] = recognition.plan.root->task.to_string();
    json actions = json::array();
    for (const Action& action : recognition.plan.actions)
        actions.push_back(action.to_string());
    j["actions"] = std::move(actions);
    j["tree"] = node_to_json(recognition.plan.root);
    return j;
}

json modality_json(const ModalityReport& mr) {
    auto names = [](const std::vector<Norm>& norms) {
        json arr = json::array();
        for (const Norm& n : norms)
            arr.push_back(n.to_string());
        return arr;
    };
    json j = json::object();
    j["precision"] = mr.precision;
    j["recall"] = mr.recall;
    j["empty_learned"] = mr.empty_learned;
    j["empty_planted"] = mr.empty_planted;
    j["true_positives"] = names(mr.true_positives);
    j["false_positives"] = names(mr.false_positives);
    j["misses"] = names(mr.misses);
    j["undetectable"] = names(mr.undetectable);
    return j;
}

void modality_text(const std::string& prefix, const ModalityReport& mr, std::string& out) {
    out += prefix + ".precision: " + fmt_double(mr.precision) + "\n";
    out += prefix + ".recall: " + fmt_double(mr.recall) + "\n";
    out += prefix + ".empty_learned: " + (mr.empty_learned ? "true" : "false") + "\n";
    out += prefix + ".empty_planted: " + (mr.empty_planted ? "true" : "false") + "\n";
    for (const Norm& n : mr.true_positives)
        out += prefix + ".true_positive: " + n.to_string() + "\n";
    for (const Norm& n : mr.false_positives)
        out += prefix + ".false_positive: " + n.to_string() + "\n";
    for (const Norm& n : mr.misses)
        out += prefix + ".miss: " + n.to_string() + "\n";
    for (const Norm& n : mr.undetectable)
        out += prefix + ".undetectable: " + n.to_string() + "\n";
}

} // namespace

std::string render_tree(const NodePtr& root) {
    std::string out;
    render_node(root, 0, out);
    return out;
}

std::string tree_to_json_string(const NodePtr& root) {
    return node_to_json(root).dump(2) + "\n";
}

std::string recognition_to_text(const Recognition& recognition) {
    std::string out = "parse_count: " + std::to_string(recognition.parse_count) + "\n";
    out += render_tree(recognition.plan.root);
    return out;
}

std::string recognition_to_json_string(const Recognition& recognition) {
    return recognition_json(recognition).dump(2) + "\n";
}

std::string recognitions_to_json_string(const std::vector<Recognition>& recognitions) {
    json arr = json::array();
    for (const Recognition& r : recognitions)
        arr.push_back(recognition_json(r));
    return arr.dump(2) + "\n";
}

std::string report_to_text(const EvaluationReport& report) {
    std::string out = "observed_contexts: " + std::to_string(report.observed_context_count) + "\n";
    modality_text("obligations", report.obligations, out);
    modality_text("prohibitions", report.prohibitions, out);
    return out;
}

std::string report_to_json_string(const EvaluationReport& report) {
    json j = json::object();
    j["observed_context_count"] = report.observed_context_count;
    j["obligations"] = modality_json(report.obligations);
    j["prohibitions"] = modality_json(report.prohibitions);
    return j.dump(2) + "\n";
}

} // namespace normid
