#include "doctest.h"

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "helpers.hpp"
#include "normid/errors.hpp"
#include "normid/io.hpp"

using namespace normid;
using testutil::fixture_domain;
using testutil::fixture_path;
using testutil::gt;
using testutil::ntask;
using testutil::st;
using testutil::travel_initial;

namespace {

namespace fs = std::filesystem;

fs::path scratch_dir() {
    fs::path dir = fs::temp_directory_path() / "normid_io_tests";
    fs::create_directories(dir);
    return dir;
}

fs::path write_scratch(const std::string& name, const std::string& content) {
    fs::path p = scratch_dir() / name;
    write_text_file(p, content);
    return p;
}

std::string json_quote(const fs::path& p) { return "\"" + p.string() + "\""; }

template <typename Fn>
std::string message_of(Fn&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.what();
    }
    FAIL("expected an error");
    return "";
}

void check_runs_equal(const std::vector<Run>& a, const std::vector<Run>& b) {
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].initial_state == b[i].initial_state);
        CHECK(a[i].observations == b[i].observations);
        CHECK(a[i].goal == b[i].goal);
    }
}

} // namespace

TEST_CASE("expression parsing accepts the documented grammar") {
    CHECK(parse_term("x").name == "x");
    CHECK_FALSE(parse_term("x").is_variable());
    CHECK(parse_term(" X ").is_variable());
    CHECK(parse_term("_tmp").is_variable());
    CHECK_FALSE(parse_term("foo-bar_2").is_variable());

    CHECK(parse_atom("p( a , b )") == parse_atom("p(a,b)"));
    CHECK(parse_atom("p(a,b)").to_string() == "p(a,b)");
    CHECK(parse_atom("at").args.empty());

    CHECK_FALSE(parse_literal("!at(x)").positive);
    CHECK_FALSE(parse_literal("! at(x)").positive);
    CHECK(parse_literal(" at(x) ").positive);
    CHECK(parse_literal("!at(x)").atom == parse_atom("at(x)"));

    Task t = parse_task("travel(aberdeen,paris)");
    CHECK(t.symbol == "travel");
    CHECK(t.args.size() == 2);
    CHECK(t.ground());
    CHECK_FALSE(parse_task("p(X,y)").ground());
}

TEST_CASE("expression parsing rejects malformed input with positions") {
    CHECK(message_of([] { parse_atom("p(a,)"); }) ==
          "cannot parse 'p(a,)': expected a name at position 4");
    CHECK(message_of([] { parse_term(""); }) ==
          "cannot parse '': expected a name at position 0");
    CHECK(message_of([] { parse_atom("p(a b)"); }) ==
          "cannot parse 'p(a b)': expected ',' or ')' at position 4");
    CHECK(message_of([] { parse_atom("p(a)x"); }) ==
          "cannot parse 'p(a)x': trailing characters at position 4");
    CHECK(message_of([] { parse_atom("p()"); }) ==
          "cannot parse 'p()': expected a name at position 2");
    CHECK(message_of([] { parse_term("p q"); }) ==
          "cannot parse 'p q': trailing characters at position 2");
    CHECK(message_of([] { parse_literal("!!p"); }) ==
          "cannot parse '!!p': expected a name at position 1");
    CHECK_THROWS_AS(parse_task("<start>"), IoError);
    CHECK_THROWS_AS(parse_task("p("), IoError);
    CHECK_THROWS_AS(parse_literal("at(x)!"), IoError);
}

TEST_CASE("text files round-trip bytes") {
    const std::string content = "line one\n\ttabbed\nunicode \xcf\x80\nno trailing newline";
    fs::path p = write_scratch("roundtrip.txt", content);
    CHECK(read_text_file(p) == content);

    CHECK_THROWS_AS(read_text_file(scratch_dir() / "missing.txt"), IoError);
    CHECK(message_of([] { read_text_file(scratch_dir() / "missing.txt"); })
              .find("cannot open") == 0);
    CHECK(message_of([] {
              write_text_file(scratch_dir() / "no_such_dir" / "f.txt", "x");
          }).find("for writing") != std::string::npos);
}

TEST_CASE("malformed json reports the origin exactly once") {
    Domain travel = load_domain(fixture_path("travel.json"));
    std::string msg = message_of([&] { parse_runs("not json", travel, "broken.json"); });
    CHECK(msg.find("broken.json: ") == 0);
    CHECK(msg.find("broken.json", 1) == std::string::npos);
}

TEST_CASE("domain files load and reject unknown shapes") {
    Domain travel = load_domain(fixture_path("travel.json"));
    CHECK(travel.lang().constants.size() == 3);
    CHECK(travel.is_primitive("goto"));
    CHECK(travel.is_compound("travel"));

    const std::string empty_domain =
        R"x({"constants": [], "predicates": [], "operators": [], "methods": []})x";
    CHECK(parse_domain(empty_domain, "inline").top_level_symbols().empty());

    auto bad = [](const std::string& text) {
        return message_of([&] { parse_domain(text, "inline"); });
    };
    CHECK(bad(R"x({"constants": [], "predicates": [], "operators": [], "methods": [],
                   "extra": 1})x") == "inline: domain file: unknown key 'extra'");
    CHECK(bad(R"x({"constants": [], "predicates": [], "operators": []})x") ==
          "inline: domain file: missing key 'methods'");
    CHECK(bad("[]") == "inline: domain file: expected an object");
    CHECK(bad("{").find("inline: ") == 0);

    const std::string skeleton =
        R"x({"constants": [], "predicates": [%], "operators": [%op], "methods": []})x";
    auto with_predicate = [&](const std::string& decl) {
        std::string text = skeleton;
        text.replace(text.find('%'), 1, "\"" + decl + "\"");
        text.replace(text.find("%op"), 3, "");
        return text;
    };
    CHECK(bad(with_predicate("at")).find("not of the form name/arity") != std::string::npos);
    CHECK(bad(with_predicate("at/x")).find("non-numeric arity") != std::string::npos);
    CHECK(bad(with_predicate("/1")).find("not of the form name/arity") != std::string::npos);
    CHECK(bad(with_predicate("at/")).find("not of the form name/arity") != std::string::npos);
    CHECK(bad(R"x({"constants": [], "predicates": ["at/1", "at/1"],
                   "operators": [], "methods": []})x")
              .find("declared twice") != std::string::npos);

    CHECK(bad(R"x({"constants": [], "predicates": [],
                   "operators": [{"name": "a", "cost": 3}], "methods": []})x") ==
          "inline: operator entry: unknown key 'cost'");
    CHECK(bad(R"x({"constants": [], "predicates": [],
                   "operators": [], "methods": [{"name": "m"}]})x") ==
          "inline: method 'm': missing key 'task'");
    CHECK(bad(R"x({"constants": [], "predicates": [],
                   "operators": [{"name": 3}], "methods": []})x")
              .find("expected a string") != std::string::npos);
}

TEST_CASE("run files round-trip through text") {
    Domain travel = fixture_domain("travel.json");
    auto plans = all_plans(travel, travel_initial(), gt("travel(aberdeen,paris)"));
    REQUIRE(plans.size() == 1);

    Run with_goal = run_of(plans[0]);
    Run without_goal;
    without_goal.initial_state = travel_initial();
    without_goal.observations = plans[0].actions;
    std::vector<Run> runs{with_goal, without_goal};

    std::string text = runs_to_string(runs);
    check_runs_equal(parse_runs(text, travel, "rt"), runs);

    fs::path p = scratch_dir() / "travel_runs.json";
    save_runs(runs, p);
    check_runs_equal(load_runs(p, travel), runs);

    CHECK(runs_to_string({}) == "[]\n");
    CHECK(runs_to_string({with_goal}) ==
          "[\n"
          "  {\n"
          "    \"actions\": [\n"
          "      \"goto(aberdeen,london)\",\n"
          "      \"goto(london,paris)\"\n"
          "    ],\n"
          "    \"goal\": \"travel(aberdeen,paris)\",\n"
          "    \"initial_state\": [\n"
          "      \"at(aberdeen)\",\n"
          "      \"connect(aberdeen,london)\",\n"
          "      \"connect(london,paris)\"\n"
          "    ]\n"
          "  }\n"
          "]\n");
}

TEST_CASE("run files validate against the domain") {
    Domain travel = fixture_domain("travel.json");
    auto bad = [&](const std::string& text) {
        return message_of([&] { parse_runs(text, travel, "bad.json"); });
    };

    CHECK(bad(R"x([{"initial_state": [], "actions": ["zz"]}])x") ==
          "bad.json: run #1: actions: unknown task symbol 'zz'");
    CHECK(bad(R"x([{"initial_state": [], "actions": ["goto(aberdeen)"]}])x") ==
          "bad.json: run #1: action goto(aberdeen): operator 'goto' expects 2 arguments");
    CHECK(bad(R"x([{"initial_state": ["zz(a)"], "actions": []}])x") ==
          "bad.json: run #1: initial_state: undeclared predicate 'zz'");
    CHECK(bad(R"x([{"initial_state": [], "actions": ["goto(aberdeen,rome)"]}])x") ==
          "bad.json: run #1: actions: undeclared constant 'rome'");
    CHECK(bad(R"x([{"initial_state": [], "actions": [],
                    "goal": "travel(X,paris)"}])x") ==
          "bad.json: run #1: goal travel(X,paris) is not ground");
    CHECK(bad(R"x([{"initial_state": [], "actions": [], "goal": "zz"}])x") ==
          "bad.json: run #1: goal: unknown task symbol 'zz'");
    CHECK(bad("[42]") == "bad.json: run #1: run entry: expected an object");
    CHECK(bad("{}") == "bad.json: run file: expected an array");
    CHECK(bad(R"x([{"initial_state": [], "actions": [], "agent": "ann"}])x") ==
          "bad.json: run #1: run entry: unknown key 'agent'");
    CHECK(bad(R"x([{"actions": []}])x") ==
          "bad.json: run #1: run entry: missing key 'initial_state'");

    // the second entry carries the blame
    CHECK(bad(R"x([{"initial_state": [], "actions": []},
                   {"initial_state": [], "actions": ["zz"]}])x")
              .find("run #2") != std::string::npos);
}

TEST_CASE("norm files round-trip with evidence") {
    Norm obliged = ntask(Modality::Obligation, "travel(X,Y)", "goto(X,Z)");
    obliged.evidence = Evidence{7, 2};
    Norm banned;
    banned.modality = Modality::Prohibition;
    banned.context = gt("t1");
    banned.condition = st({"at(london)"});
    NormSet set({obliged, banned});

    std::string text = norms_to_string(set);
    NormSet back = parse_norms(text, "rt");
    CHECK(norms_to_string(back) == text);
    REQUIRE(back.size() == 2);
    for (const Norm& n : back) {
        if (n.modality == Modality::Obligation) {
            REQUIRE(n.evidence);
            CHECK(n.evidence->supporting == 7);
            CHECK(n.evidence->refuting == 2);
        } else {
            CHECK_FALSE(n.evidence);
            CHECK(std::get<State>(n.condition) == st({"at(london)"}));
        }
    }

    fs::path p = scratch_dir() / "norms.json";
    save_norms(set, p);
    CHECK(norms_to_string(load_norms(p)) == text);

    CHECK(norms_to_string(NormSet{}) == "[]\n");
    CHECK(parse_norms("[]", "x").size() == 0);

    NormSet just_obliged({obliged});
    CHECK(norms_to_string(just_obliged) ==
          "[\n"
          "  {\n"
          "    \"condition\": \"goto(X,Z)\",\n"
          "    \"context\": \"travel(X,Y)\",\n"
          "    \"evidence\": {\n"
          "      \"refuting\": 2,\n"
          "      \"supporting\": 7\n"
          "    },\n"
          "    \"modality\": \"O\"\n"
          "  }\n"
          "]\n");
    CHECK(norms_to_string(NormSet({banned})) ==
          "[\n"
          "  {\n"
          "    \"condition\": {\n"
          "      \"state\": [\n"
          "        \"at(london)\"\n"
          "      ]\n"
          "    },\n"
          "    \"context\": \"t1\",\n"
          "    \"modality\": \"F\"\n"
          "  }\n"
          "]\n");
}

TEST_CASE("norm files reject malformed entries") {
    auto bad = [](const std::string& text) {
        return message_of([&] { parse_norms(text, "bad.json"); });
    };

    CHECK(bad(R"x([{"modality": "X", "context": "t1", "condition": "t2"}])x") ==
          "bad.json: norm #1: modality must be \"O\" or \"F\"");
    CHECK(bad(R"x([{"modality": "O", "context": "t1"}])x") ==
          "bad.json: norm #1: norm entry: missing key 'condition'");
    CHECK(bad(R"x([{"modality": "O", "context": "t1",
                    "condition": {"atoms": []}}])x") ==
          "bad.json: norm #1: condition: unknown key 'atoms'");
    CHECK(bad(R"x([{"modality": "O", "context": "t1", "condition": "t2",
                    "evidence": {"supporting": -1, "refuting": 0}}])x") ==
          "bad.json: norm #1: evidence counts must be non-negative integers");
    CHECK(bad(R"x([{"modality": "O", "context": "t1", "condition": "t2",
                    "evidence": {"supporting": "many", "refuting": 0}}])x") ==
          "bad.json: norm #1: evidence counts must be non-negative integers");
    CHECK(bad(R"x([{"modality": "O", "context": "t1", "condition": "t2",
                    "evidence": {"supporting": 1}}])x") ==
          "bad.json: norm #1: evidence: missing key 'refuting'");
    CHECK(bad("{}") == "bad.json: norm file: expected an array");

    // a file obliging and prohibiting the same condition is rejected as a set
    CHECK(bad(R"x([{"modality": "O", "context": "t1", "condition": "t2"},
                   {"modality": "F", "context": "t1", "condition": "t2"}])x")
              .find("obliges and prohibits") != std::string::npos);
}

TEST_CASE("command line expression helpers validate") {
    Domain travel = fixture_domain("travel.json");
    CHECK(parse_state_strings({"at(aberdeen)", "connect(aberdeen,london)"}, travel, "init") ==
          st({"at(aberdeen)", "connect(aberdeen,london)"}));
    CHECK(message_of([&] { parse_state_strings({"at(rome)"}, travel, "init"); }) ==
          "init: undeclared constant 'rome'");

    CHECK(parse_goal_task("travel(aberdeen,paris)", travel) == gt("travel(aberdeen,paris)"));
    CHECK(message_of([&] { parse_goal_task("travel(X,paris)", travel); }) ==
          "goal task travel(X,paris) is not ground");
    CHECK(message_of([&] { parse_goal_task("zz", travel); }) ==
          "goal task: unknown task symbol 'zz'");
}

TEST_CASE("scenario files resolve relative paths and defaults") {
    Scenario routes = load_scenario(fixture_path("routes_scenario.json"));
    CHECK(routes.domain.is_compound("job"));
    REQUIRE(routes.goals.size() == 1);
    CHECK(routes.goals[0].task == gt("job"));
    CHECK(routes.goals[0].weight == 1.0);
    CHECK(routes.violation_rate == 0.1);
    CHECK(routes.seed == 20260815);
    CHECK(routes.planted.size() == 3);
    CHECK(routes.initial_state.empty());

    fs::path norms = write_scratch(
        "scn_norms.json",
        R"x([{"modality": "O", "context": "travel(X,Y)", "condition": "goto(X,Z)"}])x");
    fs::path scn = write_scratch(
        "scn_ok.json",
        "{\"domain\": " + json_quote(fixture_path("travel.json")) +
            ", \"norms\": \"scn_norms.json\""
            ", \"goals\": [{\"task\": \"travel(aberdeen,paris)\"}]"
            ", \"violation_rate\": 0.25, \"seed\": 7"
            ", \"initial_state\": [\"at(aberdeen)\", \"connect(aberdeen,london)\","
            " \"connect(london,paris)\"]}");
    Scenario s = load_scenario(scn);
    CHECK(s.goals[0].weight == 1.0);  // defaulted
    CHECK(s.violation_rate == 0.25);
    CHECK(s.seed == 7);
    CHECK(s.initial_state == travel_initial());
    CHECK(s.planted.size() == 1);
}

TEST_CASE("scenario files reject bad values") {
    fs::path norms = write_scratch(
        "scn_norms.json",
        R"x([{"modality": "O", "context": "travel(X,Y)", "condition": "goto(X,Z)"}])x");
    auto bad = [&](const std::string& name, const std::string& body) {
        fs::path p = write_scratch(name, body);
        return message_of([&] { load_scenario(p); });
    };
    std::string head = "{\"domain\": " + json_quote(fixture_path("travel.json")) +
                       ", \"norms\": " + json_quote(scratch_dir() / "scn_norms.json");

    CHECK(bad("scn_seed.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)"}],
                          "violation_rate": 0.0, "seed": -5})x")
              .find("seed must be a non-negative integer") != std::string::npos);
    CHECK(bad("scn_seed_f.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)"}],
                          "violation_rate": 0.0, "seed": 1.5})x")
              .find("seed must be a non-negative integer") != std::string::npos);
    CHECK(bad("scn_rate.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)"}],
                          "violation_rate": "low", "seed": 1})x")
              .find("violation_rate must be a number") != std::string::npos);
    CHECK(bad("scn_weight.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)", "weight": "w"}],
                          "violation_rate": 0.0, "seed": 1})x")
              .find("goal weight must be a number") != std::string::npos);
    CHECK(bad("scn_goal.json",
              head + R"x(, "goals": [{"task": "nosuch"}],
                          "violation_rate": 0.0, "seed": 1})x")
              .find("unknown task symbol 'nosuch'") != std::string::npos);
    CHECK(bad("scn_goal_var.json",
              head + R"x(, "goals": [{"task": "travel(X,paris)"}],
                          "violation_rate": 0.0, "seed": 1})x")
              .find("is not ground") != std::string::npos);
    CHECK(bad("scn_goal_key.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)", "agent": 1}],
                          "violation_rate": 0.0, "seed": 1})x")
              .find("goal entry: unknown key 'agent'") != std::string::npos);
    CHECK(bad("scn_missing.json",
              head + R"x(, "goals": [{"task": "travel(aberdeen,paris)"}], "seed": 1})x")
              .find("missing key 'violation_rate'") != std::string::npos);

    fs::path alien = write_scratch(
        "scn_alien_norms.json",
        R"x([{"modality": "O", "context": "zz", "condition": "goto(X,Z)"}])x");
    std::string alien_head = "{\"domain\": " + json_quote(fixture_path("travel.json")) +
                             ", \"norms\": " + json_quote(alien);
    std::string msg = bad("scn_alien.json",
                          alien_head + R"x(, "goals": [{"task": "travel(aberdeen,paris)"}],
                                            "violation_rate": 0.0, "seed": 1})x");
    CHECK(msg.find("planted norm") != std::string::npos);
    CHECK(msg.find("unknown task symbol 'zz'") != std::string::npos);
}

TEST_CASE("trees render with method annotations") {
    Domain travel = fixture_domain("travel.json");
    auto plans = all_plans(travel, travel_initial(), gt("travel(aberdeen,paris)"));
    CHECK(render_tree(plans[0].root) ==
          "travel(aberdeen,paris)  [fly {X=aberdeen, Y=paris, Z=london}]\n"
          "  goto(aberdeen,london)\n"
          "  goto(london,paris)\n");

    Domain toy = fixture_domain("toy_grammar.json");
    auto toy_plans = all_plans(toy, State{}, gt("t1"));
    CHECK(render_tree(toy_plans[0].root) ==
          "t1  [m_t1_a]\n"
          "  t2  [m_t2]\n"
          "    a1\n"
          "    a2\n"
          "  t3  [m_t3]\n"
          "    a3\n");

    nlohmann::json tree = nlohmann::json::parse(tree_to_json_string(plans[0].root));
    CHECK(tree["task"] == "travel(aberdeen,paris)");
    CHECK(tree["method"] == "fly");
    CHECK(tree["grounding"] ==
          nlohmann::json({{"X", "aberdeen"}, {"Y", "paris"}, {"Z", "london"}}));
    CHECK(tree["synthetic"] == false);
    REQUIRE(tree["children"].size() == 2);
    CHECK(tree["children"][0]["task"] == "goto(aberdeen,london)");
    CHECK(tree["children"][0]["children"].empty());
    CHECK(tree["children"][0]["state_before"] ==
          nlohmann::json({"at(aberdeen)", "connect(aberdeen,london)", "connect(london,paris)"}));
    CHECK(tree["children"][1]["state_after"][0] == "at(paris)");
}

TEST_CASE("recognitions serialize to text and json") {
    Domain travel = fixture_domain("travel.json");
    auto plans = all_plans(travel, travel_initial(), gt("travel(aberdeen,paris)"));
    Recognition rec = recognize(travel, run_of(plans[0]), {});

    CHECK(recognition_to_text(rec) ==
          "parse_count: 1\n"
          "travel(aberdeen,paris)  [fly {X=aberdeen, Y=paris, Z=london}]\n"
          "  goto(aberdeen,london)\n"
          "  goto(london,paris)\n");

    nlohmann::json j = nlohmann::json::parse(recognition_to_json_string(rec));
    CHECK(j["parse_count"] == 1);
    CHECK(j["goal"] == "travel(aberdeen,paris)");
    CHECK(j["actions"] == nlohmann::json({"goto(aberdeen,london)", "goto(london,paris)"}));
    CHECK(j["tree"]["task"] == "travel(aberdeen,paris)");

    nlohmann::json arr =
        nlohmann::json::parse(recognitions_to_json_string({rec, rec}));
    REQUIRE(arr.size() == 2);
    CHECK(arr[0] == arr[1]);
}

TEST_CASE("evaluation reports serialize") {
    Domain branching = fixture_domain("branching.json");
    auto all = all_plans(branching, State{}, gt("t1"));
    NormSet planted({ntask(Modality::Prohibition, "t1", "t9")});
    std::vector<Run> runs{run_of(all[0])};
    NormLearner learner(branching);
    learner.observe(runs[0]);
    EvaluationReport report = evaluate(learner.result(), planted, runs, branching);

    std::string text = report_to_text(report);
    CHECK(text.find("observed_contexts: 8\n") == 0);
    CHECK(text.find("obligations.precision: 0.000000\n") != std::string::npos);
    CHECK(text.find("obligations.recall: 1.000000\n") != std::string::npos);
    CHECK(text.find("obligations.empty_planted: true\n") != std::string::npos);
    CHECK(text.find("prohibitions.precision: 0.200000\n") != std::string::npos);
    CHECK(text.find("prohibitions.recall: 1.000000\n") != std::string::npos);
    CHECK(text.find("prohibitions.true_positive: F[t1] t9\n") != std::string::npos);

    nlohmann::json j = nlohmann::json::parse(report_to_json_string(report));
    CHECK(j["observed_context_count"] == 8);
    CHECK(j["prohibitions"]["precision"].get<double>() == doctest::Approx(0.2));
    CHECK(j["prohibitions"]["true_positives"] == nlohmann::json({"F[t1] t9"}));
    CHECK(j["obligations"]["empty_planted"] == true);
    CHECK(j["obligations"]["false_positives"].size() == 20);
}
