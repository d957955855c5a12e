#include <cstdint>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "normid/errors.hpp"
#include "normid/io.hpp"
#include "normid/learner.hpp"
#include "normid/simulator.hpp"

namespace {

using namespace normid;

void emit(const std::string& content, const std::string& out_path) {
    if (out_path.empty())
        std::cout << content;
    else
        write_text_file(out_path, content);
}

std::vector<Task> parse_goal_flags(const std::vector<std::string>& texts, const Domain& domain) {
    std::vector<Task> goals;
    for (const std::string& s : texts)
        goals.push_back(parse_goal_task(s, domain));
    return goals;
}

std::string norm_lines(const NormSet& norms) {
    std::string out;
    for (const Norm& n : norms) {
        out += n.to_string();
        if (n.evidence)
            out += "  (supporting " + std::to_string(n.evidence->supporting) + ", refuting " +
                   std::to_string(n.evidence->refuting) + ")";
        out += '\n';
    }
    return out;
}

std::string run_lines(const std::vector<Run>& runs) {
    std::string out;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        out += "run #" + std::to_string(i + 1) + ":";
        if (runs[i].goal)
            out += " goal " + runs[i].goal->to_string() + ";";
        out += " actions";
        for (const Action& a : runs[i].observations)
            out += ' ' + a.to_string();
        out += '\n';
    }
    return out;
}

struct PlanOpts {
    std::string domain_path;
    std::vector<std::string> initial;
    std::vector<std::string> goals;
    std::size_t depth_cap = kDefaultDepthCap;
    std::string out;
    std::string format = "text";
};

void run_plan(const PlanOpts& opt) {
    Domain domain = load_domain(opt.domain_path);
    State initial = parse_state_strings(opt.initial, domain, "--initial");
    std::vector<Plan> plans;
    for (const Task& goal : parse_goal_flags(opt.goals, domain)) {
        std::vector<Plan> found = all_plans(domain, initial, goal, opt.depth_cap);
        plans.insert(plans.end(), std::make_move_iterator(found.begin()),
                     std::make_move_iterator(found.end()));
    }
    if (opt.format == "machine") {
        std::vector<Run> runs;
        for (const Plan& p : plans)
            runs.push_back(run_of(p));
        emit(runs_to_string(runs), opt.out);
        return;
    }
    std::string out = "plans: " + std::to_string(plans.size()) + "\n";
    for (std::size_t i = 0; i < plans.size(); ++i) {
        out += "plan #" + std::to_string(i + 1) + ":\n";
        out += render_tree(plans[i].root);
    }
    emit(out, opt.out);
}

struct RecognizeOpts {
    std::string domain_path;
    std::string runs_path;
    std::vector<std::string> goals;
    std::size_t ground_cap = kDefaultGroundCap;
    std::string out;
    std::string format = "text";
};

void run_recognize(const RecognizeOpts& opt) {
    Domain domain = load_domain(opt.domain_path);
    std::vector<Run> runs = load_runs(opt.runs_path, domain);
    std::vector<Task> goals = parse_goal_flags(opt.goals, domain);
    std::vector<Recognition> recognitions;
    for (std::size_t i = 0; i < runs.size(); ++i) {
        try {
            recognitions.push_back(recognize(domain, runs[i], goals, opt.ground_cap));
        } catch (Error& e) {
            e.add_context("run #" + std::to_string(i + 1));
            throw;
        }
    }
    if (opt.format == "machine") {
        emit(recognitions_to_json_string(recognitions), opt.out);
        return;
    }
    std::string out;
    for (std::size_t i = 0; i < recognitions.size(); ++i) {
        out += "run #" + std::to_string(i + 1) + ":\n";
        out += recognition_to_text(recognitions[i]);
    }
    emit(out, opt.out);
}

struct LearnOpts {
    std::string domain_path;
    std::string runs_path;
    std::vector<std::string> goals;
    std::size_t depth_cap = kDefaultDepthCap;
    std::size_t ground_cap = kDefaultGroundCap;
    double ot = 3.0;
    double ft = 3.0;
    bool no_obligation_refutation = false;
    std::string out;
    std::string format = "text";
};

void run_learn(const LearnOpts& opt, bool threshold) {
    Domain domain = load_domain(opt.domain_path);
    std::vector<Run> runs = load_runs(opt.runs_path, domain);
    std::vector<Task> goals = parse_goal_flags(opt.goals, domain);
    NormSet result;
    if (threshold) {
        ThresholdConfig config;
        config.goal_tasks = goals;
        config.depth_cap = opt.depth_cap;
        config.ground_cap = opt.ground_cap;
        config.obligation_threshold = opt.ot;
        config.prohibition_threshold = opt.ft;
        config.obligation_refutation = !opt.no_obligation_refutation;
        result = threshold_learn(runs, domain, config);
    } else {
        NormLearner learner(domain, LearnerConfig{goals, opt.depth_cap, opt.ground_cap});
        for (const Run& run : runs)
            learner.observe(run);
        result = learner.result();
    }
    emit(opt.format == "machine" ? norms_to_string(result) : norm_lines(result), opt.out);
}

struct SimulateOpts {
    std::string scenario_path;
    std::size_t count = 0;
    bool seed_set = false;
    std::uint64_t seed = 0;
    std::size_t depth_cap = kDefaultDepthCap;
    std::string out;
    std::string format = "text";
};

void run_simulate(const SimulateOpts& opt) {
    Scenario scenario = load_scenario(opt.scenario_path);
    if (opt.seed_set)
        scenario.seed = opt.seed;
    std::vector<Run> runs = generate_runs(scenario, opt.count, opt.depth_cap);
    emit(opt.format == "machine" ? runs_to_string(runs) : run_lines(runs), opt.out);
}

struct EvaluateOpts {
    std::string scenario_path;
    std::string domain_path;
    std::string norms_path;
    std::string learned_path;
    std::string runs_path;
    std::vector<std::string> goals;
    std::size_t depth_cap = kDefaultDepthCap;
    std::size_t ground_cap = kDefaultGroundCap;
    std::string out;
    std::string format = "text";
};

void run_evaluate(const EvaluateOpts& opt) {
    Domain domain;
    NormSet planted;
    if (!opt.scenario_path.empty()) {
        Scenario scenario = load_scenario(opt.scenario_path);
        domain = std::move(scenario.domain);
        planted = std::move(scenario.planted);
    } else {
        if (opt.domain_path.empty() || opt.norms_path.empty())
            throw IoError("evaluate needs either --scenario or both --domain and --norms");
        domain = load_domain(opt.domain_path);
        planted = load_norms(opt.norms_path);
    }
    NormSet learned = load_norms(opt.learned_path);
    std::vector<Run> runs = load_runs(opt.runs_path, domain);
    std::vector<Task> goals = parse_goal_flags(opt.goals, domain);
    EvaluationReport report =
        evaluate(learned, planted, runs, domain, goals, opt.depth_cap, opt.ground_cap);
    emit(opt.format == "machine" ? report_to_json_string(report) : report_to_text(report),
         opt.out);
}

struct PipelineOpts {
    std::string scenario_path;
    std::size_t count = 0;
    bool seed_set = false;
    std::uint64_t seed = 0;
    double ot = 3.0;
    double ft = 3.0;
    bool no_obligation_refutation = false;
    std::size_t depth_cap = kDefaultDepthCap;
    std::size_t ground_cap = kDefaultGroundCap;
    std::string save_runs_path;
    std::string save_norms_path;
    std::string out;
    std::string format = "text";
};

void run_pipeline(const PipelineOpts& opt) {
    Scenario scenario = load_scenario(opt.scenario_path);
    if (opt.seed_set)
        scenario.seed = opt.seed;
    std::vector<Run> runs = generate_runs(scenario, opt.count, opt.depth_cap);
    if (!opt.save_runs_path.empty())
        save_runs(runs, opt.save_runs_path);

    ThresholdConfig config;
    config.depth_cap = opt.depth_cap;
    config.ground_cap = opt.ground_cap;
    config.obligation_threshold = opt.ot;
    config.prohibition_threshold = opt.ft;
    config.obligation_refutation = !opt.no_obligation_refutation;
    NormSet learned = threshold_learn(runs, scenario.domain, config);
    if (!opt.save_norms_path.empty())
        save_norms(learned, opt.save_norms_path);

    EvaluationReport report = evaluate(learned, scenario.planted, runs, scenario.domain, {},
                                       opt.depth_cap, opt.ground_cap);
    emit(opt.format == "machine" ? report_to_json_string(report) : report_to_text(report),
         opt.out);
}

void add_format_flag(CLI::App* cmd, std::string& format) {
    cmd->add_option("--format", format, "output format: text or machine")
        ->check(CLI::IsMember({"text", "machine"}));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"norm identification from observed plans"};
    app.require_subcommand(1);

    PlanOpts plan_opts;
    CLI::App* plan_cmd = app.add_subcommand("plan", "enumerate plans for goal tasks");
    plan_cmd->add_option("--domain", plan_opts.domain_path, "domain file")->required();
    plan_cmd->add_option("--initial", plan_opts.initial, "initial state atom (repeatable)");
    plan_cmd->add_option("--goals", plan_opts.goals, "ground goal task (repeatable)")
        ->required();
    plan_cmd->add_option("--depth-cap", plan_opts.depth_cap, "decomposition depth cap");
    plan_cmd->add_option("--out", plan_opts.out, "output path (default stdout)");
    add_format_flag(plan_cmd, plan_opts.format);

    RecognizeOpts rec_opts;
    CLI::App* rec_cmd = app.add_subcommand("recognize", "reconstruct decomposition trees");
    rec_cmd->add_option("--domain", rec_opts.domain_path, "domain file")->required();
    rec_cmd->add_option("--runs", rec_opts.runs_path, "run-trace file")->required();
    rec_cmd->add_option("--goals", rec_opts.goals, "candidate goal task (repeatable)");
    rec_cmd->add_option("--ground-cap", rec_opts.ground_cap, "grounding instance cap");
    rec_cmd->add_option("--out", rec_opts.out, "output path (default stdout)");
    add_format_flag(rec_cmd, rec_opts.format);

    LearnOpts learn_opts;
    CLI::App* learn_cmd = app.add_subcommand("learn", "identify norms from compliant runs");
    learn_cmd->add_option("--domain", learn_opts.domain_path, "domain file")->required();
    learn_cmd->add_option("--runs", learn_opts.runs_path, "run-trace file")->required();
    learn_cmd->add_option("--goals", learn_opts.goals, "candidate goal task (repeatable)");
    learn_cmd->add_option("--depth-cap", learn_opts.depth_cap, "decomposition depth cap");
    learn_cmd->add_option("--ground-cap", learn_opts.ground_cap, "grounding instance cap");
    learn_cmd->add_option("--out", learn_opts.out, "output path (default stdout)");
    add_format_flag(learn_cmd, learn_opts.format);

    LearnOpts tl_opts;
    CLI::App* tl_cmd =
        app.add_subcommand("learn-threshold", "identify norms from runs with violations");
    tl_cmd->add_option("--domain", tl_opts.domain_path, "domain file")->required();
    tl_cmd->add_option("--runs", tl_opts.runs_path, "run-trace file")->required();
    tl_cmd->add_option("--goals", tl_opts.goals, "candidate goal task (repeatable)");
    tl_cmd->add_option("--ot", tl_opts.ot, "obligation support/refutation threshold");
    tl_cmd->add_option("--ft", tl_opts.ft, "prohibition support/refutation threshold");
    tl_cmd->add_flag("--no-obligation-refutation", tl_opts.no_obligation_refutation,
                     "count obligation support only");
    tl_cmd->add_option("--depth-cap", tl_opts.depth_cap, "decomposition depth cap");
    tl_cmd->add_option("--ground-cap", tl_opts.ground_cap, "grounding instance cap");
    tl_cmd->add_option("--out", tl_opts.out, "output path (default stdout)");
    add_format_flag(tl_cmd, tl_opts.format);

    SimulateOpts sim_opts;
    CLI::App* sim_cmd = app.add_subcommand("simulate", "generate runs from a scenario");
    sim_cmd->add_option("--scenario", sim_opts.scenario_path, "scenario file")->required();
    sim_cmd->add_option("-n,--count", sim_opts.count, "number of runs")->required();
    CLI::Option* sim_seed = sim_cmd->add_option("--seed", sim_opts.seed, "override scenario seed");
    sim_cmd->add_option("--depth-cap", sim_opts.depth_cap, "decomposition depth cap");
    sim_cmd->add_option("--out", sim_opts.out, "output path (default stdout)");
    add_format_flag(sim_cmd, sim_opts.format);

    EvaluateOpts eval_opts;
    CLI::App* eval_cmd = app.add_subcommand("evaluate", "score learned norms against planted");
    eval_cmd->add_option("--scenario", eval_opts.scenario_path,
                         "scenario file providing domain and planted norms");
    eval_cmd->add_option("--domain", eval_opts.domain_path, "domain file");
    eval_cmd->add_option("--norms", eval_opts.norms_path, "planted norm file");
    eval_cmd->add_option("--learned", eval_opts.learned_path, "learned norm file")->required();
    eval_cmd->add_option("--runs", eval_opts.runs_path, "run-trace file")->required();
    eval_cmd->add_option("--goals", eval_opts.goals, "candidate goal task (repeatable)");
    eval_cmd->add_option("--depth-cap", eval_opts.depth_cap, "decomposition depth cap");
    eval_cmd->add_option("--ground-cap", eval_opts.ground_cap, "grounding instance cap");
    eval_cmd->add_option("--out", eval_opts.out, "output path (default stdout)");
    add_format_flag(eval_cmd, eval_opts.format);

    PipelineOpts pipe_opts;
    CLI::App* pipe_cmd =
        app.add_subcommand("pipeline", "simulate, learn with thresholds, evaluate");
    pipe_cmd->add_option("--scenario", pipe_opts.scenario_path, "scenario file")->required();
    pipe_cmd->add_option("-n,--count", pipe_opts.count, "number of runs")->required();
    CLI::Option* pipe_seed =
        pipe_cmd->add_option("--seed", pipe_opts.seed, "override scenario seed");
    pipe_cmd->add_option("--ot", pipe_opts.ot, "obligation support/refutation threshold");
    pipe_cmd->add_option("--ft", pipe_opts.ft, "prohibition support/refutation threshold");
    pipe_cmd->add_flag("--no-obligation-refutation", pipe_opts.no_obligation_refutation,
                       "count obligation support only");
    pipe_cmd->add_option("--depth-cap", pipe_opts.depth_cap, "decomposition depth cap");
    pipe_cmd->add_option("--ground-cap", pipe_opts.ground_cap, "grounding instance cap");
    pipe_cmd->add_option("--save-runs", pipe_opts.save_runs_path, "also write the run file here");
    pipe_cmd->add_option("--save-norms", pipe_opts.save_norms_path,
                         "also write the learned norm file here");
    pipe_cmd->add_option("--out", pipe_opts.out, "output path (default stdout)");
    add_format_flag(pipe_cmd, pipe_opts.format);

    try {
        app.parse(argc, argv);
        sim_opts.seed_set = sim_seed->count() > 0;
        pipe_opts.seed_set = pipe_seed->count() > 0;
        if (*plan_cmd)
            run_plan(plan_opts);
        else if (*rec_cmd)
            run_recognize(rec_opts);
        else if (*learn_cmd)
            run_learn(learn_opts, false);
        else if (*tl_cmd)
            run_learn(tl_opts, true);
        else if (*sim_cmd)
            run_simulate(sim_opts);
        else if (*eval_cmd)
            run_evaluate(eval_opts);
        else if (*pipe_cmd)
            run_pipeline(pipe_opts);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return e.exit_code();
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
