// Command-line front end. Talks to the library only through egoplan.h.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include "egoplan/egoplan.h"

namespace {

// Exit codes beyond the documented 0-3: sysexits-style.
constexpr int kExitUsage = 64;
constexpr int kExitData = 65;
constexpr int kExitNoInput = 66;
constexpr int kExitSoftware = 70;
constexpr int kExitCantCreate = 73;

enum class LogLevel { Quiet, Info, Debug };
LogLevel g_log = LogLevel::Info;

void log_info(const std::string& msg) {
    if (g_log != LogLevel::Quiet) std::cerr << "egoplan: " << msg << "\n";
}
void log_debug(const std::string& msg) {
    if (g_log == LogLevel::Debug) std::cerr << "egoplan: " << msg << "\n";
}
void log_error(const std::string& msg) { std::cerr << "egoplan: error: " << msg << "\n"; }

struct CliError {
    int code;
    std::string message;
};

[[noreturn]] void die(int code, const std::string& msg) { throw CliError{code, msg}; }

int exit_code_for(egoplan_status s) {
    switch (s) {
        case EGOPLAN_OK: return 0;
        case EGOPLAN_UNSOLVABLE: return 1;
        case EGOPLAN_BUDGET: return 2;
        case EGOPLAN_EPISODE_FAILED: return 3;
        case EGOPLAN_INVALID_PLAN: return 1;
        case EGOPLAN_ERR_ARGUMENT: return kExitUsage;
        case EGOPLAN_ERR_PARSE:
        case EGOPLAN_ERR_SEMANTIC: return kExitData;
        case EGOPLAN_ERR_IO: return kExitNoInput;
        case EGOPLAN_ERR_NOT_FOUND: return kExitData;
        case EGOPLAN_ERR_INTERNAL: return kExitSoftware;
    }
    return kExitSoftware;
}

// Turns any error status into a CliError carrying the library message.
void check(egoplan_status s, const std::string& context) {
    if (s == EGOPLAN_OK) return;
    die(exit_code_for(s), context + ": " + egoplan_last_error());
}

struct Str {
    char* p{nullptr};
    ~Str() { egoplan_free_string(p); }
    char** out() { return &p; }
    std::string str() const { return p != nullptr ? std::string(p) : std::string(); }
};

template <typename T, void (*Free)(T*)>
struct Handle {
    T* p{nullptr};
    ~Handle() { Free(p); }
    T** out() { return &p; }
};
using Domain = Handle<egoplan_domain, egoplan_domain_free>;
using Problem = Handle<egoplan_problem, egoplan_problem_free>;
using Scenario = Handle<egoplan_scenario, egoplan_scenario_free>;

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) die(kExitNoInput, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    std::error_code ec;
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path(), ec);
    std::ofstream out(p, std::ios::binary);
    if (!out || !(out << text) || !out.flush()) die(kExitCantCreate, "cannot write " + path);
    log_debug("wrote " + path);
}

// Defaults, then the settings file, then flags.
struct GlobalConfig {
    std::uint64_t seed{0};
    std::uint64_t max_nodes{0};
    std::int64_t max_time_ms{0};
    std::string log_level{"info"};
    std::string out_dir;

    static GlobalConfig defaults() {
        GlobalConfig g;
        egoplan_search_options o;
        egoplan_search_options_default(&o);
        g.max_nodes = o.max_nodes;
        g.max_time_ms = o.max_time_ms;
        return g;
    }

    void load(const std::string& path) {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(read_text(path));
        } catch (const nlohmann::json::exception& e) {
            die(kExitData, path + ": " + e.what());
        }
        if (!j.is_object()) die(kExitData, path + ": expected a JSON object");
        try {
            for (const auto& [k, v] : j.items()) {
                if (k == "seed") seed = v.get<std::uint64_t>();
                else if (k == "max_nodes") max_nodes = v.get<std::uint64_t>();
                else if (k == "max_time_ms") max_time_ms = v.get<std::int64_t>();
                else if (k == "log_level") log_level = v.get<std::string>();
                else if (k == "out_dir") out_dir = v.get<std::string>();
                else die(kExitData, path + ": unknown key '" + k + "'");
            }
        } catch (const nlohmann::json::exception& e) {
            die(kExitData, path + ": " + e.what());
        }
    }
};

LogLevel parse_level(const std::string& s) {
    if (s == "quiet") return LogLevel::Quiet;
    if (s == "info") return LogLevel::Info;
    if (s == "debug") return LogLevel::Debug;
    die(kExitUsage, "log level must be quiet, info or debug");
}

egoplan_algo parse_algo(const std::string& s) { return s == "bfs" ? EGOPLAN_ALGO_BFS : EGOPLAN_ALGO_GBFS; }

// Flags shared by the subcommands that run the agent.
struct EpisodeFlags {
    std::string scenario;
    std::string task;
    int pre_explore{0};
    std::optional<std::uint64_t> seed;
    std::string planner{"gbfs"};
    std::optional<std::uint64_t> budget_nodes;
    std::optional<std::int64_t> budget_ms;
    double fault_rate{0.0};
    int fault_shots{0};
    std::uint64_t fault_seed{0};
    bool no_recovery{false};

    void add_to(CLI::App* sub) {
        sub->add_option("--scenario", scenario, "Scenario file")->required()->check(CLI::ExistingFile);
        sub->add_option("--task", task, "Task family, or family:P1,P2; defaults to the scenario's goal");
        sub->add_option("--pre-explore", pre_explore, "Random movement steps before planning")
            ->check(CLI::NonNegativeNumber);
        sub->add_option("--seed", seed, "Agent seed");
        sub->add_option("--planner", planner, "Search algorithm")->check(CLI::IsMember({"gbfs", "bfs"}));
        sub->add_option("--budget-nodes", budget_nodes, "Node budget per planner call")->check(CLI::PositiveNumber);
        sub->add_option("--budget-ms", budget_ms, "Time budget per planner call")->check(CLI::PositiveNumber);
        sub->add_option("--fault-rate", fault_rate, "Probability an interaction fails")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--fault-shots", fault_shots, "Maximum injected faults")->check(CLI::NonNegativeNumber);
        sub->add_option("--fault-seed", fault_seed, "Seed of the fault stream");
        sub->add_flag("--no-recovery", no_recovery, "End the episode at the first failed action");
    }

    egoplan_agent_options options(const GlobalConfig& g) const {
        egoplan_agent_options o;
        egoplan_agent_options_default(&o);
        o.planner = parse_algo(planner);
        o.max_nodes = budget_nodes.value_or(g.max_nodes);
        o.max_time_ms = budget_ms.value_or(g.max_time_ms);
        o.pre_explore = pre_explore;
        o.seed = seed.value_or(g.seed);
        o.fault_recovery = no_recovery ? 0 : 1;
        o.fault_rate = fault_rate;
        o.fault_shots = fault_shots;
        o.fault_seed = fault_seed;
        return o;
    }

    void load(Scenario& sc) const {
        check(egoplan_scenario_load(scenario.c_str(), sc.out()), scenario);
        if (!task.empty()) check(egoplan_scenario_set_task(sc.p, task.c_str()), "--task");
        Str t;
        check(egoplan_scenario_task(sc.p, t.out()), scenario);
        if (t.str().empty()) die(kExitUsage, scenario + " has no goal line; pass --task family:P1,P2");
        log_debug("task " + t.str());
    }
};

int cmd_plan(const GlobalConfig& g, const std::string& dom_path, const std::string& prob_path,
             const std::string& algo, std::optional<std::uint64_t> nodes, std::optional<std::int64_t> ms) {
    Domain dom;
    Problem prob;
    check(egoplan_domain_parse(read_text(dom_path).c_str(), dom.out()), dom_path);
    check(egoplan_problem_parse(dom.p, read_text(prob_path).c_str(), prob.out()), prob_path);
    egoplan_search_options o;
    o.algo = parse_algo(algo);
    o.max_nodes = nodes.value_or(g.max_nodes);
    o.max_time_ms = ms.value_or(g.max_time_ms);
    Str plan;
    egoplan_search_stats stats{};
    const egoplan_status s = egoplan_solve(dom.p, prob.p, &o, plan.out(), &stats);
    log_info(algo + ": " + std::to_string(stats.expanded) + " expanded, " + std::to_string(stats.generated) +
             " generated");
    switch (s) {
        case EGOPLAN_OK: std::cout << plan.str(); return 0;
        case EGOPLAN_UNSOLVABLE: log_info("no plan exists"); return 1;
        case EGOPLAN_BUDGET: log_info("search budget exhausted"); return 2;
        default: check(s, "plan");
    }
    return kExitSoftware;
}

int cmd_validate(const std::string& dom_path, const std::string& prob_path, const std::string& plan_path) {
    Domain dom;
    Problem prob;
    check(egoplan_domain_parse(read_text(dom_path).c_str(), dom.out()), dom_path);
    check(egoplan_problem_parse(dom.p, read_text(prob_path).c_str(), prob.out()), prob_path);
    Str report;
    const egoplan_status s = egoplan_validate_plan(dom.p, prob.p, read_text(plan_path).c_str(), report.out());
    if (s == EGOPLAN_OK) {
        std::cout << report.str() << "\n";
        return 0;
    }
    if (s == EGOPLAN_INVALID_PLAN) {
        std::cout << "invalid: " << report.str() << "\n";
        return 1;
    }
    check(s, plan_path);
    return kExitSoftware;
}

int cmd_run(const GlobalConfig& g, const EpisodeFlags& f, const std::string& trace, const std::string& env_trace) {
    Scenario sc;
    f.load(sc);
    const auto o = f.options(g);
    Str agent_trace, env_text;
    const egoplan_status s = egoplan_run_episode(sc.p, &o, agent_trace.out(), env_text.out());
    if (s != EGOPLAN_OK && s != EGOPLAN_EPISODE_FAILED) check(s, "run");

    std::string trace_path = trace;
    if (trace_path.empty() && !g.out_dir.empty()) trace_path = (std::filesystem::path(g.out_dir) / "trace.jsonl").string();
    if (!trace_path.empty()) write_text(trace_path, agent_trace.str());
    if (!env_trace.empty()) write_text(env_trace, env_text.str());

    // The last trace line is the summary record.
    std::string all = agent_trace.str();
    while (!all.empty() && all.back() == '\n') all.pop_back();
    std::cout << all.substr(all.rfind('\n') + 1) << "\n";
    if (s == EGOPLAN_EPISODE_FAILED) {
        log_info(std::string("episode failed: ") + egoplan_last_error());
        return 3;
    }
    log_info("episode succeeded");
    return 0;
}

int cmd_dump(const GlobalConfig& g, const EpisodeFlags& f, std::size_t iteration, const std::string& phase,
             bool domain) {
    Scenario sc;
    f.load(sc);
    const auto o = f.options(g);
    Str text;
    check(egoplan_dump_problem(sc.p, &o, iteration, phase == "explore" ? EGOPLAN_PHASE_EXPLORE : EGOPLAN_PHASE_SOLVE,
                               domain ? 1 : 0, text.out()),
          "dump-problem");
    std::cout << text.str();
    return 0;
}

struct GenFlags {
    std::string task;
    std::optional<std::uint64_t> seed;
    std::optional<int> size;
    std::optional<int> width;
    std::optional<int> height;
    std::optional<double> walls;
    std::optional<int> distractors;
    std::optional<int> distractor_receptacles;
    std::string out;
    bool full_problem{false};
};

int cmd_gen(const GlobalConfig& g, const GenFlags& f) {
    egoplan_generator_options o;
    egoplan_generator_options_default(&o);
    if (f.size) o.width = o.height = *f.size;
    if (f.width) o.width = *f.width;
    if (f.height) o.height = *f.height;
    if (f.walls) o.wall_fraction = *f.walls;
    if (f.distractors) o.distractor_objects = *f.distractors;
    if (f.distractor_receptacles) o.distractor_receptacles = *f.distractor_receptacles;
    Scenario sc;
    check(egoplan_scenario_generate(f.task.c_str(), f.seed.value_or(g.seed), &o, sc.out()), "gen-scenario");
    Str text;
    if (f.full_problem) {
        check(egoplan_scenario_full_problem(sc.p, text.out()), "gen-scenario");
    } else {
        check(egoplan_scenario_print(sc.p, text.out()), "gen-scenario");
    }
    if (f.out.empty()) {
        std::cout << text.str();
    } else {
        write_text(f.out, text.str());
    }
    return 0;
}

int cmd_bench(const GlobalConfig& g, const std::string& config, std::string out, int threads) {
    if (out.empty()) out = g.out_dir;
    if (out.empty()) die(kExitUsage, "bench needs --out or out_dir in the settings file");
    const std::string text = read_text(config);
    log_info("running suite " + config);
    Str table;
    check(egoplan_bench(text.c_str(), out.c_str(), threads, table.out(), nullptr), config);
    std::cout << table.str();
    log_info("wrote " + (std::filesystem::path(out) / "metrics.csv").string());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Planning agent for partially observable household tasks", "egoplan"};
    app.set_version_flag("--version", std::string(egoplan_version()));
    app.require_subcommand(1);

    std::string settings_path;
    std::optional<std::string> log_level;
    std::optional<std::string> out_dir;
    app.add_option("--settings", settings_path, "JSON settings file (seed, max_nodes, max_time_ms, log_level, out_dir)")
        ->check(CLI::ExistingFile);
    app.add_option("--log-level", log_level, "quiet, info or debug")->check(CLI::IsMember({"quiet", "info", "debug"}));
    app.add_option("--out-dir", out_dir, "Default output directory");

    // plan
    auto* plan = app.add_subcommand("plan", "Solve a PDDL problem and print the plan");
    std::string p_dom, p_prob, p_algo = "gbfs";
    std::optional<std::uint64_t> p_nodes;
    std::optional<std::int64_t> p_ms;
    plan->add_option("domain", p_dom, "Domain file")->required()->check(CLI::ExistingFile);
    plan->add_option("problem", p_prob, "Problem file")->required()->check(CLI::ExistingFile);
    plan->add_option("--algo", p_algo, "Search algorithm")->check(CLI::IsMember({"gbfs", "bfs"}));
    plan->add_option("--budget-nodes", p_nodes, "Node expansion budget")->check(CLI::PositiveNumber);
    plan->add_option("--budget-ms", p_ms, "Time budget in milliseconds")->check(CLI::PositiveNumber);

    // validate
    auto* validate = app.add_subcommand("validate", "Check a plan against a domain and problem");
    std::string v_dom, v_prob, v_plan;
    validate->add_option("domain", v_dom, "Domain file")->required()->check(CLI::ExistingFile);
    validate->add_option("problem", v_prob, "Problem file")->required()->check(CLI::ExistingFile);
    validate->add_option("plan", v_plan, "Plan file, one (action arg ...) per line")->required()->check(CLI::ExistingFile);

    // run
    auto* run = app.add_subcommand("run", "Run the agent on a scenario");
    EpisodeFlags r_flags;
    r_flags.add_to(run);
    std::string r_trace, r_env_trace;
    run->add_option("--trace", r_trace, "Agent trace output (JSON lines)");
    run->add_option("--env-trace", r_env_trace, "Environment step trace output (JSON lines)");

    // dump-problem
    auto* dump = app.add_subcommand("dump-problem", "Print the PDDL problem the agent builds at one iteration");
    EpisodeFlags d_flags;
    d_flags.add_to(dump);
    std::size_t d_iter = 0;
    std::string d_phase = "solve";
    bool d_domain = false;
    dump->add_option("--iteration", d_iter, "Iteration index, from 0")->required();
    dump->add_option("--phase", d_phase, "solve or explore")->check(CLI::IsMember({"solve", "explore"}));
    dump->add_flag("--domain", d_domain, "Print the domain of that call instead");

    // gen-scenario
    auto* gen = app.add_subcommand("gen-scenario", "Generate a scenario file");
    GenFlags g_flags;
    gen->add_option("--task", g_flags.task, "Task family, or family:P1,P2")->required();
    gen->add_option("--seed", g_flags.seed, "Generator seed");
    gen->add_option("--size", g_flags.size, "Grid side length")->check(CLI::PositiveNumber);
    gen->add_option("--width", g_flags.width, "Grid width")->check(CLI::PositiveNumber);
    gen->add_option("--height", g_flags.height, "Grid height")->check(CLI::PositiveNumber);
    gen->add_option("--walls", g_flags.walls, "Fraction of wall cells")->check(CLI::Range(0.0, 1.0));
    gen->add_option("--distractors", g_flags.distractors, "Distractor objects")->check(CLI::NonNegativeNumber);
    gen->add_option("--distractor-receptacles", g_flags.distractor_receptacles, "Distractor receptacles")
        ->check(CLI::NonNegativeNumber);
    gen->add_option("--out", g_flags.out, "Output file (default stdout)");
    gen->add_flag("--full-problem", g_flags.full_problem, "Print the fully observable PDDL problem instead");

    // bench
    auto* bench = app.add_subcommand("bench", "Run a benchmark suite");
    std::string b_config, b_out;
    int b_threads = 0;
    bench->add_option("--config", b_config, "Suite configuration (JSON)")->required()->check(CLI::ExistingFile);
    bench->add_option("--out", b_out, "Output directory");
    bench->add_option("--threads", b_threads, "Worker threads (overrides the config)")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "egoplan: " << e.what() << "\n\n" << app.help();
        return kExitUsage;
    }

    try {
        GlobalConfig g = GlobalConfig::defaults();
        if (!settings_path.empty()) g.load(settings_path);
        if (log_level) g.log_level = *log_level;
        if (out_dir) g.out_dir = *out_dir;
        g_log = parse_level(g.log_level);

        if (*plan) return cmd_plan(g, p_dom, p_prob, p_algo, p_nodes, p_ms);
        if (*validate) return cmd_validate(v_dom, v_prob, v_plan);
        if (*run) return cmd_run(g, r_flags, r_trace, r_env_trace);
        if (*dump) return cmd_dump(g, d_flags, d_iter, d_phase, d_domain);
        if (*gen) return cmd_gen(g, g_flags);
        if (*bench) return cmd_bench(g, b_config, b_out, b_threads);
    } catch (const CliError& e) {
        log_error(e.message);
        return e.code;
    }
    return kExitUsage;
}
