#include "egoplan/egoplan.h"

#include <json.hpp>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "egoplan/agent/agent.hpp"
#include "egoplan/agent/domain.hpp"
#include "egoplan/bench/bench.hpp"
#include "egoplan/env/environment.hpp"
#include "egoplan/env/generator.hpp"
#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/parser.hpp"
#include "egoplan/pddl/printer.hpp"
#include "egoplan/pddl/strips.hpp"
#include "egoplan/planner/search.hpp"

using namespace egoplan;

struct egoplan_domain {
    pddl::Domain dom;
};
struct egoplan_problem {
    pddl::Problem prob;
};
struct egoplan_scenario {
    env::EnvTask task;
};
struct egoplan_env {
    env::Environment env;
};

namespace {

thread_local std::string g_last_error;

// Carries a status through the exception-to-status translation.
struct StatusError : std::runtime_error {
    egoplan_status status;
    StatusError(egoplan_status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
};

[[noreturn]] void fail(egoplan_status s, const std::string& msg) { throw StatusError(s, msg); }

template <typename F>
egoplan_status guarded(F&& f) {
    try {
        const egoplan_status s = f();
        if (s == EGOPLAN_OK) g_last_error.clear();
        return s;
    } catch (const StatusError& e) {
        g_last_error = e.what();
        return e.status;
    } catch (const pddl::ParseError& e) {
        g_last_error = e.what();
        return EGOPLAN_ERR_PARSE;
    } catch (const pddl::SemanticError& e) {
        g_last_error = e.what();
        return EGOPLAN_ERR_SEMANTIC;
    } catch (const nlohmann::json::exception& e) {
        g_last_error = e.what();
        return EGOPLAN_ERR_PARSE;
    } catch (const std::invalid_argument& e) {
        g_last_error = e.what();
        return EGOPLAN_ERR_ARGUMENT;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return EGOPLAN_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return EGOPLAN_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return EGOPLAN_ERR_INTERNAL;
    }
}

template <typename T>
void need(const T* p, const char* what) {
    if (p == nullptr) fail(EGOPLAN_ERR_ARGUMENT, std::string(what) + " is NULL");
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.data(), s.size() + 1);
    return out;
}

void put(char** out, const std::string& s) {
    if (out != nullptr) *out = dup(s);
}

// Input text that fails validation is a parse error at this boundary.
template <typename F>
auto parsing(F&& f) {
    try {
        return f();
    } catch (const std::invalid_argument& e) {
        fail(EGOPLAN_ERR_PARSE, e.what());
    }
}

std::string read_file(const char* path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(EGOPLAN_ERR_IO, std::string("cannot open ") + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

planner::Budget budget_of(uint64_t nodes, int64_t ms) {
    if (nodes == 0) fail(EGOPLAN_ERR_ARGUMENT, "max_nodes must be positive");
    if (ms <= 0) fail(EGOPLAN_ERR_ARGUMENT, "max_time_ms must be positive");
    return planner::Budget{nodes, std::chrono::milliseconds(ms)};
}

agent::PlannerKind planner_of(egoplan_algo a) {
    switch (a) {
        case EGOPLAN_ALGO_GBFS: return agent::PlannerKind::Gbfs;
        case EGOPLAN_ALGO_BFS: return agent::PlannerKind::Bfs;
    }
    fail(EGOPLAN_ERR_ARGUMENT, "unknown search algorithm");
}

env::TaskSpec task_of(const char* text) {
    need(text, "task");
    env::TaskSpec spec = env::TaskSpec::parse(text);
    env::family_info(spec.family);  // throws for unknown families
    return spec;
}

agent::AgentConfig agent_config(const egoplan_agent_options& o) {
    agent::AgentConfig c;
    c.planner = planner_of(o.planner);
    c.budget = budget_of(o.max_nodes, o.max_time_ms);
    if (o.pre_explore < 0) fail(EGOPLAN_ERR_ARGUMENT, "pre_explore must be non-negative");
    c.pre_explore_budget = o.pre_explore;
    c.seed = o.seed;
    c.fault_recovery = o.fault_recovery != 0;
    c.prioritize_frontier = o.prioritize_frontier != 0;
    c.explore_empty_hands = o.explore_empty_hands != 0;
    return c;
}

env::FaultConfig fault_config(double rate, int shots, uint64_t seed) {
    if (!(rate >= 0.0 && rate <= 1.0)) fail(EGOPLAN_ERR_ARGUMENT, "fault_rate must lie in [0, 1]");
    if (shots < 0) fail(EGOPLAN_ERR_ARGUMENT, "fault_shots must be non-negative");
    return env::FaultConfig{rate, shots, seed};
}

void require_task(const env::EnvTask& t) {
    if (t.task.family.empty()) fail(EGOPLAN_ERR_ARGUMENT, "scenario has no task");
}

std::string kind_name(env::EntityKind k) { return k == env::EntityKind::Object ? "object" : "receptacle"; }

std::string perception_json(const env::Perception& p) {
    nlohmann::ordered_json j;
    j["failed"] = p.failed;
    j["agent_location"] = p.agent_location;
    j["held"] = p.held;
    j["edges"] = nlohmann::ordered_json::array();
    for (const auto& e : p.edges) j["edges"].push_back({e.from, e.to, e.label});
    j["entities"] = nlohmann::ordered_json::array();
    for (const auto& e : p.entities) {
        nlohmann::ordered_json x;
        x["id"] = e.id;
        x["subtype"] = e.subtype;
        x["kind"] = kind_name(e.kind);
        x["location"] = e.location;
        x["container"] = e.container;
        x["props"] = std::vector<std::string>(e.props.begin(), e.props.end());
        x["held"] = e.held;
        j["entities"].push_back(std::move(x));
    }
    return j.dump();
}

std::string env_trace_text(const std::vector<env::StepRecord>& trace) {
    std::string out;
    for (const auto& r : trace) out += env::step_record_json(r) + "\n";
    return out;
}

std::string plan_text(const planner::Plan& plan) {
    std::string out;
    for (const auto& s : plan.steps) {
        if (!s.synthetic) out += s.to_string() + "\n";
    }
    return out;
}

// "(name a b)" -> tokens; blank and ';' lines yield nothing.
std::optional<std::vector<std::string>> plan_line(const std::string& raw, std::size_t lineno) {
    std::string line = raw.substr(0, raw.find(';'));
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) return std::nullopt;
    line = line.substr(b, line.find_last_not_of(" \t\r") - b + 1);
    if (line.size() < 2 || line.front() != '(' || line.back() != ')') {
        fail(EGOPLAN_ERR_PARSE, "plan line " + std::to_string(lineno) + ": expected '(action arg ...)'");
    }
    std::istringstream ss(line.substr(1, line.size() - 2));
    std::vector<std::string> toks;
    for (std::string t; ss >> t;) toks.push_back(t);
    if (toks.empty()) fail(EGOPLAN_ERR_PARSE, "plan line " + std::to_string(lineno) + ": empty action");
    return toks;
}

}  // namespace

extern "C" {

const char* egoplan_version(void) { return EGOPLAN_VERSION; }

const char* egoplan_last_error(void) { return g_last_error.c_str(); }

void egoplan_free_string(char* s) { std::free(s); }

egoplan_status egoplan_domain_parse(const char* text, egoplan_domain** out) {
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        *out = new egoplan_domain{pddl::parse_domain(text)};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_domain_runtime(egoplan_domain** out) {
    return guarded([&] {
        need(out, "out");
        *out = new egoplan_domain{agent::runtime_domain()};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_domain_print(const egoplan_domain* dom, char** out) {
    return guarded([&] {
        need(dom, "domain");
        need(out, "out");
        put(out, pddl::print_domain(dom->dom));
        return EGOPLAN_OK;
    });
}

void egoplan_domain_free(egoplan_domain* dom) { delete dom; }

egoplan_status egoplan_problem_parse(const egoplan_domain* dom, const char* text, egoplan_problem** out) {
    return guarded([&] {
        need(dom, "domain");
        need(text, "text");
        need(out, "out");
        *out = new egoplan_problem{pddl::parse_problem(text, dom->dom)};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_problem_print(const egoplan_problem* prob, char** out) {
    return guarded([&] {
        need(prob, "problem");
        need(out, "out");
        put(out, pddl::print_problem(prob->prob));
        return EGOPLAN_OK;
    });
}

void egoplan_problem_free(egoplan_problem* prob) { delete prob; }

void egoplan_search_options_default(egoplan_search_options* opts) {
    if (opts == nullptr) return;
    const planner::Budget b;
    opts->algo = EGOPLAN_ALGO_GBFS;
    opts->max_nodes = b.max_nodes;
    opts->max_time_ms = b.max_time.count();
}

egoplan_status egoplan_solve(const egoplan_domain* dom, const egoplan_problem* prob,
                             const egoplan_search_options* opts, char** plan_out, egoplan_search_stats* stats) {
    return guarded([&] {
        need(dom, "domain");
        need(prob, "problem");
        need(plan_out, "plan_out");
        egoplan_search_options o;
        egoplan_search_options_default(&o);
        if (opts != nullptr) o = *opts;
        const auto budget = budget_of(o.max_nodes, o.max_time_ms);
        const auto kind = planner_of(o.algo);

        const auto task = pddl::ground(dom->dom, prob->prob);
        const auto res = kind == agent::PlannerKind::Bfs ? planner::solve_bfs(task, budget)
                                                          : planner::solve_gbfs(task, budget);
        if (stats != nullptr) {
            stats->expanded = res.stats.expanded;
            stats->generated = res.stats.generated;
            stats->wall_ms = res.stats.wall_ms;
            stats->plan_length = res.found() ? res.plan->length() : 0;
        }
        switch (res.stats.result) {
            case planner::Outcome::PlanFound: put(plan_out, plan_text(*res.plan)); return EGOPLAN_OK;
            case planner::Outcome::Unsolvable: g_last_error = "no plan exists"; return EGOPLAN_UNSOLVABLE;
            case planner::Outcome::BudgetExhausted: g_last_error = "search budget exhausted"; return EGOPLAN_BUDGET;
        }
        return EGOPLAN_ERR_INTERNAL;
    });
}

egoplan_status egoplan_validate_plan(const egoplan_domain* dom, const egoplan_problem* prob, const char* plan,
                                     char** report) {
    return guarded([&] {
        need(dom, "domain");
        need(prob, "problem");
        need(plan, "plan");
        const pddl::Domain& d = dom->dom;
        const pddl::Problem& p = prob->prob;

        pddl::State s = p.init;
        std::istringstream in(plan);
        std::size_t lineno = 0;
        std::size_t step = 0;
        std::string reason;
        for (std::string raw; std::getline(in, raw);) {
            ++lineno;
            const auto toks = plan_line(raw, lineno);
            if (!toks) continue;
            if ((*toks)[0] == pddl::kAchieverSchema) continue;
            ++step;
            const std::string where = "step " + std::to_string(step) + " (line " + std::to_string(lineno) + ")";
            const pddl::ActionSchema* schema = d.find_action((*toks)[0]);
            if (schema == nullptr) {
                reason = where + ": unknown action " + (*toks)[0];
                break;
            }
            const std::vector<std::string> args(toks->begin() + 1, toks->end());
            if (args.size() != schema->params.size()) {
                reason = where + ": " + schema->name + " takes " + std::to_string(schema->params.size()) +
                         " arguments";
                break;
            }
            for (std::size_t i = 0; i < args.size() && reason.empty(); ++i) {
                const pddl::ObjectConst* obj = p.find_object(args[i]);
                if (obj == nullptr) {
                    reason = where + ": unknown object " + args[i];
                } else if (!pddl::type_matches(obj->type, schema->params[i].type)) {
                    reason = where + ": " + args[i] + " is not a " + schema->params[i].type;
                }
            }
            if (!reason.empty()) break;
            if (!pddl::equality_holds(*schema, args)) {
                reason = where + ": equality constraint violated";
                break;
            }
            const auto ga = pddl::instantiate(*schema, args);
            if (!pddl::applicable(s, ga)) {
                reason = where + ": precondition of " + ga.to_string() + " does not hold";
                break;
            }
            s = pddl::apply(s, ga);
        }
        if (reason.empty() && !pddl::goal_holds(d, p, s)) reason = "goal does not hold after the plan";
        if (reason.empty()) {
            put(report, "valid plan with " + std::to_string(step) + " steps");
            return EGOPLAN_OK;
        }
        put(report, reason);
        g_last_error = reason;
        return EGOPLAN_INVALID_PLAN;
    });
}

void egoplan_generator_options_default(egoplan_generator_options* opts) {
    if (opts == nullptr) return;
    const env::GeneratorConfig g;
    opts->width = g.width;
    opts->height = g.height;
    opts->wall_fraction = g.wall_fraction;
    opts->distractor_objects = g.distractor_objects;
    opts->distractor_receptacles = g.distractor_receptacles;
}

egoplan_status egoplan_scenario_parse(const char* text, egoplan_scenario** out) {
    return guarded([&] {
        need(text, "text");
        need(out, "out");
        auto t = parsing([&] { return env::parse_scenario(text); });
        *out = new egoplan_scenario{std::move(t)};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_load(const char* path, egoplan_scenario** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        const std::string text = read_file(path);
        auto t = parsing([&] { return env::parse_scenario(text); });
        *out = new egoplan_scenario{std::move(t)};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_generate(const char* task, uint64_t seed, const egoplan_generator_options* opts,
                                         egoplan_scenario** out) {
    return guarded([&] {
        need(out, "out");
        const auto spec = task_of(task);
        egoplan_generator_options o;
        egoplan_generator_options_default(&o);
        if (opts != nullptr) o = *opts;
        env::GeneratorConfig g;
        g.width = o.width;
        g.height = o.height;
        g.wall_fraction = o.wall_fraction;
        g.distractor_objects = o.distractor_objects;
        g.distractor_receptacles = o.distractor_receptacles;
        auto t = env::generate_scenario(seed, spec, g);
        *out = new egoplan_scenario{std::move(t)};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_print(const egoplan_scenario* sc, char** out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        put(out, env::print_scenario(sc->task));
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_set_task(egoplan_scenario* sc, const char* task) {
    return guarded([&] {
        need(sc, "scenario");
        auto spec = task_of(task);
        if (spec.params.empty() && spec.family == sc->task.task.family) return EGOPLAN_OK;
        if (spec.params.empty()) {
            fail(EGOPLAN_ERR_ARGUMENT, "task '" + spec.family + "' needs parameters (family:P1,P2)");
        }
        env::validate_task(spec, sc->task.scenario.kb);
        sc->task.task = std::move(spec);
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_task(const egoplan_scenario* sc, char** out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        put(out, sc->task.task.family.empty() ? std::string() : sc->task.task.to_string());
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_full_problem(const egoplan_scenario* sc, char** out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        require_task(sc->task);
        put(out, pddl::print_problem(env::Environment(sc->task).full_problem()));
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_scenario_expert_length(const egoplan_scenario* sc, size_t* out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        require_task(sc->task);
        try {
            *out = bench::expert_length(sc->task);
        } catch (const std::logic_error& e) {
            fail(EGOPLAN_UNSOLVABLE, e.what());
        }
        return EGOPLAN_OK;
    });
}

void egoplan_scenario_free(egoplan_scenario* sc) { delete sc; }

egoplan_status egoplan_env_create(const egoplan_scenario* sc, double fault_rate, int fault_shots, uint64_t fault_seed,
                                  egoplan_env** out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        require_task(sc->task);
        *out = new egoplan_env{env::Environment(sc->task, fault_config(fault_rate, fault_shots, fault_seed))};
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_env_reset(egoplan_env* e, char** perception) {
    return guarded([&] {
        need(e, "env");
        const auto p = e->env.reset();
        put(perception, perception_json(p));
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_env_step(egoplan_env* e, const char* action, char** perception, int* failed) {
    return guarded([&] {
        need(e, "env");
        need(action, "action");
        const auto a = env::EnvAction::parse(action);
        const auto [p, cost] = e->env.step(a);
        (void)cost;
        if (failed != nullptr) *failed = p.failed ? 1 : 0;
        put(perception, perception_json(p));
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_env_goal_check(const egoplan_env* e, char** status, int* success) {
    return guarded([&] {
        need(e, "env");
        const auto g = e->env.goal_check();
        if (success != nullptr) *success = g.success ? 1 : 0;
        if (status != nullptr) {
            nlohmann::ordered_json j;
            j["success"] = g.success;
            j["conditions"] = nlohmann::ordered_json::array();
            for (std::size_t i = 0; i < g.labels.size(); ++i) {
                j["conditions"].push_back({{"label", g.labels[i]}, {"satisfied", static_cast<bool>(g.conditions[i])}});
            }
            put(status, j.dump());
        }
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_env_trace(const egoplan_env* e, char** out) {
    return guarded([&] {
        need(e, "env");
        need(out, "out");
        put(out, env_trace_text(e->env.trace()));
        return EGOPLAN_OK;
    });
}

void egoplan_env_free(egoplan_env* e) { delete e; }

void egoplan_agent_options_default(egoplan_agent_options* opts) {
    if (opts == nullptr) return;
    const agent::AgentConfig c;
    opts->planner = c.planner == agent::PlannerKind::Gbfs ? EGOPLAN_ALGO_GBFS : EGOPLAN_ALGO_BFS;
    opts->max_nodes = c.budget.max_nodes;
    opts->max_time_ms = c.budget.max_time.count();
    opts->pre_explore = c.pre_explore_budget;
    opts->seed = c.seed;
    opts->fault_recovery = c.fault_recovery ? 1 : 0;
    opts->prioritize_frontier = c.prioritize_frontier ? 1 : 0;
    opts->explore_empty_hands = c.explore_empty_hands ? 1 : 0;
    opts->fault_rate = 0.0;
    opts->fault_shots = 0;
    opts->fault_seed = 0;
}

egoplan_status egoplan_run_episode(const egoplan_scenario* sc, const egoplan_agent_options* opts, char** agent_trace,
                                   char** env_trace) {
    return guarded([&] {
        need(sc, "scenario");
        require_task(sc->task);
        egoplan_agent_options o;
        egoplan_agent_options_default(&o);
        if (opts != nullptr) o = *opts;
        const auto cfg = agent_config(o);
        env::Environment e(sc->task, fault_config(o.fault_rate, o.fault_shots, o.fault_seed));
        const auto r = agent::run_episode(e, cfg);
        // Both outputs are produced before anything is handed out.
        std::string a = agent::episode_trace_jsonl(r);
        std::string t = env_trace_text(r.env_trace);
        char* ap = agent_trace != nullptr ? dup(a) : nullptr;
        if (env_trace != nullptr) {
            try {
                *env_trace = dup(t);
            } catch (...) {
                std::free(ap);
                throw;
            }
        }
        if (agent_trace != nullptr) *agent_trace = ap;
        if (!r.success) {
            g_last_error = r.reason;
            return EGOPLAN_EPISODE_FAILED;
        }
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_dump_problem(const egoplan_scenario* sc, const egoplan_agent_options* opts, size_t iteration,
                                    egoplan_phase phase, int domain, char** out) {
    return guarded([&] {
        need(sc, "scenario");
        need(out, "out");
        require_task(sc->task);
        if (phase != EGOPLAN_PHASE_SOLVE && phase != EGOPLAN_PHASE_EXPLORE) fail(EGOPLAN_ERR_ARGUMENT, "unknown phase");
        egoplan_agent_options o;
        egoplan_agent_options_default(&o);
        if (opts != nullptr) o = *opts;
        const auto cfg = agent_config(o);
        const auto want = phase == EGOPLAN_PHASE_SOLVE ? agent::Phase::Solve : agent::Phase::Explore;
        std::optional<std::string> text;
        env::Environment e(sc->task, fault_config(o.fault_rate, o.fault_shots, o.fault_seed));
        agent::run_episode(e, cfg, [&](std::size_t it, agent::Phase ph, const pddl::Domain& d, const pddl::Problem& p) {
            if (it == iteration && ph == want && !text) text = domain != 0 ? pddl::print_domain(d) : pddl::print_problem(p);
        });
        if (!text) {
            fail(EGOPLAN_ERR_NOT_FOUND, "the episode built no " + agent::to_string(want) + " problem at iteration " +
                                            std::to_string(iteration));
        }
        put(out, *text);
        return EGOPLAN_OK;
    });
}

egoplan_status egoplan_bench(const char* config_json, const char* out_dir, int threads, char** table, char** csv) {
    return guarded([&] {
        need(config_json, "config_json");
        auto cfg = parsing([&] { return bench::parse_suite_config(config_json); });
        if (threads > 0) cfg.threads = threads;
        const auto res = bench::run_suite(cfg);
        if (out_dir != nullptr) {
            try {
                bench::write_suite(res, out_dir);
            } catch (const std::filesystem::filesystem_error& e) {
                fail(EGOPLAN_ERR_IO, e.what());
            }
        }
        std::string t = bench::metrics_table(res.rows);
        std::string c = bench::metrics_csv(res.rows);
        char* tp = table != nullptr ? dup(t) : nullptr;
        if (csv != nullptr) {
            try {
                *csv = dup(c);
            } catch (...) {
                std::free(tp);
                throw;
            }
        }
        if (table != nullptr) *table = tp;
        return EGOPLAN_OK;
    });
}

}  // extern "C"
