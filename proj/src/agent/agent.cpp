#include "egoplan/agent/agent.hpp"

#include <algorithm>
#include <deque>
#include <json.hpp>
#include <stdexcept>

#include "egoplan/agent/domain.hpp"
#include "egoplan/env/generator.hpp"
#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/strips.hpp"

namespace egoplan::agent {

using pddl::atom;
using pddl::GroundAtom;

std::string to_string(PlannerKind k) { return k == PlannerKind::Gbfs ? "gbfs" : "bfs"; }

PlannerKind parse_planner(std::string_view s) {
    if (s == "gbfs") return PlannerKind::Gbfs;
    if (s == "bfs") return PlannerKind::Bfs;
    throw std::invalid_argument("unknown planner '" + std::string(s) + "' (expected gbfs or bfs)");
}

std::string to_string(Phase p) { return p == Phase::Solve ? "solve" : "explore"; }

void AgentConfig::validate(const pddl::Domain& dom) const {
    for (const auto& t : anchor_types) {
        if (!dom.has_type(t)) throw std::invalid_argument("anchor type '" + t + "' is not in the domain");
    }
    for (const auto& x : exploration_actions) {
        const auto* a = dom.find_action(x.action);
        if (!a) throw std::invalid_argument("exploration action '" + x.action + "' is not in the domain");
        const auto* p = a->find_param(x.anchor);
        if (!p) throw std::invalid_argument(x.action + " has no parameter " + x.anchor);
        if (std::find(anchor_types.begin(), anchor_types.end(), p->type) == anchor_types.end()) {
            throw std::invalid_argument(x.action + " " + x.anchor + " is not of an anchor type");
        }
    }
    if (pre_explore_budget < 0 || step_limit <= 0 || failure_limit <= 0) {
        throw std::invalid_argument("agent limits must be positive");
    }
}

void SpatialGraph::add_edge(const std::string& from, const std::string& label, const std::string& to) {
    nodes_[from];
    nodes_[to];
    edges_[{from, label}] = to;
}

std::size_t SpatialGraph::visited_count() const {
    return static_cast<std::size_t>(
        std::count_if(nodes_.begin(), nodes_.end(), [](const auto& kv) { return kv.second.visited; }));
}

std::map<std::string, std::pair<std::string, std::string>> SpatialGraph::shortest_paths(const std::string& from) const {
    std::map<std::string, std::pair<std::string, std::string>> pred;
    std::set<std::string> seen{from};
    std::deque<std::string> q{from};
    while (!q.empty()) {
        std::string cur = q.front();
        q.pop_front();
        for (auto it = edges_.lower_bound({cur, ""}); it != edges_.end() && it->first.first == cur; ++it) {
            if (seen.insert(it->second).second) {
                pred[it->second] = {cur, it->first.second};
                q.push_back(it->second);
            }
        }
    }
    return pred;
}

std::vector<pddl::ObjectConst> MentalState::object_list() const {
    std::vector<pddl::ObjectConst> out;
    out.reserve(objects.size());
    for (const auto& [n, t] : objects) out.push_back({n, t});
    return out;
}

std::string MentalState::agent_location() const {
    auto it = init.atoms().lower_bound(atom("atLocation"));
    if (it != init.atoms().end() && it->predicate == "atLocation" && it->args.size() == 2) return it->args[1];
    return {};
}

std::vector<std::string> MentalState::frontier(const AgentConfig& cfg) const {
    std::vector<std::string> out;
    for (const auto& [n, t] : objects) {
        if (std::find(cfg.anchor_types.begin(), cfg.anchor_types.end(), t) != cfg.anchor_types.end() &&
            !anchors.contains(n)) {
            out.push_back(n);
        }
    }
    return out;
}

namespace {

void erase_entity_atoms(pddl::State& s, const std::string& id) {
    std::vector<GroundAtom> doomed;
    for (const auto& pred : env::entity_predicates()) {
        for (auto it = s.atoms().lower_bound(atom(pred, {id})); it != s.atoms().end() && it->predicate == pred;
             ++it) {
            if (it->args.empty() || it->args[0] != id) break;
            doomed.push_back(*it);
        }
    }
    for (const auto& d : doomed) s.erase(d);
}

void erase_predicate(pddl::State& s, const std::string& pred) {
    std::vector<GroundAtom> doomed;
    for (auto it = s.atoms().lower_bound(atom(pred)); it != s.atoms().end() && it->predicate == pred; ++it) {
        doomed.push_back(*it);
    }
    for (const auto& d : doomed) s.erase(d);
}

/// Merges a successful perception into the mental state.
void absorb(MentalState& ms, const env::Perception& p, const env::Knowledge& kb, const AgentConfig& cfg) {
    auto add_location = [&](const std::string& loc) {
        ms.objects.emplace(loc, cfg.anchor_types.front());
        ms.graph.add_node(loc);
    };
    add_location(p.agent_location);
    for (const auto& e : p.edges) {
        add_location(e.from);
        add_location(e.to);
        ms.objects.emplace(e.label, "movement");
        ms.init.insert(atom("conn", {e.from, e.to, e.label}));
        ms.graph.add_edge(e.from, e.label, e.to);
    }
    erase_predicate(ms.init, "atLocation");
    ms.init.insert(atom("atLocation", {"agent0", p.agent_location}));
    ms.graph.visit(p.agent_location);
    // Observed: the agent's location and whatever turning in place reaches from it.
    std::deque<std::string> q{p.agent_location};
    ms.anchors.insert(p.agent_location);
    while (!q.empty()) {
        const std::string cur = q.front();
        q.pop_front();
        for (const auto& e : p.edges) {
            if (e.from == cur && e.label != env::kMoveAhead && ms.anchors.insert(e.to).second) q.push_back(e.to);
        }
    }
    for (const auto& e : p.entities) {
        ms.objects[e.id] = e.kind == env::EntityKind::Object ? "obj" : "receptacle";
        ms.subtypes[e.id] = e.subtype;
        if (!e.location.empty()) {
            add_location(e.location);
            ms.graph.saw(e.location, e.id);
        }
        erase_entity_atoms(ms.init, e.id);
        for (auto& a : env::entity_atoms(e, kb)) ms.init.insert(std::move(a));
    }
    if (p.held.empty()) {
        ms.init.erase(atom("holdsAny"));
    } else {
        ms.init.insert(atom("holdsAny"));
    }
}

bool bookkeeping_atom(const GroundAtom& a) {
    return a.predicate == pddl::kUnknownPredicate || a.predicate == pddl::kExplorePredicate;
}

}  // namespace

MentalState init_mental_state(const env::Perception& p, const env::TaskSpec& task, const env::Knowledge& kb) {
    MentalState ms;
    ms.objects["agent0"] = "agent";
    for (const char* m : {env::kMoveAhead, env::kRotateLeft, env::kRotateRight}) {
        ms.objects[m] = "movement";
        ms.init.insert(atom("move", {m}));
    }
    for (const auto& o : kb.itemtype_objects()) ms.objects[o.name] = o.type;
    for (auto& a : kb.static_atoms()) ms.init.insert(std::move(a));
    absorb(ms, p, kb, AgentConfig{});
    ms.goal = env::build_goal(task).pddl_goal();
    return ms;
}

void update_mental_state(MentalState& ms, const pddl::GroundAction* a, const env::Perception& p, double,
                         const env::Knowledge& kb, const AgentConfig& cfg) {
    ++ms.steps;
    if (p.failed) {
        ++ms.failures;
        return;
    }
    if (a && !a->synthetic) {
        for (const auto& d : a->del) ms.init.erase(d);
        for (const auto& ad : a->add) ms.init.insert(ad);
        std::vector<GroundAtom> doomed;
        for (const auto& at : ms.init) {
            if (bookkeeping_atom(at)) doomed.push_back(at);
        }
        for (const auto& d : doomed) ms.init.erase(d);
    }
    absorb(ms, p, kb, cfg);
    if (a && a->schema.starts_with(pddl::kExplorePrefix)) {
        const std::string base = a->schema.substr(pddl::kExplorePrefix.size());
        const auto& dom = runtime_domain();
        for (const auto& x : cfg.exploration_actions) {
            if (x.action != base) continue;
            const auto* schema = dom.find_action(base);
            for (std::size_t i = 0; schema && i < schema->params.size(); ++i) {
                if (schema->params[i].name == x.anchor) ms.anchors.insert(a->args.at(i));
            }
        }
    }
}

pddl::Problem build_solve_problem(const MentalState& ms) {
    pddl::Problem prob;
    prob.name = "solve";
    prob.domain_name = runtime_domain().name;
    prob.objects = ms.object_list();
    std::set<GroundAtom> init;
    for (const auto& a : ms.init) {
        if (!bookkeeping_atom(a)) init.insert(a);
    }
    prob.init = pddl::State(std::move(init));
    prob.goal = ms.goal;
    return prob;
}

pddl::Domain build_explore_domain(const pddl::Domain& dom, const AgentConfig& cfg) {
    pddl::Domain out = dom;
    for (auto& a : out.actions) a = pddl::extend_precondition(a, {pddl::neg(std::string(pddl::kExplorePredicate))});
    for (const auto& x : cfg.exploration_actions) {
        const auto* a = dom.find_action(x.action);
        if (!a) throw std::invalid_argument("exploration action '" + x.action + "' is not in the domain");
        out.actions.push_back(pddl::make_explore_action(*a, x.anchor));
    }
    return out;
}

pddl::Problem build_explore_problem(const MentalState& ms, const AgentConfig& cfg) {
    pddl::Problem prob = build_solve_problem(ms);
    prob.name = "explore";
    std::set<GroundAtom> init = prob.init.atoms();
    for (const auto& o : ms.frontier(cfg)) init.insert(atom(std::string(pddl::kUnknownPredicate), {o}));
    prob.init = pddl::State(std::move(init));
    prob.goal = pddl::Goal{};
    prob.goal.conjunction.push_back(pddl::pos(std::string(pddl::kExplorePredicate)));
    if (cfg.explore_empty_hands) prob.goal.conjunction.push_back(pddl::neg("holdsAny"));
    return prob;
}

std::vector<env::EnvAction> plan_action_to_env(const pddl::GroundAction& a) {
    using env::ActionKind;
    if (a.synthetic || a.schema == pddl::kAchieverSchema) return {};
    std::string schema = a.schema;
    if (schema.starts_with(pddl::kExplorePrefix)) schema = schema.substr(pddl::kExplorePrefix.size());
    // schema -> (env action, argument index)
    static const std::map<std::string, std::pair<ActionKind, std::size_t>> table{
        {"pickupObject", {ActionKind::Pickup, 2}},      {"pickupObjectFrom", {ActionKind::Pickup, 2}},
        {"pickupReceptacle", {ActionKind::Pickup, 2}},  {"pickupReceptacleFrom", {ActionKind::Pickup, 2}},
        {"putonReceptacle", {ActionKind::Put, 4}},      {"putinReceptacle", {ActionKind::Put, 4}},
        {"putReceptacleOn", {ActionKind::Put, 4}},      {"heatObject", {ActionKind::HeatIn, 4}},
        {"coolObject", {ActionKind::CoolIn, 4}},        {"cleanObject", {ActionKind::CleanIn, 4}},
        {"sliceObject", {ActionKind::Slice, 2}},        {"toggleOn", {ActionKind::ToggleOn, 2}},
    };
    if (schema == "MoveAgent") return {env::EnvAction::parse(a.args.at(3))};
    auto it = table.find(schema);
    if (it == table.end()) throw std::invalid_argument("no env action for schema '" + a.schema + "'");
    return {env::EnvAction{it->second.first, a.args.at(it->second.second)}};
}

void pre_explore(env::Environment& env, MentalState& ms, int budget, std::uint64_t seed, const AgentConfig& cfg) {
    env::Rng rng(seed);
    const auto& kb = env.task().scenario.kb;
    for (int i = 0; i < budget && !env.hard_failed(); ++i) {
        const std::string here = ms.agent_location();
        std::vector<std::pair<std::string, std::string>> options;  // label, target
        for (auto it = ms.graph.edges().lower_bound({here, ""}); it != ms.graph.edges().end() && it->first.first == here;
             ++it) {
            options.emplace_back(it->first.second, it->second);
        }
        if (options.empty()) return;
        const auto& [label, to] = rng.pick(options);
        pddl::GroundAction move;
        move.schema = "MoveAgent";
        move.args = {"agent0", here, to, label};
        move.del = {atom("atLocation", {"agent0", here})};
        move.add = {atom("atLocation", {"agent0", to})};
        auto [p, cost] = env.step(env::EnvAction::parse(label));
        update_mental_state(ms, &move, p, cost, kb, cfg);
    }
}

namespace {

planner::SearchResult solve(const pddl::GroundedTask& task, const AgentConfig& cfg) {
    return cfg.planner == PlannerKind::Gbfs ? planner::solve_gbfs(task, cfg.budget) : planner::solve_bfs(task, cfg.budget);
}

std::vector<std::string> goal_subtypes(const pddl::Goal& g, const MentalState& ms) {
    std::vector<std::string> out;
    for (const auto& l : g.conjunction) {
        for (const auto& a : l.args) {
            auto it = ms.objects.find(a);
            if (!pddl::is_variable(a) && it != ms.objects.end() && it->second == "itemtype") out.push_back(a);
        }
    }
    return out;
}

/// Among the nearest frontier locations, the one whose visited neighbours
/// have shown the most goal-relevant subtypes; ties by name. Returns the
/// replacement plan, or nullopt to keep the planner's.
std::optional<planner::Plan> prioritized_plan(const MentalState& ms, const AgentConfig& cfg,
                                              const pddl::GroundedTask& task, const planner::Plan& plan) {
    if (!cfg.prioritize_frontier || cfg.exploration_actions.size() != 1) return std::nullopt;
    const std::string base = cfg.exploration_actions.front().action;
    for (const auto& s : plan.steps) {
        if (!s.synthetic && s.schema != base && s.schema != std::string(pddl::kExplorePrefix) + base) return std::nullopt;
    }
    if (base != "MoveAgent") return std::nullopt;
    const std::string here = ms.agent_location();
    const auto pred = ms.graph.shortest_paths(here);
    const auto frontier = ms.frontier(cfg);
    const auto wanted = goal_subtypes(ms.goal, ms);
    std::size_t best_d = std::numeric_limits<std::size_t>::max();
    std::vector<std::string> nearest;
    for (const auto& f : frontier) {
        if (!pred.contains(f)) continue;
        std::size_t d = 0;
        for (std::string cur = f; cur != here; cur = pred.at(cur).first) ++d;
        if (d < best_d) {
            best_d = d;
            nearest.clear();
        }
        if (d == best_d) nearest.push_back(f);
    }
    if (nearest.empty()) return std::nullopt;
    auto score = [&](const std::string& f) {
        std::size_t n = 0;
        for (const auto& [key, to] : ms.graph.edges()) {
            if (to != f) continue;
            const auto& node = ms.graph.nodes().at(key.first);
            if (!node.visited) continue;
            for (const auto& id : node.seen) {
                auto st = ms.subtypes.find(id);
                if (st != ms.subtypes.end() && std::find(wanted.begin(), wanted.end(), st->second) != wanted.end()) ++n;
            }
        }
        return n;
    };
    std::string pick = nearest.front();
    std::size_t best_score = score(pick);
    for (const auto& f : nearest) {
        if (std::size_t s = score(f); s > best_score) {
            best_score = s;
            pick = f;
        }
    }
    std::vector<std::pair<std::string, std::string>> hops;  // (from, label) reversed
    for (std::string cur = pick; cur != here; cur = pred.at(cur).first) hops.push_back(pred.at(cur));
    std::reverse(hops.begin(), hops.end());
    planner::Plan out;
    std::string cur = here;
    for (std::size_t i = 0; i < hops.size(); ++i) {
        const std::string to = ms.graph.edges().at({hops[i].first, hops[i].second});
        const std::string schema = i + 1 == hops.size() ? std::string(pddl::kExplorePrefix) + base : base;
        const std::vector<std::string> args{"agent0", hops[i].first, to, hops[i].second};
        bool found = false;
        for (std::size_t k = 0; k < task.actions.size(); ++k) {
            if (task.actions[k].schema == schema && task.actions[k].args == args) {
                out.steps.push_back(task.action(k));
                found = true;
                break;
            }
        }
        if (!found) return std::nullopt;
    }
    if (!planner::validate_plan(task, out).ok || out.length() > plan.length()) return std::nullopt;
    return out;
}

bool goal_satisfied(const MentalState& ms) {
    return pddl::exists_binding(ms.goal.vars, ms.goal.conjunction, ms.object_list(), ms.init);
}

}  // namespace

EpisodeResult run_episode(env::Environment& env, const AgentConfig& cfg, const ProblemObserver& observer) {
    const pddl::Domain& dom = runtime_domain();
    cfg.validate(dom);
    const pddl::Domain explore_dom = build_explore_domain(dom, cfg);
    const auto& kb = env.task().scenario.kb;
    EpisodeResult res;

    env::Perception p = env.reset();
    MentalState ms = init_mental_state(p, env.task().task, kb);
    pre_explore(env, ms, cfg.pre_explore_budget, cfg.seed, cfg);

    auto finish = [&](bool claimed, std::string reason) {
        res.goal_status = env.goal_check();
        res.success = claimed && res.goal_status.success;
        res.reason = claimed && !res.success ? "belief and environment disagree on the goal" : std::move(reason);
        res.env_trace = env.trace();
        for (const auto& r : res.env_trace) res.actions.push_back(r.action);
        res.steps = env.steps();
        res.failures = env.failures();
        res.known_locations = ms.graph.nodes().size();
        res.visited_locations = ms.graph.visited_count();
        return res;
    };

    for (std::size_t iteration = 0;; ++iteration) {
        if (env.hard_failed()) return finish(false, "environment limits reached");
        if (ms.steps >= cfg.step_limit || ms.failures >= cfg.failure_limit) return finish(false, "agent limits reached");
        if (goal_satisfied(ms)) return finish(true, "goal reached");

        IterationRecord rec;
        rec.iteration = iteration;
        const pddl::Problem solve_prob = build_solve_problem(ms);
        if (observer) observer(iteration, Phase::Solve, dom, solve_prob);
        auto solve_task = pddl::ground(dom, solve_prob);
        auto sr = solve(solve_task, cfg);
        res.planner_calls.push_back(sr.stats);
        rec.solve_outcome = sr.stats.result;

        planner::Plan plan;
        if (sr.found()) {
            rec.phase = Phase::Solve;
            plan = *sr.plan;
        } else {
            rec.phase = Phase::Explore;
            const pddl::Problem ex_prob = build_explore_problem(ms, cfg);
            if (observer) observer(iteration, Phase::Explore, explore_dom, ex_prob);
            rec.unknown = ms.frontier(cfg);
            rec.unknown_count = rec.unknown.size();
            auto ex_task = pddl::ground(explore_dom, ex_prob);
            auto er = solve(ex_task, cfg);
            res.planner_calls.push_back(er.stats);
            if (!er.found()) {
                rec.failures = ms.failures;
                res.iterations.push_back(rec);
                return finish(false, er.stats.result == planner::Outcome::BudgetExhausted
                                         ? "exploration planning ran out of budget"
                                         : "no reachable unexplored location");
            }
            plan = *er.plan;
            if (auto better = prioritized_plan(ms, cfg, ex_task, plan)) plan = std::move(*better);
            for (const auto& s : plan.steps) {
                if (s.schema.starts_with(pddl::kExplorePrefix)) ++rec.explore_actions;
            }
            for (auto it = plan.steps.rbegin(); it != plan.steps.rend(); ++it) {
                if (it->synthetic) continue;
                rec.explore_last = it->schema.starts_with(pddl::kExplorePrefix);
                break;
            }
        }
        for (const auto& s : plan.steps) {
            if (!s.synthetic) rec.plan.push_back(s.to_string());
        }

        for (const auto& step : plan.steps) {
            bool failed = false;
            for (const auto& a : plan_action_to_env(step)) {
                auto [obs, cost] = env.step(a);
                update_mental_state(ms, &step, obs, cost, kb, cfg);
                if (obs.failed) {
                    failed = true;
                    break;
                }
            }
            if (failed) {
                rec.failed = true;
                break;
            }
            if (!step.synthetic) ++rec.executed;
        }
        rec.failures = ms.failures;
        res.iterations.push_back(rec);
        if (rec.failed && !cfg.fault_recovery) return finish(false, "action failed and recovery is disabled");
    }
}

std::string episode_trace_jsonl(const EpisodeResult& r) {
    std::string out;
    for (const auto& it : r.iterations) {
        nlohmann::ordered_json j;
        j["iteration"] = it.iteration;
        j["phase"] = to_string(it.phase);
        j["solve_outcome"] = planner::to_string(it.solve_outcome);
        j["plan"] = it.plan;
        j["executed"] = it.executed;
        j["failed"] = it.failed;
        j["failures"] = it.failures;
        if (it.phase == Phase::Explore) {
            j["unknown"] = it.unknown_count;
            j["explore_actions"] = it.explore_actions;
            j["explore_last"] = it.explore_last;
        }
        out += j.dump() + "\n";
    }
    nlohmann::ordered_json s;
    s["summary"] = true;
    s["outcome"] = r.success ? "success" : "failure";
    s["reason"] = r.reason;
    s["steps"] = r.steps;
    s["failures"] = r.failures;
    s["iterations"] = r.iterations.size();
    s["planner_calls"] = r.planner_calls.size();
    s["goal_conditions"] = r.goal_status.conditions;
    s["known_locations"] = r.known_locations;
    s["visited_locations"] = r.visited_locations;
    out += s.dump() + "\n";
    return out;
}

}  // namespace egoplan::agent
