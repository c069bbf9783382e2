#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>

#include "egoplan/agent/agent.hpp"
#include "egoplan/agent/domain.hpp"
#include "egoplan/env/generator.hpp"
#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/printer.hpp"
#include "egoplan/pddl/strips.hpp"
#include "test_util.hpp"

using namespace egoplan;
using namespace egoplan::agent;
using pddl::atom;

namespace {

const char* kCorridor = R"(egoplan-scenario v1
seed 1
grid 3 1
start 0 0 1
subtype PotatoType object
subtype TableType receptacle
subtype FridgeType receptacle openable
subtype MicrowaveType receptacle openable
affordance canContain TableType PotatoType
affordance canContain FridgeType PotatoType
affordance canHeat MicrowaveType PotatoType
entity potato1 PotatoType 0 0
entity fridge1 FridgeType 0 0
entity potato2 PotatoType in fridge1
entity microwave1 MicrowaveType 1 0
entity table1 TableType 2 0
goal pick_heat_then_place_in_recep Potato Table
)";

// Everything at the start cell: no exploration needed.
const char* kAllHere = R"(egoplan-scenario v1
seed 2
grid 2 2
start 0 0 0
subtype PotatoType object
subtype TableType receptacle
subtype MicrowaveType receptacle openable
affordance canContain TableType PotatoType
affordance canHeat MicrowaveType PotatoType
entity potato1 PotatoType 0 0
entity microwave1 MicrowaveType 0 0
entity table1 TableType 0 0
goal pick_heat_then_place_in_recep Potato Table
)";

// Goal objects three cells away along a corridor, out of sight.
const char* kFar = R"(egoplan-scenario v1
seed 3
grid 5 1
start 0 0 3
subtype AppleType object
subtype SideTableType receptacle
affordance canContain SideTableType AppleType
entity apple1 AppleType 3 0
entity sidetable1 SideTableType 4 0
goal pick_and_place_simple Apple SideTable
)";

std::vector<std::string> explore_unknowns(const pddl::Problem& p) {
    std::vector<std::string> out;
    for (const auto& a : p.init) {
        if (a.predicate == pddl::kUnknownPredicate) out.push_back(a.args.at(0));
    }
    return out;
}

bool contains(const std::vector<std::string>& v, const std::string& s) {
    return std::find(v.begin(), v.end(), s) != v.end();
}

}  // namespace

TEST_CASE("initial mental state from the corridor perception") {
    auto task = env::parse_scenario(kCorridor);
    env::Environment e(task);
    auto p = e.reset();
    MentalState ms = init_mental_state(p, task.task, task.scenario.kb);

    CHECK(ms.objects.at("agent0") == "agent");
    CHECK(ms.objects.at("MoveAhead") == "movement");
    CHECK(ms.objects.at("PotatoType") == "itemtype");
    CHECK(ms.agent_location() == "f0_0_1f");
    CHECK(ms.init.contains(atom("objectType", {"potato1", "PotatoType"})));
    CHECK(ms.init.contains(atom("objectAtLocation", {"potato1", "f0_0_0f"})));
    CHECK(ms.init.contains(atom("receptacleAtLocation", {"microwave1", "f1_0_0f"})));
    CHECK(ms.init.contains(atom("canHeat", {"MicrowaveType", "PotatoType"})));
    CHECK(ms.init.contains(atom("conn", {"f0_0_1f", "f1_0_1f", "MoveAhead"})));
    CHECK_FALSE(ms.objects.contains("potato2"));  // closed fridge
    CHECK_FALSE(ms.objects.contains("table1"));   // two cells ahead
    CHECK_FALSE(ms.init.contains(atom("holdsAny")));

    // C: the four poses of the start cell.
    CHECK(ms.anchors == std::set<std::string>{"f0_0_0f", "f0_0_1f", "f0_0_2f", "f0_0_3f"});
    auto frontier = ms.frontier({});
    CHECK(contains(frontier, "f1_0_0f"));
    CHECK(contains(frontier, "f1_0_3f"));
    CHECK_FALSE(contains(frontier, "f2_0_0f"));
    CHECK(ms.goal == env::build_goal(task.task).pddl_goal());
}

TEST_CASE("a 1x1 room leaves nothing to explore and the episode fails cleanly") {
    auto task = env::parse_scenario(R"(egoplan-scenario v1
grid 1 1
start 0 0 0
subtype PotatoType object
subtype TableType receptacle
affordance canContain TableType PotatoType
goal pick_and_place_simple Potato Table
)");
    env::Environment e(task);
    MentalState ms = init_mental_state(e.reset(), task.task, task.scenario.kb);
    CHECK(ms.frontier({}).empty());
    CHECK(explore_unknowns(build_explore_problem(ms, {})).empty());

    env::Environment e2(task);
    auto r = run_episode(e2);
    CHECK_FALSE(r.success);
    CHECK(r.reason == "no reachable unexplored location");
    CHECK(r.steps == 0);
}

TEST_CASE("update applies the planner action, absorbs the perception and counts failures") {
    auto task = env::parse_scenario(kCorridor);
    env::Environment e(task);
    const auto& kb = task.scenario.kb;
    MentalState ms = init_mental_state(e.reset(), task.task, kb);

    pddl::GroundAction move;
    move.schema = "MoveAgent";
    move.args = {"agent0", "f0_0_1f", "f1_0_1f", "MoveAhead"};
    move.del = {atom("atLocation", {"agent0", "f0_0_1f"})};
    move.add = {atom("atLocation", {"agent0", "f1_0_1f"})};
    auto [p, cost] = e.step(env::EnvAction{env::ActionKind::MoveAhead, {}});
    update_mental_state(ms, &move, p, cost, kb);
    CHECK(ms.agent_location() == "f1_0_1f");
    CHECK(ms.steps == 1);
    CHECK(ms.anchors.contains("f1_0_2f"));
    CHECK(ms.objects.contains("table1"));
    CHECK(ms.graph.nodes().at("f1_0_1f").visited);

    // A failed step changes nothing but the counters.
    const auto before = ms.init;
    auto [q, c2] = e.step(env::EnvAction{env::ActionKind::Pickup, "table1"});
    REQUIRE(q.failed);
    update_mental_state(ms, nullptr, q, c2, kb);
    CHECK(ms.failures == 1);
    CHECK(ms.steps == 2);
    CHECK(ms.init == before);
}

TEST_CASE("solve problem strips bookkeeping atoms and prints deterministically") {
    auto task = env::parse_scenario(kCorridor);
    env::Environment e(task);
    MentalState ms = init_mental_state(e.reset(), task.task, task.scenario.kb);
    ms.init.insert(atom("unknown", {"f1_0_0f"}));
    ms.init.insert(atom("explore"));
    auto prob = build_solve_problem(ms);
    for (const auto& a : prob.init) {
        CHECK(a.predicate != "unknown");
        CHECK(a.predicate != "explore");
    }
    CHECK(pddl::print_problem(prob) == pddl::print_problem(build_solve_problem(ms)));
    CHECK(prob.goal == ms.goal);
}

TEST_CASE("explore problem marks exactly the frontier and asks for empty hands") {
    auto task = env::parse_scenario(kCorridor);
    env::Environment e(task);
    MentalState ms = init_mental_state(e.reset(), task.task, task.scenario.kb);
    AgentConfig cfg;
    auto prob = build_explore_problem(ms, cfg);
    auto unknown = explore_unknowns(prob);
    CHECK(unknown == ms.frontier(cfg));
    for (const auto& [name, type] : ms.objects) {
        if (type == "location") CHECK(contains(unknown, name) == !ms.anchors.contains(name));
    }
    CHECK(pddl::print_literal(prob.goal.conjunction.at(0)) == "(explore)");
    CHECK(pddl::print_literal(prob.goal.conjunction.at(1)) == "(not (holdsAny))");
    cfg.explore_empty_hands = false;
    CHECK(build_explore_problem(ms, cfg).goal.conjunction.size() == 1);
}

TEST_CASE("explore domain gates every action and adds the exploration copy") {
    const auto& dom = runtime_domain();
    auto ex = build_explore_domain(dom, {});
    REQUIRE(ex.actions.size() == dom.actions.size() + 1);
    for (std::size_t i = 0; i < dom.actions.size(); ++i) {
        const auto& pre = ex.actions[i].pre;
        CHECK(std::find(pre.begin(), pre.end(), pddl::neg("explore")) != pre.end());
    }
    CHECK(ex.actions.back() == pddl::make_explore_action(*dom.find_action("MoveAgent"), "?loc0"));
}

TEST_CASE("agent config validation") {
    const auto& dom = runtime_domain();
    AgentConfig ok;
    CHECK_NOTHROW(ok.validate(dom));
    AgentConfig bad_action;
    bad_action.exploration_actions = {{"Teleport", "?loc0"}};
    CHECK_THROWS_AS(bad_action.validate(dom), std::invalid_argument);
    AgentConfig bad_anchor;
    bad_anchor.exploration_actions = {{"MoveAgent", "?agent0"}};
    CHECK_THROWS_AS(bad_anchor.validate(dom), std::invalid_argument);
    AgentConfig bad_type;
    bad_type.anchor_types = {"planet"};
    CHECK_THROWS_AS(bad_type.validate(dom), std::invalid_argument);
    CHECK(parse_planner("bfs") == PlannerKind::Bfs);
    CHECK_THROWS_AS(parse_planner("astar"), std::invalid_argument);
}

TEST_CASE("planner actions translate to env actions") {
    auto ga = [](std::string schema, std::vector<std::string> args) {
        pddl::GroundAction a;
        a.schema = std::move(schema);
        a.args = std::move(args);
        return a;
    };
    using env::ActionKind;
    using V = std::vector<env::EnvAction>;
    CHECK(plan_action_to_env(ga("MoveAgent", {"agent0", "a", "b", "RotateLeft"})) == V{{ActionKind::RotateLeft, {}}});
    CHECK(plan_action_to_env(ga("explore_MoveAgent", {"agent0", "a", "b", "MoveAhead"})) ==
          V{{ActionKind::MoveAhead, {}}});
    CHECK(plan_action_to_env(ga("pickupObject", {"agent0", "l", "apple1"})) == V{{ActionKind::Pickup, "apple1"}});
    CHECK(plan_action_to_env(ga("pickupObjectFrom", {"agent0", "l", "apple1", "t1"})) ==
          V{{ActionKind::Pickup, "apple1"}});
    CHECK(plan_action_to_env(ga("putonReceptacle", {"agent0", "l", "apple1", "AppleType", "t1", "TableType"})) ==
          V{{ActionKind::Put, "t1"}});
    CHECK(plan_action_to_env(ga("putinReceptacle", {"agent0", "l", "apple1", "AppleType", "f1", "FridgeType"})) ==
          V{{ActionKind::Put, "f1"}});
    CHECK(plan_action_to_env(ga("heatObject", {"agent0", "l", "apple1", "AppleType", "m1", "MicrowaveType"})) ==
          V{{ActionKind::HeatIn, "m1"}});
    CHECK(plan_action_to_env(ga("coolObject", {"agent0", "l", "apple1", "AppleType", "f1", "FridgeType"})) ==
          V{{ActionKind::CoolIn, "f1"}});
    CHECK(plan_action_to_env(ga("cleanObject", {"agent0", "l", "apple1", "AppleType", "s1", "SinkType"})) ==
          V{{ActionKind::CleanIn, "s1"}});
    CHECK(plan_action_to_env(ga("toggleOn", {"agent0", "l", "lamp1"})) == V{{ActionKind::ToggleOn, "lamp1"}});
    CHECK(plan_action_to_env(ga("sliceObject", {"agent0", "l", "apple1", "knife1"})) ==
          V{{ActionKind::Slice, "apple1"}});
    CHECK(plan_action_to_env(ga("pickupReceptacleFrom", {"agent0", "l", "mug1", "t1"})) ==
          V{{ActionKind::Pickup, "mug1"}});
    CHECK(plan_action_to_env(ga("putReceptacleOn", {"agent0", "l", "mug1", "MugType", "t1", "TableType"})) ==
          V{{ActionKind::Put, "t1"}});
    auto achiever = ga(std::string(pddl::kAchieverSchema), {"apple1"});
    achiever.synthetic = true;
    CHECK(plan_action_to_env(achiever).empty());
    CHECK_THROWS_AS(plan_action_to_env(ga("dance", {})), std::invalid_argument);
}

TEST_CASE("pre-exploration only moves and is seed-deterministic") {
    auto task = env::parse_scenario(kCorridor);
    auto run = [&](std::uint64_t seed) {
        env::Environment e(task);
        MentalState ms = init_mental_state(e.reset(), task.task, task.scenario.kb);
        pre_explore(e, ms, 25, seed);
        for (const auto& r : e.trace()) CHECK(env::EnvAction::parse(r.action).is_movement());
        CHECK(e.failures() == 0);
        return std::make_pair(e.trace().size(), ms);
    };
    auto [n1, a] = run(5);
    auto [n2, b] = run(5);
    CHECK(n1 == 25);
    CHECK(n2 == 25);
    CHECK(a == b);
}

TEST_CASE("visible goal: one solve plan and no exploration") {
    auto task = env::parse_scenario(kAllHere);
    env::Environment e(task);
    auto r = run_episode(e);
    CHECK(r.success);
    REQUIRE(r.iterations.size() == 1);
    CHECK(r.iterations[0].phase == Phase::Solve);
    CHECK(r.failures == 0);
}

TEST_CASE("goal already satisfied in belief needs no plan") {
    auto task = env::parse_scenario(kAllHere);
    env::Environment e(task);
    MentalState ms = init_mental_state(e.reset(), task.task, task.scenario.kb);
    ms.init.insert(atom("isHeated", {"potato1"}));
    ms.init.insert(atom("inReceptacle", {"potato1", "table1"}));
    auto grounded = pddl::ground(runtime_domain(), build_solve_problem(ms));
    auto res = planner::solve_gbfs(grounded);
    REQUIRE(res.found());
    CHECK(res.plan->length() == 0);
}

TEST_CASE("distant goal: exploration first, then a plan that replays in a fresh env") {
    auto task = env::parse_scenario(kFar);
    env::Environment e(task);
    auto r = run_episode(e);
    REQUIRE(r.success);
    std::size_t explores = 0;
    for (const auto& it : r.iterations) {
        if (it.phase != Phase::Explore) continue;
        ++explores;
        CHECK(it.explore_actions == 1);
        CHECK(it.explore_last);
    }
    CHECK(explores >= 1);
    CHECK(r.iterations.back().phase == Phase::Solve);

    env::Environment fresh(task);
    fresh.reset();
    for (const auto& a : r.actions) fresh.step(env::EnvAction::parse(a));
    CHECK(fresh.goal_check().success);
}

TEST_CASE("one injected fault is recovered with replanning, and ends the episode without it") {
    auto task = env::parse_scenario(kCorridor);
    env::FaultConfig faults{1.0, 1, 7};
    {
        env::Environment e(task, faults);
        auto r = run_episode(e);
        CHECK(r.success);
        CHECK(r.failures == 1);
        CHECK(e.injected_faults() == 1);
    }
    {
        env::Environment e(task, faults);
        AgentConfig cfg;
        cfg.fault_recovery = false;
        auto r = run_episode(e, cfg);
        CHECK_FALSE(r.success);
        CHECK(r.reason == "action failed and recovery is disabled");
        CHECK(r.failures == 1);
    }
}

TEST_CASE("episodes are deterministic") {
    env::GeneratorConfig g;
    g.width = g.height = 6;
    auto task = env::generate_scenario(11, env::TaskSpec{"pick_two_obj_and_place", {}}, g);
    env::Environment e1(task, {0.3, 2, 9});
    env::Environment e2(task, {0.3, 2, 9});
    auto r1 = run_episode(e1);
    auto r2 = run_episode(e2);
    CHECK(r1.actions == r2.actions);
    CHECK(episode_trace_jsonl(r1) == episode_trace_jsonl(r2));
}

TEST_CASE("belief agrees with the hidden state on perceived entity locations") {
    env::GeneratorConfig g;
    g.width = g.height = 6;
    for (const auto& fam : env::families()) {
        auto task = env::generate_scenario(4, env::TaskSpec{fam.name, {}}, g);
        env::Environment e(task);
        std::size_t checks = 0;
        auto observer = [&](std::size_t, Phase ph, const pddl::Domain&, const pddl::Problem& p) {
            if (ph != Phase::Solve) return;
            const auto truth = e.full_problem().init;
            std::set<std::string> known;
            for (const auto& o : p.objects) known.insert(o.name);
            for (const auto& a : p.init) {
                if (a.predicate == "objectAtLocation" || a.predicate == "receptacleAtLocation" ||
                    a.predicate == "atLocation") {
                    CHECK_MESSAGE(truth.contains(a), fam.name << ": " << a.to_string());
                    ++checks;
                }
            }
            for (const auto& a : truth) {
                if ((a.predicate == "objectAtLocation" || a.predicate == "receptacleAtLocation") &&
                    known.contains(a.args[0])) {
                    CHECK_MESSAGE(p.init.contains(a), fam.name << ": missing " << a.to_string());
                }
            }
        };
        auto r = run_episode(e, {}, observer);
        CHECK_MESSAGE(r.success, fam.name);
        CHECK(checks > 0);
    }
}

TEST_CASE("spatial graph grows monotonically and visited nodes were agent locations") {
    auto task = env::parse_scenario(kFar);
    env::Environment e(task);
    const auto& kb = task.scenario.kb;
    MentalState ms = init_mental_state(e.reset(), task.task, kb);
    std::set<std::string> locations{ms.agent_location()};
    auto prev = ms.graph;
    for (const char* a : {"RotateLeft", "RotateLeft", "MoveAhead", "MoveAhead", "RotateRight"}) {
        auto [p, c] = e.step(env::EnvAction::parse(a));
        update_mental_state(ms, nullptr, p, c, kb);
        locations.insert(ms.agent_location());
        for (const auto& [k, to] : prev.edges()) CHECK(ms.graph.edges().at(k) == to);
        for (const auto& [n, node] : prev.nodes()) CHECK(ms.graph.nodes().contains(n));
        prev = ms.graph;
    }
    for (const auto& [n, node] : ms.graph.nodes()) {
        if (node.visited) CHECK(locations.contains(n));
    }
    for (const auto& [k, to] : ms.graph.edges()) {
        CHECK((k.second == "MoveAhead" || k.second == "RotateLeft" || k.second == "RotateRight"));
    }
}

TEST_CASE("agent sources name no task family and no subtype") {
    namespace fs = std::filesystem;
    const fs::path root(EGOPLAN_SOURCE_DIR);
    std::vector<std::string> banned;
    for (const auto& f : env::families()) banned.push_back(f.name);
    for (const auto& s : env::default_knowledge().subtypes()) banned.push_back(s->name);
    std::size_t scanned = 0;
    for (const fs::path dir : {root / "src" / "agent", root / "include" / "egoplan" / "agent"}) {
        for (const auto& entry : fs::directory_iterator(dir)) {
            const std::string text = testutil::read_file(entry.path().string());
            ++scanned;
            for (const auto& b : banned) CHECK_MESSAGE(text.find(b) == std::string::npos, entry.path() << ": " << b);
        }
    }
    CHECK(scanned >= 4);
}
