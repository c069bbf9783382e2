#include <algorithm>

#include "doctest.h"
#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/parser.hpp"
#include "egoplan/planner/search.hpp"
#include "random_tasks.hpp"
#include "test_util.hpp"

using namespace egoplan;
using namespace egoplan::pddl;
using namespace egoplan::planner;

namespace {

const char* kDomain = R"((define (domain move)
  (:requirements :typing)
  (:types agent location movement)
  (:predicates (atLocation ?a - agent ?l - location) (conn ?x - location ?y - location ?m - movement)
               (move ?m - movement))
  (:action MoveAgent
    :parameters (?agent0 - agent ?from0 - location ?loc0 - location ?mov0 - movement)
    :precondition (and (atLocation ?agent0 ?from0) (move ?mov0) (conn ?from0 ?loc0 ?mov0))
    :effect (and (not (atLocation ?agent0 ?from0)) (atLocation ?agent0 ?loc0))))
)";

Problem corridor(const Domain& d, const std::string& goal = "(and (atLocation agent0 l3))") {
    return parse_problem(std::string(R"((define (problem corridor) (:domain move)
      (:objects agent0 - agent l1 l2 l3 - location MoveAhead RotateLeft - movement)
      (:init (atLocation agent0 l1) (move MoveAhead) (move RotateLeft)
             (conn l1 l2 MoveAhead) (conn l2 l3 MoveAhead) (conn l2 l1 RotateLeft) (conn l3 l2 RotateLeft))
      (:goal )") + goal + "))",
                         d);
}

std::vector<std::string> names(const Plan& p) {
    std::vector<std::string> out;
    for (const auto& s : p.steps) out.push_back(s.to_string());
    return out;
}

}  // namespace

TEST_SUITE("planner") {
    TEST_CASE("corridor") {
        Domain d = parse_domain(kDomain);
        GroundedTask t = ground(d, corridor(d));
        for (auto solve : {solve_bfs, solve_gbfs}) {
            SearchResult r = solve(t, Budget{});
            REQUIRE(r.found());
            CHECK(r.stats.result == Outcome::PlanFound);
            CHECK(names(*r.plan) == std::vector<std::string>{"(MoveAgent agent0 l1 l2 MoveAhead)",
                                                             "(MoveAgent agent0 l2 l3 MoveAhead)"});
            CHECK(validate_plan(t, *r.plan).ok);
        }
        CHECK(h_add(t, t.initial_state()) == 2);
    }

    TEST_CASE("goal already true") {
        Domain d = parse_domain(kDomain);
        GroundedTask t = ground(d, corridor(d, "(and (atLocation agent0 l1))"));
        CHECK(solve_bfs(t).plan->steps.empty());
        CHECK(solve_gbfs(t).plan->steps.empty());
        CHECK(h_add(t, t.initial_state()) == 0);
        CHECK(validate_plan(t, Plan{}).ok);
    }

    TEST_CASE("unreachable goal") {
        Domain d = parse_domain(kDomain);
        GroundedTask t = ground(d, corridor(d, "(and (atLocation agent0 l3) (conn l1 l3 MoveAhead))"));
        CHECK(h_add(t, t.initial_state()) == kInfinity);
        CHECK(solve_bfs(t).stats.result == Outcome::Unsolvable);
        CHECK(solve_gbfs(t).stats.result == Outcome::Unsolvable);
    }

    TEST_CASE("swapped plan fails at index 0") {
        Domain d = parse_domain(kDomain);
        GroundedTask t = ground(d, corridor(d));
        Plan p = *solve_bfs(t).plan;
        std::swap(p.steps[0], p.steps[1]);
        Validation v = validate_plan(t, p);
        CHECK_FALSE(v.ok);
        REQUIRE(v.failed_index.has_value());
        CHECK(*v.failed_index == 0);
        Plan half{{solve_bfs(t).plan->steps[0]}};
        Validation short_plan = validate_plan(t, half);
        CHECK_FALSE(short_plan.ok);
        CHECK(*short_plan.failed_index == 1);
    }

    TEST_CASE("budget exhaustion") {
        Domain d = parse_domain(kDomain);
        GroundedTask t = ground(d, corridor(d));
        SearchResult r = solve_bfs(t, Budget{0, std::chrono::milliseconds(1000)});
        CHECK_FALSE(r.found());
        CHECK(r.stats.result == Outcome::BudgetExhausted);
    }

    TEST_CASE("unobserved problem without a potato is unsolvable") {
        Domain d = parse_domain(testutil::data_file("pddl/alfred_domain.pddl"));
        Problem p = parse_problem(testutil::data_file("pddl/unobserved_problem.pddl"), d);
        GroundedTask t = ground(d, p);
        CHECK(solve_bfs(t).stats.result == Outcome::Unsolvable);
        CHECK(solve_gbfs(t).stats.result == Outcome::Unsolvable);
    }

    TEST_CASE("existential goal plans end with a synthetic achiever") {
        Domain d = parse_domain(testutil::data_file("pddl/alfred_domain.pddl"));
        std::string text = testutil::data_file("pddl/unobserved_problem.pddl");
        auto put = [&](const std::string& from, const std::string& to) { text.replace(text.find(from), from.size(), to); };
        put("emptyO - obj", "emptyO potato1 - obj");
        put("emptyR - receptacle", "emptyR table1 micro1 - receptacle");
        put("(emptyObj emptyO)",
            "(emptyObj emptyO) (objectType potato1 PotatoType) (receptacleType table1 TableType) "
            "(receptacleType micro1 MicrowaveType) (objectAtLocation potato1 f0_0_0f) "
            "(receptacleAtLocation micro1 f0_0_1f) (receptacleAtLocation table1 f0_1_0f)");
        Problem p = parse_problem(text, d);
        GroundedTask t = ground(d, p);
        SearchResult bfs = solve_bfs(t), gbfs = solve_gbfs(t);
        REQUIRE(bfs.found());
        REQUIRE(gbfs.found());
        CHECK(bfs.plan->steps.back().synthetic);
        CHECK(bfs.plan->length() == bfs.plan->steps.size() - 1);
        CHECK(bfs.plan->length() <= gbfs.plan->length());
        CHECK(validate_plan(t, *bfs.plan).ok);
        Plan stripped = *bfs.plan;
        stripped.steps.pop_back();
        CHECK(validate_plan(t, stripped).ok);
        // pickup, turn, heat, turn back, move ahead, put
        CHECK(bfs.plan->length() == 6);
    }

    TEST_CASE("zero achiever bindings is unsolvable") {
        Domain d = parse_domain(testutil::data_file("pddl/alfred_domain.pddl"));
        Problem p = parse_problem(testutil::data_file("pddl/unobserved_problem.pddl"), d);
        GroundedTask t = ground(d, p);
        CHECK(t.synthetic_count() == 0);
        CHECK(solve_gbfs(t).stats.result == Outcome::Unsolvable);
    }

    TEST_CASE("oracle agreement and optimality on random tasks") {
        int solvable = 0;
        for (std::uint64_t seed = 0; seed < 150; ++seed) {
            GroundedTask t = testutil::random_task(seed);
            SearchResult b = solve_bfs(t), g = solve_gbfs(t);
            REQUIRE(b.stats.result != Outcome::BudgetExhausted);
            CHECK(b.found() == g.found());
            auto shortest = testutil::exhaustive_shortest(t);
            CHECK(shortest.has_value() == b.found());
            if (b.found()) {
                ++solvable;
                CHECK(b.plan->length() == *shortest);
                CHECK(validate_plan(t, *b.plan).ok);
                CHECK(validate_plan(t, *g.plan).ok);
                CHECK(g.plan->length() >= b.plan->length());
            } else {
                CHECK(h_add(t, t.initial_state()) >= 0);
            }
            if (h_add(t, t.initial_state()) == kInfinity) CHECK_FALSE(b.found());
        }
        CHECK(solvable > 20);
        CHECK(solvable < 150);
    }

    TEST_CASE("prune safety") {
        for (std::uint64_t seed = 0; seed < 150; ++seed) {
            GroundedTask t = testutil::random_task(seed);
            GroundedTask pruned = reachability_prune(t);
            CHECK(pruned.actions.size() <= t.actions.size());
            SearchResult before = solve_bfs(t), after = solve_bfs(pruned);
            CHECK(before.found() == after.found());
            if (before.found()) {
                CHECK(before.plan->length() == after.plan->length());
                CHECK(validate_plan(pruned, *before.plan).ok);
            }
        }
    }

    TEST_CASE("prune drops never-reachable preconditions") {
        GroundedTask t;
        t.atoms = {atom("a"), atom("b"), atom("c")};
        t.init = {0};
        t.actions = {IndexedAction{"needs_c", {}, {2}, {}, {1}, {}, false},
                     IndexedAction{"from_a", {}, {0}, {}, {1}, {}, false}};
        t.goal_pos = {1};
        GroundedTask p = reachability_prune(t);
        REQUIRE(p.actions.size() == 1);
        CHECK(p.actions[0].schema == "from_a");
    }

    TEST_CASE("prune of all bindings equals relaxed grounding") {
        Domain d = parse_domain(testutil::data_file("pddl/alfred_domain.pddl"));
        Problem p = parse_problem(testutil::data_file("pddl/unobserved_problem.pddl"), d);
        GroundedTask pruned = reachability_prune(ground(d, p, GroundingMode::AllBindings));
        GroundedTask relaxed = ground(d, p, GroundingMode::RelaxedReachable);
        std::vector<std::string> a, b;
        for (const auto& x : pruned.actions) a.push_back(x.to_string());
        for (const auto& x : relaxed.actions) b.push_back(x.to_string());
        CHECK(a == b);
    }

    TEST_CASE("determinism") {
        for (std::uint64_t seed = 200; seed < 220; ++seed) {
            GroundedTask t = testutil::random_task(seed, 12, 18);
            SearchResult a = solve_gbfs(t), b = solve_gbfs(t);
            CHECK(a.action_indices == b.action_indices);
            CHECK(a.stats.expanded == b.stats.expanded);
            CHECK(a.stats.generated == b.stats.generated);
        }
    }
}
