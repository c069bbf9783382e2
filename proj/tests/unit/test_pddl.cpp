#include <algorithm>
#include <random>

#include "doctest.h"
#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/parser.hpp"
#include "egoplan/pddl/printer.hpp"
#include "egoplan/pddl/strips.hpp"
#include "test_util.hpp"

using namespace egoplan::pddl;

namespace {

Domain reference_domain() { return parse_domain(testutil::data_file("pddl/alfred_domain.pddl")); }

Problem unobserved_problem(const Domain& d) { return parse_problem(testutil::data_file("pddl/unobserved_problem.pddl"), d); }

std::string replace_once(std::string s, const std::string& from, const std::string& to) {
    auto at = s.find(from);
    REQUIRE(at != std::string::npos);
    return s.replace(at, from.size(), to);
}

const char* kMoveDomain = R"((define (domain move)
  (:requirements :typing)
  (:types agent location movement)
  (:predicates (atLocation ?a - agent ?l - location) (conn ?x - location ?y - location ?m - movement)
               (move ?m - movement) (unknown ?l - location) (explore))
  (:action MoveAgent
    :parameters (?agent0 - agent ?from0 - location ?loc0 - location ?mov0 - movement)
    :precondition (and (atLocation ?agent0 ?from0) (move ?mov0) (conn ?from0 ?loc0 ?mov0))
    :effect (and (not (atLocation ?agent0 ?from0)) (atLocation ?agent0 ?loc0)))
  (:action Noop :parameters () :precondition (and) :effect (and)))
)";

const char* kCorridorProblem = R"((define (problem corridor) (:domain move)
  (:objects agent0 - agent l1 l2 l3 - location ahead left right - movement)
  (:init (atLocation agent0 l1) (move ahead) (move left) (move right)
         (conn l1 l2 ahead) (conn l2 l3 ahead))
  (:goal (and (atLocation agent0 l3))))
)";

}  // namespace

TEST_SUITE("pddl.parse") {
    TEST_CASE("reference domain parses to 8 action schemas") {
        Domain d = reference_domain();
        CHECK(d.name == "alfred_task");
        CHECK(d.actions.size() == 8);
        for (const char* n : {"explore_MoveAgent", "MoveAgent", "pickupObject", "pickupObjectFrom", "putonReceptacle",
                              "putinReceptacle", "toggleOn", "heatObject"}) {
            CHECK_MESSAGE(d.find_action(n) != nullptr, n);
        }
        CHECK(d.types.size() == 6);
        CHECK(d.predicates.size() == 30);
    }

    TEST_CASE("minimal domain") {
        Domain d = parse_domain("(define (domain d) (:predicates (p)))");
        CHECK(d.predicates.size() == 1);
        CHECK(d.predicates[0].arity() == 0);
        CHECK(d.actions.empty());
    }

    TEST_CASE("conditional effect is rejected") {
        std::string text = testutil::data_file("pddl/alfred_domain.pddl");
        text = replace_once(text, "(isHeated ?obj0))", "(when (holdsAny) (isHeated ?obj0)))");
        try {
            parse_domain(text);
            FAIL("expected SemanticError");
        } catch (const SemanticError& e) {
            CHECK(std::string(e.what()).find("unsupported construct") != std::string::npos);
        }
    }

    TEST_CASE("other unsupported constructs") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p) (q)) (:action a :parameters () "
                                     ":precondition (or (p) (q)) :effect (p)))"),
                        SemanticError);
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p)) (:functions (f)))"), SemanticError);
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:types a) (:predicates (p ?x - a)) (:action b "
                                     ":parameters (?x - a) :precondition (forall (?y - a) (p ?y)) :effect (p ?x)))"),
                        SemanticError);
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p)) (:action a :parameters () "
                                     ":precondition (and) :effect (increase (total-cost) 1)))"),
                        SemanticError);
    }

    TEST_CASE("parse errors carry a position") {
        try {
            parse_domain("(define (domain d)\n  (:predicates (p))");
            FAIL("expected ParseError");
        } catch (const ParseError& e) {
            CHECK(e.line() >= 1);
            CHECK(!e.expected().empty());
        }
    }

    TEST_CASE("semantic errors") {
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x - nosuch)))"), SemanticError);
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p)) (:action a :parameters () "
                                     ":precondition (q) :effect (p)))"),
                        SemanticError);
        CHECK_THROWS_AS(parse_domain("(define (domain d) (:predicates (p ?x)) (:action a :parameters () "
                                     ":precondition (and) :effect (p)))"),
                        SemanticError);
    }

    TEST_CASE("unobserved problem has an existential goal") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        REQUIRE(p.goal.existential());
        REQUIRE(p.goal.vars.size() == 2);
        CHECK(p.goal.vars[0] == TypedParam{"?goalObj", "obj"});
        CHECK(p.goal.vars[1] == TypedParam{"?goalReceptacle", "receptacle"});
        CHECK(std::find(p.goal.conjunction.begin(), p.goal.conjunction.end(),
                        pos("inReceptacle", {"?goalObj", "?goalReceptacle"})) != p.goal.conjunction.end());
        CHECK(p.init.contains(atom("conn", {"f0_0_0f", "f0_1_0f", "MoveAhead"})));
    }

    TEST_CASE("explore goal is conjunctive with a negative literal") {
        Domain d = reference_domain();
        std::string text = testutil::data_file("pddl/unobserved_problem.pddl");
        auto g0 = text.find("    (:goal");
        auto g1 = text.rfind(")");
        text = text.substr(0, g0) + testutil::data_file("pddl/explore_goal.pddl") + text.substr(g1);
        Problem p = parse_problem(text, d);
        CHECK_FALSE(p.goal.existential());
        REQUIRE(p.goal.conjunction.size() == 2);
        CHECK(p.goal.conjunction[0] == pos("explore"));
        CHECK(p.goal.conjunction[1] == neg("holdsAny"));
    }

    TEST_CASE("undeclared object in init") {
        Domain d = reference_domain();
        std::string text = testutil::data_file("pddl/unobserved_problem.pddl");
        text = replace_once(text, "(emptyObj emptyO)", "(emptyObj ghost0)");
        CHECK_THROWS_AS(parse_problem(text, d), SemanticError);
    }

    TEST_CASE("problem bound to a different domain") {
        Domain d = reference_domain();
        std::string text = replace_once(testutil::data_file("pddl/unobserved_problem.pddl"), "(:domain alfred_task)",
                                        "(:domain other)");
        CHECK_THROWS_AS(parse_problem(text, d), SemanticError);
    }
}

TEST_SUITE("pddl.print") {
    TEST_CASE("reference domain round-trips structurally") {
        Domain d = reference_domain();
        Domain again = parse_domain(print_domain(d));
        CHECK(again == d);
        CHECK(print_domain(again) == print_domain(d));
    }

    TEST_CASE("unobserved problem round-trips") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        std::string text = print_problem(p);
        Problem again = parse_problem(text, d);
        CHECK(again == p);
        CHECK(print_problem(again) == text);
    }

    TEST_CASE("random domains round-trip") {
        std::mt19937_64 rng(1234);
        auto pick = [&](std::size_t n) { return static_cast<std::size_t>(rng() % n); };
        for (int iter = 0; iter < 200; ++iter) {
            Domain d;
            d.name = "gen" + std::to_string(iter);
            d.requirements = {":typing", ":equality"};
            std::size_t nt = 1 + pick(3);
            for (std::size_t t = 0; t < nt; ++t) d.types.push_back(TypeDecl{"t" + std::to_string(t)});
            std::size_t np = 1 + pick(4);
            for (std::size_t p = 0; p < np; ++p) {
                PredicateSchema ps{"p" + std::to_string(p), {}};
                std::size_t ar = pick(3);
                for (std::size_t k = 0; k < ar; ++k) {
                    ps.params.push_back({"?x" + std::to_string(k), d.types[pick(nt)].name});
                }
                d.predicates.push_back(ps);
            }
            std::size_t na = pick(4);
            for (std::size_t a = 0; a < na; ++a) {
                ActionSchema as;
                as.name = "a" + std::to_string(a);
                for (std::size_t k = 0; k < nt; ++k) as.params.push_back({"?v" + std::to_string(k), d.types[k].name});
                auto random_literal = [&](bool allow_negative) {
                    const auto& ps = d.predicates[pick(np)];
                    Literal l{true, ps.name, {}};
                    for (const auto& prm : ps.params) {
                        for (const auto& ap : as.params) {
                            if (ap.type == prm.type) {
                                l.args.push_back(ap.name);
                                break;
                            }
                        }
                    }
                    if (allow_negative && pick(2) == 0) l.positive = false;
                    return l;
                };
                for (std::size_t k = pick(4); k > 0; --k) {
                    Literal l = random_literal(true);
                    if (std::find(as.pre.begin(), as.pre.end(), l) == as.pre.end()) as.pre.push_back(l);
                }
                for (std::size_t k = pick(3); k > 0; --k) {
                    Literal l = random_literal(false);
                    if (std::find(as.add.begin(), as.add.end(), l) == as.add.end()) as.add.push_back(l);
                }
                for (std::size_t k = pick(2); k > 0; --k) {
                    Literal l = random_literal(false);
                    if (std::find(as.del.begin(), as.del.end(), l) == as.del.end()) as.del.push_back(l);
                }
                d.actions.push_back(as);
            }
            d.validate();
            Domain again = parse_domain(print_domain(d));
            REQUIRE(again == d);
        }
    }
}

TEST_SUITE("pddl.strips") {
    TEST_CASE("applicable") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        const ActionSchema& move = *d.find_action("MoveAgent");
        State lone{atom("atLocation", {"agent0", "f0_0_0f"})};
        GroundAction a = instantiate(move, {"agent0", "f0_0_0f", "f0_1_0f", "MoveAhead"});
        CHECK_FALSE(applicable(lone, a));
        CHECK(applicable(p.init, a));

        State holding{atom("holdsAny"), atom("atLocation", {"agent0", "f0_0_0f"}),
                      atom("objectAtLocation", {"emptyO", "f0_0_0f"})};
        GroundAction pick = instantiate(*d.find_action("pickupObject"), {"agent0", "f0_0_0f", "emptyO"});
        CHECK_FALSE(applicable(holding, pick));
        holding.erase(atom("holdsAny"));
        CHECK(applicable(holding, pick));
    }

    TEST_CASE("apply moves the agent") {
        Domain d = parse_domain(R"((define (domain m) (:predicates (at ?l) (conn ?a ?b ?m))
            (:action MoveAgent :parameters (?from ?to ?m)
              :precondition (and (at ?from) (conn ?from ?to ?m))
              :effect (and (not (at ?from)) (at ?to)))))");
        State s{atom("at", {"l1"}), atom("conn", {"l1", "l2", "ahead"})};
        State before = s;
        State next = apply(s, instantiate(d.actions[0], {"l1", "l2", "ahead"}));
        CHECK(next == State{atom("at", {"l2"}), atom("conn", {"l1", "l2", "ahead"})});
        CHECK(s == before);
        CHECK_THROWS_AS(apply(s, instantiate(d.actions[0], {"l2", "l1", "ahead"})), NotApplicable);
    }

    TEST_CASE("empty effects leave the state unchanged") {
        Domain d = parse_domain(kMoveDomain);
        State s{atom("explore")};
        CHECK(apply(s, instantiate(*d.find_action("Noop"), {})) == s);
    }

    TEST_CASE("symmetric moves are reversible") {
        Domain d = parse_domain(kMoveDomain);
        const auto& mv = *d.find_action("MoveAgent");
        State s{atom("atLocation", {"agent0", "l1"}), atom("move", {"ahead"}), atom("conn", {"l1", "l2", "ahead"}),
                atom("conn", {"l2", "l1", "ahead"})};
        State there = apply(s, instantiate(mv, {"agent0", "l1", "l2", "ahead"}));
        CHECK(apply(there, instantiate(mv, {"agent0", "l2", "l1", "ahead"})) == s);
    }

    TEST_CASE("a self-move keeps the agent in place") {
        Domain d = parse_domain(kMoveDomain);
        GroundAction a = instantiate(*d.find_action("MoveAgent"), {"agent0", "l1", "l1", "ahead"});
        CHECK(a.del.empty());
    }

    TEST_CASE("satisfies") {
        GroundGoal empty;
        CHECK(satisfies(State{}, empty));
        GroundGoal explore{{atom("explore")}, {atom("holdsAny")}};
        CHECK(satisfies(State{atom("explore")}, explore));
        CHECK_FALSE(satisfies(State{atom("explore"), atom("holdsAny")}, explore));
        CHECK_FALSE(satisfies(State{}, explore));
    }
}

TEST_SUITE("pddl.extension") {
    TEST_CASE("empty deltas are identities") {
        Domain d = reference_domain();
        const auto& mv = *d.find_action("MoveAgent");
        CHECK(extend_precondition(mv, {}) == mv);
        CHECK(extend_effect(mv, {}, {}) == mv);
    }

    TEST_CASE("make_explore_action reproduces explore_MoveAgent") {
        Domain d = reference_domain();
        ActionSchema derived = make_explore_action(*d.find_action("MoveAgent"), "?loc0");
        CHECK(derived == *d.find_action("explore_MoveAgent"));
        CHECK(derived.name == "explore_MoveAgent");
        ActionSchema pre_only = extend_precondition(*d.find_action("MoveAgent"), {pos("unknown", {"?loc0"}), neg("explore")});
        CHECK(pre_only.pre.size() == d.find_action("explore_MoveAgent")->pre.size());
    }

    TEST_CASE("extension errors") {
        Domain d = reference_domain();
        const auto& mv = *d.find_action("MoveAgent");
        CHECK_THROWS_AS(extend_precondition(mv, {pos("unknown", {"?nope"})}), SemanticError);
        CHECK_THROWS_AS(make_explore_action(mv, "?nope"), SemanticError);
        ActionSchema once = make_explore_action(mv, "?loc0");
        CHECK_THROWS_AS(make_explore_action(once, "?loc0"), SemanticError);
        CHECK_THROWS_AS(extend_effect(mv, {pos("atLocation", {"?agent0", "?loc0"})}, {}), SemanticError);
        CHECK_THROWS_AS(extend_effect(mv, {pos("explore")}, {pos("explore")}), SemanticError);
    }

    TEST_CASE("explore action inapplicable once its anchor is explored") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        GroundAction e =
            instantiate(*d.find_action("explore_MoveAgent"), {"agent0", "f0_0_0f", "f0_1_0f", "MoveAhead"});
        REQUIRE(applicable(p.init, e));
        State s = apply(p.init, e);
        CHECK(s.contains(atom("explore")));
        CHECK_FALSE(s.contains(atom("unknown", {"f0_1_0f"})));
        CHECK_FALSE(applicable(s, e));
    }

    TEST_CASE("effect extension equals apply then manual update") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        std::vector<std::string> args{"agent0", "f0_0_0f", "f0_1_0f", "MoveAhead"};
        ActionSchema ext = extend_effect(*d.find_action("MoveAgent"), {pos("explore")}, {pos("unknown", {"?loc0"})});
        State lhs = apply(p.init, instantiate(ext, args));
        State rhs = apply(p.init, instantiate(*d.find_action("MoveAgent"), args));
        rhs.erase(atom("unknown", {"f0_1_0f"}));
        rhs.insert(atom("explore"));
        CHECK(lhs == rhs);
    }
}

TEST_SUITE("pddl.grounding") {
    TEST_CASE("binding counts") {
        Domain d = parse_domain(kMoveDomain);
        Problem p = parse_problem(kCorridorProblem, d);
        CHECK(count_type_consistent_bindings(*d.find_action("MoveAgent"), p) == 27);
        CHECK(count_type_consistent_bindings(*d.find_action("Noop"), p) == 1);
        GroundedTask all = ground(d, p, GroundingMode::AllBindings);
        auto n_moves = std::count_if(all.actions.begin(), all.actions.end(),
                                     [](const IndexedAction& a) { return a.schema == "MoveAgent"; });
        CHECK(n_moves == 27);
        auto n_noop = std::count_if(all.actions.begin(), all.actions.end(),
                                    [](const IndexedAction& a) { return a.schema == "Noop"; });
        CHECK(n_noop == 1);

        Domain l1 = reference_domain();
        Problem l2 = unobserved_problem(l1);
        CHECK(count_type_consistent_bindings(*l1.find_action("explore_MoveAgent"), l2) == 75);
    }

    TEST_CASE("relaxed grounding keeps only reachable moves") {
        Domain d = parse_domain(kMoveDomain);
        Problem p = parse_problem(kCorridorProblem, d);
        GroundedTask t = ground(d, p);
        std::vector<std::string> moves;
        for (const auto& a : t.actions) moves.push_back(a.to_string());
        CHECK(moves == std::vector<std::string>{"(MoveAgent agent0 l1 l2 ahead)", "(MoveAgent agent0 l2 l3 ahead)",
                                                "(Noop)"});
        CHECK(std::is_sorted(t.atoms.begin(), t.atoms.end()));
    }

    TEST_CASE("compile_goal") {
        Domain d = reference_domain();
        std::string text = testutil::data_file("pddl/unobserved_problem.pddl");
        text = replace_once(text, "emptyO - obj", "emptyO potato1 potato2 - obj");
        text = replace_once(text, "emptyR - receptacle", "emptyR table1 - receptacle");
        text = replace_once(text, "(emptyObj emptyO)",
                            "(emptyObj emptyO) (objectType potato1 PotatoType) (objectType potato2 PotatoType) "
                            "(receptacleType table1 TableType)");
        Problem p = parse_problem(text, d);
        CompiledGoal g = compile_goal(d, p);
        CHECK(g.existential);
        REQUIRE(g.achievers.size() == 2);
        CHECK(g.achievers[0].args == std::vector<std::string>{"potato1", "table1"});
        CHECK(g.achievers[1].args == std::vector<std::string>{"potato2", "table1"});
        REQUIRE(g.conjunctive.pos.size() == 1);
        CHECK(g.conjunctive.pos[0] == atom("goal-achieved"));

        Problem plain = parse_problem(kCorridorProblem, parse_domain(kMoveDomain));
        CompiledGoal id = compile_goal(parse_domain(kMoveDomain), plain);
        CHECK_FALSE(id.existential);
        CHECK(id.achievers.empty());
        CHECK(id.conjunctive.pos == std::vector<GroundAtom>{atom("atLocation", {"agent0", "l3"})});
    }

    TEST_CASE("unobserved problem has no achiever bindings") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        CHECK(compile_goal(d, p).achievers.empty());
        CHECK_FALSE(goal_holds(d, p, p.init));
    }

    TEST_CASE("relaxed grounding equals the reachable subset of all bindings") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        GroundedTask all = ground(d, p, GroundingMode::AllBindings);
        GroundedTask rel = ground(d, p, GroundingMode::RelaxedReachable);
        // Delete-relaxed fixpoint over the exhaustive grounding.
        std::set<GroundAtom> reached(p.init.begin(), p.init.end());
        std::vector<char> fired(all.actions.size(), 0);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = 0; i < all.actions.size(); ++i) {
                if (fired[i]) continue;
                GroundAction a = all.action(i);
                bool ok = std::all_of(a.pre_pos.begin(), a.pre_pos.end(),
                                      [&](const GroundAtom& x) { return reached.contains(x); });
                const auto statics = d.static_predicates();
                ok = ok && std::none_of(a.pre_neg.begin(), a.pre_neg.end(), [&](const GroundAtom& x) {
                    return statics.contains(x.predicate) && p.init.contains(x);
                });
                if (!ok) continue;
                fired[i] = 1;
                changed = true;
                for (const auto& x : a.add) reached.insert(x);
            }
        }
        std::vector<std::string> expect, got;
        for (std::size_t i = 0; i < all.actions.size(); ++i) {
            if (fired[i]) expect.push_back(all.actions[i].to_string());
        }
        for (const auto& a : rel.actions) got.push_back(a.to_string());
        CHECK(expect == got);
        CHECK(!got.empty());
    }

    TEST_CASE("heatObject grounds only for canHeat pairs") {
        Domain d = reference_domain();
        std::string text = testutil::data_file("pddl/unobserved_problem.pddl");
        text = replace_once(text, "emptyO - obj", "emptyO potato1 - obj");
        text = replace_once(text, "emptyR - receptacle", "emptyR micro1 - receptacle");
        text = replace_once(text, "(emptyObj emptyO)",
                            "(emptyObj emptyO) (objectType potato1 PotatoType) (receptacleType micro1 MicrowaveType) "
                            "(objectAtLocation potato1 f0_0_0f) (receptacleAtLocation micro1 f0_1_0f)");
        Problem p = parse_problem(text, d);
        GroundedTask t = ground(d, p);
        int heats = 0;
        for (const auto& a : t.actions) {
            if (a.schema != "heatObject") continue;
            ++heats;
            CHECK(a.args[3] == "PotatoType");
            CHECK(a.args[5] == "MicrowaveType");
        }
        CHECK(heats > 0);
    }

    TEST_CASE("brute force cross-check on random tasks") {
        std::mt19937_64 rng(99);
        Domain d = parse_domain(R"((define (domain r) (:requirements :typing :equality)
          (:types a b)
          (:predicates (p ?x - a) (q ?x - a ?y - b) (r ?y - b) (s))
          (:action one :parameters (?x - a ?y - b) :precondition (and (p ?x) (q ?x ?y)) :effect (and (r ?y) (not (p ?x))))
          (:action two :parameters (?y - b ?z - b) :precondition (and (r ?y) (not (= ?y ?z))) :effect (s))
          (:action three :parameters (?x - a ?w - a ?y - b ?z - b) :precondition (and (p ?x) (p ?w) (r ?z)) :effect (q ?x ?y))))");
        for (int iter = 0; iter < 50; ++iter) {
            Problem p;
            p.name = "rand";
            p.domain_name = "r";
            int na = 1 + static_cast<int>(rng() % 3), nb = 1 + static_cast<int>(rng() % 3);
            for (int i = 0; i < na; ++i) p.objects.push_back({"a" + std::to_string(i), "a"});
            for (int i = 0; i < nb; ++i) p.objects.push_back({"b" + std::to_string(i), "b"});
            for (int i = 0; i < na; ++i) {
                if (rng() % 2) p.init.insert(atom("p", {"a" + std::to_string(i)}));
                for (int j = 0; j < nb; ++j) {
                    if (rng() % 3 == 0) p.init.insert(atom("q", {"a" + std::to_string(i), "b" + std::to_string(j)}));
                }
            }
            p.goal.conjunction = {pos("s")};
            GroundedTask all = ground(d, p, GroundingMode::AllBindings);
            std::size_t expected = count_type_consistent_bindings(d.actions[0], p) +
                                   static_cast<std::size_t>(nb * (nb - 1)) +
                                   count_type_consistent_bindings(d.actions[2], p);
            CHECK(all.actions.size() == expected);
            for (const auto& a : all.actions) {
                for (std::size_t k = 0; k < a.args.size(); ++k) {
                    const auto* schema = d.find_action(a.schema);
                    CHECK(p.find_object(a.args[k])->type == schema->params[k].type);
                }
            }
        }
    }

    TEST_CASE("grounding is deterministic") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        GroundedTask a = ground(d, p), b = ground(d, p);
        REQUIRE(a.actions.size() == b.actions.size());
        for (std::size_t i = 0; i < a.actions.size(); ++i) CHECK(a.actions[i].to_string() == b.actions[i].to_string());
        CHECK(a.atoms == b.atoms);
    }
}

TEST_SUITE("pddl.properties") {
    TEST_CASE("frame and extension soundness on random pairs") {
        Domain d = reference_domain();
        Problem p = unobserved_problem(d);
        GroundedTask t = ground(d, p, GroundingMode::AllBindings);
        std::mt19937_64 rng(7);
        const auto& atoms = t.atoms;
        for (int iter = 0; iter < 2000; ++iter) {
            State s;
            for (const auto& a : atoms) {
                if (rng() % 4 == 0) s.insert(a);
            }
            GroundAction a = t.action(rng() % t.actions.size());
            if (!applicable(s, a)) {
                // Force applicability to exercise the frame property.
                for (const auto& x : a.pre_pos) s.insert(x);
                for (const auto& x : a.pre_neg) s.erase(x);
            }
            REQUIRE(applicable(s, a));
            State next = apply(s, a);
            std::set<GroundAtom> expect;
            for (const auto& x : s) {
                if (std::find(a.del.begin(), a.del.end(), x) == a.del.end()) expect.insert(x);
            }
            expect.insert(a.add.begin(), a.add.end());
            CHECK(next.atoms() == expect);
        }
    }
}
