#pragma once

#include <cstdint>
#include <optional>
#include <string_view>

#include "egoplan/pddl/types.hpp"

namespace egoplan::pddl {

using AtomId = std::uint32_t;

inline constexpr std::string_view kGoalAchievedPredicate = "goal-achieved";
inline constexpr std::string_view kAchieverSchema = "achieve-goal";

enum class GroundingMode {
    /// Every type-consistent binding (equality filters only).
    AllBindings,
    /// Only bindings whose positive preconditions are reachable in the
    /// delete relaxation from init; static negative preconditions are
    /// evaluated against init.
    RelaxedReachable,
};

/// Ground action over the task's atom table.
struct IndexedAction {
    std::string schema;
    std::vector<std::string> args;
    std::vector<AtomId> pre_pos;
    std::vector<AtomId> pre_neg;
    std::vector<AtomId> add;
    std::vector<AtomId> del;
    bool synthetic{false};

    std::string to_string() const;
};

/// Propositional task. `atoms` is sorted canonically and an AtomId is an
/// index into it; `actions` are ordered by (synthetic, schema, args).
struct GroundedTask {
    std::vector<ObjectConst> objects;
    std::vector<GroundAtom> atoms;
    std::vector<IndexedAction> actions;
    std::vector<AtomId> init;
    std::vector<AtomId> goal_pos;
    std::vector<AtomId> goal_neg;

    std::optional<AtomId> find(const GroundAtom& a) const;
    GroundAction action(std::size_t i) const;
    State initial_state() const;
    GroundGoal goal() const;
    std::size_t synthetic_count() const;
};

struct CompiledGoal {
    bool existential{false};
    GroundGoal conjunctive;
    /// One synthetic action per surviving binding of the existential
    /// variables; each adds (goal-achieved).
    std::vector<GroundAction> achievers;
};

/// Conjunctive goals pass through. Existential goals become
/// {(goal-achieved)} plus achievers; bindings whose static literals are
/// false in init are dropped.
CompiledGoal compile_goal(const Domain& dom, const Problem& prob);

/// True iff the problem's goal (conjunctive or existential) holds in `s`.
bool goal_holds(const Domain& dom, const Problem& prob, const State& s);

GroundedTask ground(const Domain& dom, const Problem& prob, GroundingMode mode = GroundingMode::RelaxedReachable);

/// Product of the parameter type-domain sizes, before any filtering.
std::size_t count_type_consistent_bindings(const ActionSchema& schema, const Problem& prob);

}  // namespace egoplan::pddl
