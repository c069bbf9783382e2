#pragma once

#include <string_view>

#include "egoplan/pddl/types.hpp"

namespace egoplan::pddl {

/// pre+ ⊆ s and pre− ∩ s = ∅.
bool applicable(const State& s, const GroundAction& a);

/// (s \ del) ∪ add. Throws NotApplicable when the precondition fails.
State apply(const State& s, const GroundAction& a);

bool satisfies(const State& s, const GroundGoal& g);

/// Instantiates `schema` with one object per parameter. Equality literals
/// are dropped; callers filter bindings with `equality_holds` first.
GroundAction instantiate(const ActionSchema& schema, const std::vector<std::string>& binding);

bool equality_holds(const ActionSchema& schema, const std::vector<std::string>& binding);

/// Returns a copy of `a` whose precondition additionally requires `delta`.
/// Throws SemanticError when a delta literal uses a variable not in a.params.
ActionSchema extend_precondition(const ActionSchema& a, const std::vector<Literal>& delta);

/// Returns a copy of `a` with `add_delta` and `del_delta` appended to the
/// effects. Literals must be positive, use only a.params, and must not
/// already appear in either effect list.
ActionSchema extend_effect(const ActionSchema& a, const std::vector<Literal>& add_delta,
                           const std::vector<Literal>& del_delta);

/// True iff some type-consistent binding of `vars` over `objects` makes
/// every literal of `conj` hold in `s` (equality literals included).
bool exists_binding(const std::vector<TypedParam>& vars, const std::vector<Literal>& conj,
                    const std::vector<ObjectConst>& objects, const State& s);

inline constexpr std::string_view kExplorePrefix = "explore_";
inline constexpr std::string_view kUnknownPredicate = "unknown";
inline constexpr std::string_view kExplorePredicate = "explore";

/// The exploration variant of `a` for the anchor parameter: requires
/// (unknown anchor) and ¬(explore), adds (explore), deletes (unknown anchor).
ActionSchema make_explore_action(const ActionSchema& a, std::string_view anchor_param);

}  // namespace egoplan::pddl
