#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "egoplan/env/knowledge.hpp"
#include "egoplan/pddl/types.hpp"

namespace egoplan::env {

/// Kind of subtype a family parameter expects.
enum class Role { Object, Receptacle, MovableReceptacle, Lamp };

/// Static description of a task family. Everything family-specific lives in
/// this table and in build_goal.
struct FamilyInfo {
    std::string name;
    bool original{true};  // one of the seven base families
    std::vector<Role> roles;
    /// Affordances the first parameter must be treated with (canHeat, ...).
    std::vector<std::string> treatments;
    /// How many distinct instances of each parameter subtype the goal needs.
    std::vector<int> copies;
    /// Receptacle subtype fixed by the family itself, if any.
    std::string implicit_receptacle;
};

const std::vector<FamilyInfo>& families();
const FamilyInfo& family_info(std::string_view name);
std::vector<std::string> original_family_names();
std::vector<std::string> new_family_names();

struct TaskSpec {
    std::string family;
    std::vector<std::string> params;  // subtype names, e.g. PotatoType

    /// "family:P1,P2" (or just "family" when there are no parameters).
    std::string to_string() const;
    static TaskSpec parse(std::string_view text);

    friend bool operator==(const TaskSpec&, const TaskSpec&) = default;
};

/// Throws std::invalid_argument when the parameters do not type-check
/// against the family roles and the knowledge base.
void validate_task(const TaskSpec& spec, const Knowledge& kb);

struct GoalCondition {
    std::string label;
    std::vector<pddl::Literal> literals;
};

struct TaskGoal {
    std::vector<pddl::TypedParam> vars;
    std::vector<GoalCondition> conditions;

    /// Existential goal over all conditions (duplicate literals dropped,
    /// first occurrence kept).
    pddl::Goal pddl_goal() const;
};

/// The shared goal builder.
TaskGoal build_goal(const TaskSpec& spec);

struct GoalStatus {
    bool success{false};
    std::vector<std::string> labels;
    std::vector<bool> conditions;

    std::size_t satisfied() const;
};

/// Success requires one binding satisfying every condition; each condition
/// is also checked on its own for goal-condition accounting.
GoalStatus evaluate_goal(const TaskGoal& goal, const std::vector<pddl::ObjectConst>& objects, const pddl::State& s);

/// Receptacle subtypes allowed to hold `object` for the family's placement.
bool can_place(const Knowledge& kb, const std::string& receptacle, const std::string& object);

}  // namespace egoplan::env
