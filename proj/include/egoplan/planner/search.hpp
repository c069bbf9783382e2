#pragma once

#include <chrono>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "egoplan/pddl/grounding.hpp"

namespace egoplan::planner {

enum class Outcome { PlanFound, Unsolvable, BudgetExhausted };

std::string to_string(Outcome o);

struct Budget {
    /// Maximum number of node expansions.
    std::uint64_t max_nodes{5'000'000};
    std::chrono::milliseconds max_time{10'000};
};

struct SearchStats {
    std::uint64_t expanded{0};
    std::uint64_t generated{0};
    double wall_ms{0.0};
    Outcome result{Outcome::Unsolvable};
};

struct Plan {
    std::vector<pddl::GroundAction> steps;

    /// Number of non-synthetic steps.
    std::size_t length() const;
};

struct SearchResult {
    std::optional<Plan> plan;
    /// Indices into the task's action list, parallel to plan->steps.
    std::vector<std::size_t> action_indices;
    SearchStats stats;

    bool found() const { return plan.has_value(); }
};

/// Breadth-first search: shortest plans, ties broken by canonical action order.
SearchResult solve_bfs(const pddl::GroundedTask& task, const Budget& budget = {});

/// Greedy best-first search on h_add with FIFO tie-breaking and full-state
/// duplicate detection.
SearchResult solve_gbfs(const pddl::GroundedTask& task, const Budget& budget = {});

inline constexpr std::uint64_t kInfinity = std::numeric_limits<std::uint64_t>::max();

/// Additive delete-relaxation estimate from `s` to the task goal with unit
/// action costs; kInfinity when some goal atom is relaxed-unreachable.
std::uint64_t h_add(const pddl::GroundedTask& task, const pddl::State& s);

/// Drops actions whose positive preconditions are unreachable in the delete
/// relaxation from init, and actions blocked by a negative precondition on
/// an atom that is true in init and deleted by no action.
pddl::GroundedTask reachability_prune(const pddl::GroundedTask& task);

struct Validation {
    bool ok{false};
    /// First inapplicable step, or plan size when only the goal check failed.
    std::optional<std::size_t> failed_index;
    std::string reason;
};

/// Replays `plan` from the task's init. The goal check accepts a final state
/// satisfying the compiled goal, or one in which a synthetic achiever is
/// applicable (so plans with their achiever step stripped still validate).
Validation validate_plan(const pddl::GroundedTask& task, const Plan& plan);

}  // namespace egoplan::planner
