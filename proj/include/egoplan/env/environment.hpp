#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "egoplan/env/world.hpp"
#include "egoplan/pddl/types.hpp"

namespace egoplan::env {

enum class ActionKind { MoveAhead, RotateLeft, RotateRight, Pickup, Put, ToggleOn, HeatIn, CoolIn, CleanIn, Slice };

struct EnvAction {
    ActionKind kind{ActionKind::MoveAhead};
    std::string target;  // entity id for the parametric actions

    bool is_movement() const;
    /// "MoveAhead", "Pickup(potato1)", ...
    std::string to_string() const;
    static EnvAction parse(std::string_view text);

    friend bool operator==(const EnvAction&, const EnvAction&) = default;
};

struct PerceivedEntity {
    std::string id;
    std::string subtype;
    EntityKind kind{EntityKind::Object};
    std::set<std::string> props;
    std::string location;   // facing-0 token of its cell; empty while carried
    std::string container;  // receptacle id or empty
    bool held{false};

    friend bool operator==(const PerceivedEntity&, const PerceivedEntity&) = default;
};

struct PerceivedEdge {
    std::string from;
    std::string to;
    std::string label;

    friend auto operator<=>(const PerceivedEdge&, const PerceivedEdge&) = default;
    friend bool operator==(const PerceivedEdge&, const PerceivedEdge&) = default;
};

struct Perception {
    bool failed{false};
    std::string agent_location;
    std::vector<PerceivedEdge> edges;        // sorted
    std::vector<PerceivedEntity> entities;   // sorted by id
    std::string held;                        // id of the carried entity or empty

    std::vector<std::string> ids() const;
    friend bool operator==(const Perception&, const Perception&) = default;
};

/// Scripted interaction failures: each interaction attempt fails with
/// probability `rate` until `shots` faults have been injected.
struct FaultConfig {
    double rate{0.0};
    int shots{0};
    std::uint64_t seed{0};
};

struct StepRecord {
    std::size_t t{0};
    std::string action;
    bool failed{false};
    double cost{1.0};
    std::vector<std::string> perceived_ids;
};

/// One env trace line: {"t","action","failed","cost","perceived_ids"}.
std::string step_record_json(const StepRecord& r);

inline constexpr int kDefaultFailureLimit = 10;
inline constexpr int kDefaultStepLimit = 1000;

/// Atoms describing one entity in the shared symbolic vocabulary. Used for
/// the hidden-state export and by the agent when it reconciles perceptions.
std::vector<pddl::GroundAtom> entity_atoms(const PerceivedEntity& e, const Knowledge& kb);

/// Predicates whose atoms about an entity are owned by entity_atoms.
const std::vector<std::string>& entity_predicates();

/// Rotation edges of every pose of `c` plus MoveAhead edges to free neighbours.
std::vector<PerceivedEdge> cell_edges(const Scenario& sc, const Cell& c);

/// Edges reported from `pose`: those of its own cell, the rotations of each
/// free neighbour cell, and the MoveAhead from each neighbour back.
std::vector<PerceivedEdge> perceived_edges(const Scenario& sc, const Pose& pose);

/// Single-owner simulator. Not safe to step from several threads.
class Environment {
public:
    explicit Environment(EnvTask task, FaultConfig faults = {});

    Perception reset();
    /// Returns the perception and the step cost (always 1.0).
    std::pair<Perception, double> step(const EnvAction& a);

    bool hard_failed() const { return hard_failed_; }
    int failures() const { return failures_; }
    int steps() const { return steps_; }
    int injected_faults() const { return injected_; }
    const Pose& pose() const { return pose_; }
    const EnvTask& task() const { return task_; }
    const std::vector<StepRecord>& trace() const { return trace_; }

    /// Entities visible from the current pose.
    std::vector<std::string> visible_entities() const;

    /// The complete hidden state as a planning problem over the runtime
    /// vocabulary, with the task goal.
    pddl::Problem full_problem() const;
    GoalStatus goal_check() const;

    /// Current hidden entity states (containers, props) in scenario form.
    const std::vector<EntitySpec>& entities() const { return entities_; }
    const std::string& held() const { return held_; }

private:
    EnvTask task_;
    FaultConfig faults_;
    std::mt19937_64 fault_rng_;
    Pose pose_;
    std::vector<EntitySpec> entities_;
    std::string held_;
    int failures_{0};
    int steps_{0};
    int injected_{0};
    bool hard_failed_{false};
    std::vector<StepRecord> trace_;

    EntitySpec* find(std::string_view id);
    const EntitySpec* find(std::string_view id) const;
    Cell cell_of(const EntitySpec& e) const;
    bool carried(const EntitySpec& e) const;
    bool hidden(const EntitySpec& e) const;
    bool at_agent(const EntitySpec& e) const;
    bool attempt(const EnvAction& a);
    bool inject_fault();
    PerceivedEntity view(const EntitySpec& e) const;
    Perception perceive(bool failed) const;
};

}  // namespace egoplan::env
