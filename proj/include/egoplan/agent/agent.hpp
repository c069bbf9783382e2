#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "egoplan/env/environment.hpp"
#include "egoplan/planner/search.hpp"

namespace egoplan::agent {

enum class PlannerKind { Gbfs, Bfs };

std::string to_string(PlannerKind k);
PlannerKind parse_planner(std::string_view s);

struct ExplorationAction {
    std::string action;  // domain action name
    std::string anchor;  // its anchor parameter

    friend bool operator==(const ExplorationAction&, const ExplorationAction&) = default;
};

struct AgentConfig {
    std::vector<std::string> anchor_types{"location"};
    std::vector<ExplorationAction> exploration_actions{{"MoveAgent", "?loc0"}};
    int pre_explore_budget{0};
    std::uint64_t seed{0};
    int step_limit{env::kDefaultStepLimit};
    int failure_limit{env::kDefaultFailureLimit};
    PlannerKind planner{PlannerKind::Gbfs};
    planner::Budget budget{};
    /// Exploration goal also asks for empty hands.
    bool explore_empty_hands{true};
    bool prioritize_frontier{true};
    /// Replan after a failed action; when off the episode ends on the first failure.
    bool fault_recovery{true};

    /// Throws std::invalid_argument when an action or type is missing from `dom`.
    void validate(const pddl::Domain& dom) const;
};

class SpatialGraph {
public:
    struct Node {
        bool visited{false};
        std::set<std::string> seen;  // entity ids observed at this location

        friend bool operator==(const Node&, const Node&) = default;
    };

    void add_node(const std::string& loc) { nodes_[loc]; }
    void add_edge(const std::string& from, const std::string& label, const std::string& to);
    void visit(const std::string& loc) { nodes_[loc].visited = true; }
    void saw(const std::string& loc, const std::string& id) { nodes_[loc].seen.insert(id); }

    const std::map<std::string, Node>& nodes() const { return nodes_; }
    const std::map<std::pair<std::string, std::string>, std::string>& edges() const { return edges_; }
    std::size_t visited_count() const;

    /// Shortest edge paths from `from` (BFS, edges in key order). Returns
    /// predecessor edge per reached node.
    std::map<std::string, std::pair<std::string, std::string>> shortest_paths(const std::string& from) const;

    friend bool operator==(const SpatialGraph&, const SpatialGraph&) = default;

private:
    std::map<std::string, Node> nodes_;
    std::map<std::pair<std::string, std::string>, std::string> edges_;
};

struct MentalState {
    std::map<std::string, std::string> objects;  // name -> type
    std::map<std::string, std::string> subtypes; // entity id -> subtype
    pddl::State init;
    pddl::Goal goal;
    SpatialGraph graph;
    std::set<std::string> anchors;  // C
    int failures{0};
    int steps{0};

    std::vector<pddl::ObjectConst> object_list() const;
    std::string agent_location() const;
    /// Known anchor objects outside C.
    std::vector<std::string> frontier(const AgentConfig& cfg) const;

    friend bool operator==(const MentalState&, const MentalState&) = default;
};

MentalState init_mental_state(const env::Perception& p, const env::TaskSpec& task, const env::Knowledge& kb);

/// `a` is the planner action the env step realised, if any.
void update_mental_state(MentalState& ms, const pddl::GroundAction* a, const env::Perception& p, double cost,
                         const env::Knowledge& kb, const AgentConfig& cfg = {});

pddl::Problem build_solve_problem(const MentalState& ms);

/// Domain actions gated by ¬(explore) plus one exploration copy per
/// configured exploration action.
pddl::Domain build_explore_domain(const pddl::Domain& dom, const AgentConfig& cfg);
pddl::Problem build_explore_problem(const MentalState& ms, const AgentConfig& cfg);

std::vector<env::EnvAction> plan_action_to_env(const pddl::GroundAction& a);

/// Random movement along known edges; no interactions.
void pre_explore(env::Environment& env, MentalState& ms, int budget, std::uint64_t seed, const AgentConfig& cfg = {});

enum class Phase { Solve, Explore };
std::string to_string(Phase p);

struct IterationRecord {
    std::size_t iteration{0};
    Phase phase{Phase::Solve};
    planner::Outcome solve_outcome{planner::Outcome::Unsolvable};
    std::vector<std::string> plan;  // non-synthetic steps
    std::size_t executed{0};        // planner steps carried out
    bool failed{false};
    int failures{0};                // cumulative
    /// Exploration iterations only.
    std::size_t unknown_count{0};
    std::vector<std::string> unknown;  // the frontier, sorted
    std::size_t explore_actions{0};
    bool explore_last{false};
};

struct EpisodeResult {
    bool success{false};
    std::string reason;
    env::GoalStatus goal_status;
    std::vector<IterationRecord> iterations;
    std::vector<planner::SearchStats> planner_calls;
    std::vector<env::StepRecord> env_trace;
    std::vector<std::string> actions;  // env actions in order
    int steps{0};
    int failures{0};
    std::size_t known_locations{0};
    std::size_t visited_locations{0};
};

/// Called with every problem the agent builds, before it is solved.
using ProblemObserver = std::function<void(std::size_t iteration, Phase phase, const pddl::Domain&, const pddl::Problem&)>;

/// Iterative exploration replanning against `env` (reset internally).
EpisodeResult run_episode(env::Environment& env, const AgentConfig& cfg = {}, const ProblemObserver& observer = {});

/// JSON lines: one record per iteration, then a summary record.
std::string episode_trace_jsonl(const EpisodeResult& r);

}  // namespace egoplan::agent
