#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "egoplan/env/knowledge.hpp"
#include "egoplan/env/tasks.hpp"

namespace egoplan::env {

/// Facing 0 is North (+y); RotateRight adds one.
enum class Facing : int { North = 0, East = 1, South = 2, West = 3 };

struct Cell {
    int x{0};
    int y{0};

    friend auto operator<=>(const Cell&, const Cell&) = default;
    friend bool operator==(const Cell&, const Cell&) = default;
};

struct Pose {
    Cell cell;
    Facing facing{Facing::North};

    Cell ahead() const;
    Pose rotated_left() const;
    Pose rotated_right() const;

    friend auto operator<=>(const Pose&, const Pose&) = default;
    friend bool operator==(const Pose&, const Pose&) = default;
};

/// "f{x}_{y}_{facing}f".
std::string pose_token(const Pose& p);
/// Entities are located at the facing-0 pose of their cell.
std::string cell_token(const Cell& c);
std::optional<Pose> parse_pose_token(std::string_view token);

inline constexpr const char* kMoveAhead = "MoveAhead";
inline constexpr const char* kRotateLeft = "RotateLeft";
inline constexpr const char* kRotateRight = "RotateRight";

/// Boolean entity properties; "open" is simulator-only (no predicate).
inline const std::vector<std::string>& property_names() {
    static const std::vector<std::string> p{"isHeated", "isCooled", "isCleaned", "isSliced", "isToggled", "open"};
    return p;
}

struct EntitySpec {
    std::string id;
    std::string subtype;
    Cell cell;              // ignored when container is set
    std::string container;  // receptacle id or empty
    std::set<std::string> props;

    friend bool operator==(const EntitySpec&, const EntitySpec&) = default;
};

struct Scenario {
    std::uint64_t seed{0};
    int width{1};
    int height{1};
    std::set<Cell> walls;
    Pose start;
    Knowledge kb;
    std::vector<EntitySpec> entities;

    bool in_bounds(const Cell& c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
    bool free(const Cell& c) const { return in_bounds(c) && !walls.contains(c); }
    std::vector<Cell> free_cells() const;
    const EntitySpec* find(std::string_view id) const;
    /// Cell of `id`, following containers.
    Cell effective_cell(std::string_view id) const;

    /// Throws std::invalid_argument on dangling containers, cycles, walls,
    /// unknown subtypes, containment the knowledge base forbids, or entity
    /// cells unreachable from the start.
    void validate() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct EnvTask {
    Scenario scenario;
    TaskSpec task;

    friend bool operator==(const EnvTask&, const EnvTask&) = default;
};

/// Text format with header `egoplan-scenario v1`; see docs/scenario-format.md.
EnvTask parse_scenario(std::string_view text);
std::string print_scenario(const EnvTask& task);

}  // namespace egoplan::env
