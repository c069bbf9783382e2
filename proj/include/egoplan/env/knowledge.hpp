#pragma once

#include <map>
#include <set>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "egoplan/pddl/types.hpp"

namespace egoplan::env {

enum class EntityKind { Object, Receptacle };

struct SubtypeInfo {
    std::string name;  // e.g. "PotatoType"
    EntityKind kind{EntityKind::Object};
    bool openable{false};    // receptacles whose contents stay hidden until used
    bool movable{false};     // receptacles that can be carried
    bool toggleable{false};  // objects that can be switched on

    friend bool operator==(const SubtypeInfo&, const SubtypeInfo&) = default;
};

/// Affordance relations over subtypes: canContain, canHeat, canCool,
/// canClean, canSlice. The first argument is the acting subtype (the
/// receptacle or the knife), the second the affected one.
struct Affordance {
    std::string relation;
    std::string actor;
    std::string target;

    friend auto operator<=>(const Affordance&, const Affordance&) = default;
    friend bool operator==(const Affordance&, const Affordance&) = default;
};

inline const std::vector<std::string>& affordance_relations() {
    static const std::vector<std::string> r{"canContain", "canHeat", "canCool", "canClean", "canSlice"};
    return r;
}

/// Subtype catalogue plus affordance table. Shared by the simulator and the
/// agent as public domain knowledge.
class Knowledge {
public:
    void add_subtype(SubtypeInfo info);
    void add_affordance(const std::string& relation, const std::string& actor, const std::string& target);

    const SubtypeInfo* find(std::string_view subtype) const;
    const SubtypeInfo& at(std::string_view subtype) const;
    bool holds(std::string_view relation, std::string_view actor, std::string_view target) const;

    /// Subtypes in name order.
    std::vector<const SubtypeInfo*> subtypes() const;
    std::vector<const SubtypeInfo*> subtypes(EntityKind kind) const;
    const std::set<Affordance>& affordances() const { return affordances_; }

    /// Actors `a` with relation(a, target).
    std::vector<std::string> actors(std::string_view relation, std::string_view target) const;
    /// Targets `t` with relation(actor, t).
    std::vector<std::string> targets(std::string_view relation, std::string_view actor) const;

    /// Itemtype constants, static affordance atoms and `openable` atoms.
    std::vector<pddl::ObjectConst> itemtype_objects() const;
    std::vector<pddl::GroundAtom> static_atoms() const;

    friend bool operator==(const Knowledge&, const Knowledge&) = default;

private:
    std::map<std::string, SubtypeInfo, std::less<>> subtypes_;
    std::set<Affordance> affordances_;
};

/// The household catalogue used by the generator and the benchmarks.
const Knowledge& default_knowledge();

/// "Potato" -> "PotatoType"; names already ending in "Type" are unchanged.
std::string normalize_subtype(std::string_view name);

}  // namespace egoplan::env
