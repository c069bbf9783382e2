#include "egoplan/env/tasks.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

#include "egoplan/pddl/strips.hpp"

namespace egoplan::env {

using pddl::Literal;
using pddl::neg;
using pddl::pos;

const std::vector<FamilyInfo>& families() {
    static const std::vector<FamilyInfo> table{
        {"pick_and_place_simple", true, {Role::Object, Role::Receptacle}, {}, {1, 1}, ""},
        {"pick_two_obj_and_place", true, {Role::Object, Role::Receptacle}, {}, {2, 1}, ""},
        {"look_at_obj_in_light", true, {Role::Object, Role::Lamp}, {}, {1, 1}, ""},
        {"pick_clean_then_place_in_recep", true, {Role::Object, Role::Receptacle}, {"canClean"}, {1, 1}, ""},
        {"pick_heat_then_place_in_recep", true, {Role::Object, Role::Receptacle}, {"canHeat"}, {1, 1}, ""},
        {"pick_cool_then_place_in_recep", true, {Role::Object, Role::Receptacle}, {"canCool"}, {1, 1}, ""},
        {"pick_and_place_with_movable_recep", true,
         {Role::Object, Role::MovableReceptacle, Role::Receptacle}, {}, {1, 1, 1}, ""},
        {"pickup_and_place_two_objects", false, {Role::Object, Role::Object, Role::Receptacle}, {}, {1, 1, 1}, ""},
        {"clean_and_heat", false, {Role::Object}, {"canClean", "canHeat"}, {1}, ""},
        {"clean_and_cool", false, {Role::Object}, {"canClean", "canCool"}, {1}, ""},
        {"heat_and_cool", false, {Role::Object}, {"canHeat", "canCool"}, {1}, ""},
        {"pick_and_place_in_drawer", false, {Role::Object}, {}, {1}, "DrawerType"},
    };
    return table;
}

const FamilyInfo& family_info(std::string_view name) {
    for (const auto& f : families()) {
        if (f.name == name) return f;
    }
    throw std::invalid_argument("unknown task family '" + std::string(name) + "'");
}

std::vector<std::string> original_family_names() {
    std::vector<std::string> out;
    for (const auto& f : families()) {
        if (f.original) out.push_back(f.name);
    }
    return out;
}

std::vector<std::string> new_family_names() {
    std::vector<std::string> out;
    for (const auto& f : families()) {
        if (!f.original) out.push_back(f.name);
    }
    return out;
}

std::string TaskSpec::to_string() const {
    std::string out = family;
    for (std::size_t i = 0; i < params.size(); ++i) out += (i == 0 ? ":" : ",") + params[i];
    return out;
}

TaskSpec TaskSpec::parse(std::string_view text) {
    TaskSpec spec;
    auto colon = text.find(':');
    spec.family = std::string(text.substr(0, colon));
    if (colon != std::string_view::npos) {
        std::string_view rest = text.substr(colon + 1);
        while (!rest.empty()) {
            auto comma = rest.find(',');
            std::string_view item = rest.substr(0, comma);
            if (item.empty()) throw std::invalid_argument("empty task parameter in '" + std::string(text) + "'");
            spec.params.push_back(normalize_subtype(item));
            if (comma == std::string_view::npos) break;
            rest = rest.substr(comma + 1);
        }
    }
    family_info(spec.family);
    return spec;
}

bool can_place(const Knowledge& kb, const std::string& receptacle, const std::string& object) {
    return kb.holds("canContain", receptacle, object);
}

void validate_task(const TaskSpec& spec, const Knowledge& kb) {
    const FamilyInfo& f = family_info(spec.family);
    if (spec.params.size() != f.roles.size()) {
        throw std::invalid_argument(spec.family + " expects " + std::to_string(f.roles.size()) + " parameters");
    }
    for (std::size_t i = 0; i < spec.params.size(); ++i) {
        const SubtypeInfo& s = kb.at(spec.params[i]);
        bool ok = false;
        switch (f.roles[i]) {
            case Role::Object:
                ok = s.kind == EntityKind::Object && !s.toggleable;
                break;
            case Role::Lamp:
                ok = s.kind == EntityKind::Object && s.toggleable;
                break;
            case Role::Receptacle:
                ok = s.kind == EntityKind::Receptacle && !s.movable;
                break;
            case Role::MovableReceptacle:
                ok = s.kind == EntityKind::Receptacle && s.movable;
                break;
        }
        if (!ok) throw std::invalid_argument(spec.to_string() + ": parameter " + s.name + " has the wrong role");
    }
    const std::string& obj = spec.params[0];
    for (const auto& t : f.treatments) {
        if (kb.actors(t, obj).empty()) throw std::invalid_argument(spec.to_string() + ": no " + t + " for " + obj);
    }
    // Where object parameters end up, if anywhere.
    std::string holder;
    const bool with_movable = f.roles.size() == 3 && f.roles[1] == Role::MovableReceptacle;
    if (!f.implicit_receptacle.empty()) {
        holder = f.implicit_receptacle;
    } else if (with_movable) {
        holder = spec.params[1];
    } else if (f.roles.back() == Role::Receptacle) {
        holder = spec.params.back();
    }
    if (!holder.empty()) {
        for (std::size_t i = 0; i < spec.params.size(); ++i) {
            if (f.roles[i] == Role::Object && !can_place(kb, holder, spec.params[i])) {
                throw std::invalid_argument(spec.to_string() + ": " + holder + " cannot contain " + spec.params[i]);
            }
        }
    }
    if (with_movable && (!can_place(kb, spec.params[2], spec.params[1]) || kb.at(spec.params[2]).openable)) {
        throw std::invalid_argument(spec.to_string() + ": " + spec.params[2] + " cannot hold " + spec.params[1]);
    }
}

pddl::Goal TaskGoal::pddl_goal() const {
    pddl::Goal g;
    g.vars = vars;
    for (const auto& c : conditions) {
        for (const auto& l : c.literals) {
            if (std::find(g.conjunction.begin(), g.conjunction.end(), l) == g.conjunction.end()) {
                g.conjunction.push_back(l);
            }
        }
    }
    return g;
}

namespace {

const std::string kObj = "?goalObj";
const std::string kObj2 = "?goalObj2";
const std::string kRecep = "?goalReceptacle";
const std::string kMovable = "?goalMovable";
const std::string kLamp = "?goalLamp";
const std::string kLoc = "?goalLocation";

GoalCondition placed(const std::string& obj, const std::string& otype, const std::string& recep,
                     const std::string& rtype) {
    return {"placed " + otype + " in " + rtype,
            {pos("inReceptacle", {obj, recep}), pos("objectType", {obj, otype}), pos("receptacleType", {recep, rtype})}};
}

GoalCondition treated(const std::string& affordance, const std::string& obj, const std::string& otype) {
    static const std::vector<std::pair<std::string, std::string>> effect{
        {"canClean", "isCleaned"}, {"canHeat", "isHeated"}, {"canCool", "isCooled"}};
    for (const auto& [aff, pred] : effect) {
        if (aff == affordance) return {pred + " " + otype, {pos("objectType", {obj, otype}), pos(pred, {obj})}};
    }
    throw std::invalid_argument("no effect predicate for " + affordance);
}

}  // namespace

TaskGoal build_goal(const TaskSpec& spec) {
    const FamilyInfo& f = family_info(spec.family);
    if (spec.params.size() != f.roles.size()) {
        throw std::invalid_argument(spec.family + " expects " + std::to_string(f.roles.size()) + " parameters");
    }
    const auto& p = spec.params;
    TaskGoal g;
    const std::string& name = f.name;
    if (name == "pick_and_place_simple") {
        g.vars = {{kObj, "obj"}, {kRecep, "receptacle"}};
        g.conditions = {placed(kObj, p[0], kRecep, p[1])};
    } else if (name == "pick_two_obj_and_place") {
        g.vars = {{kObj, "obj"}, {kObj2, "obj"}, {kRecep, "receptacle"}};
        GoalCondition second = placed(kObj2, p[0], kRecep, p[1]);
        second.label = "second " + second.label;
        GoalCondition first = placed(kObj, p[0], kRecep, p[1]);
        second.literals.push_back(neg("=", {kObj, kObj2}));
        second.literals.insert(second.literals.end(), first.literals.begin(), first.literals.end());
        g.conditions = {first, second};
    } else if (name == "look_at_obj_in_light") {
        g.vars = {{kObj, "obj"}, {kLamp, "obj"}, {kLoc, "location"}};
        g.conditions = {
            {"holding " + p[0], {pos("holds", {kObj}), pos("objectType", {kObj, p[0]})}},
            {p[1] + " on at agent location",
             {pos("objectType", {kLamp, p[1]}), pos("isToggled", {kLamp}), pos("objectAtLocation", {kLamp, kLoc}),
              pos("atLocation", {"agent0", kLoc})}}};
    } else if (name == "pick_clean_then_place_in_recep" || name == "pick_heat_then_place_in_recep" ||
               name == "pick_cool_then_place_in_recep") {
        g.vars = {{kObj, "obj"}, {kRecep, "receptacle"}};
        g.conditions = {placed(kObj, p[0], kRecep, p[1]), treated(f.treatments.at(0), kObj, p[0])};
    } else if (name == "pick_and_place_with_movable_recep") {
        g.vars = {{kObj, "obj"}, {kMovable, "receptacle"}, {kRecep, "receptacle"}};
        GoalCondition moved{p[1] + " in " + p[2],
                            {pos("recepInReceptacle", {kMovable, kRecep}), pos("receptacleType", {kMovable, p[1]}),
                             pos("receptacleType", {kRecep, p[2]})}};
        g.conditions = {placed(kObj, p[0], kMovable, p[1]), moved};
    } else if (name == "pickup_and_place_two_objects") {
        g.vars = {{kObj, "obj"}, {kObj2, "obj"}, {kRecep, "receptacle"}};
        GoalCondition second = placed(kObj2, p[1], kRecep, p[2]);
        second.literals.push_back(neg("=", {kObj, kObj2}));
        g.conditions = {placed(kObj, p[0], kRecep, p[2]), second};
    } else if (name == "clean_and_heat" || name == "clean_and_cool" || name == "heat_and_cool") {
        g.vars = {{kObj, "obj"}};
        for (const auto& t : f.treatments) g.conditions.push_back(treated(t, kObj, p[0]));
    } else if (name == "pick_and_place_in_drawer") {
        g.vars = {{kObj, "obj"}, {kRecep, "receptacle"}};
        g.conditions = {placed(kObj, p[0], kRecep, f.implicit_receptacle)};
    } else {
        throw std::invalid_argument("no goal builder for family '" + name + "'");
    }
    return g;
}

std::size_t GoalStatus::satisfied() const {
    return static_cast<std::size_t>(std::count(conditions.begin(), conditions.end(), true));
}

GoalStatus evaluate_goal(const TaskGoal& goal, const std::vector<pddl::ObjectConst>& objects, const pddl::State& s) {
    GoalStatus st;
    const pddl::Goal joint = goal.pddl_goal();
    st.success = pddl::exists_binding(joint.vars, joint.conjunction, objects, s);
    for (const auto& c : goal.conditions) {
        std::set<std::string> used;
        for (const auto& l : c.literals) {
            for (const auto& a : l.args) {
                if (pddl::is_variable(a)) used.insert(a);
            }
        }
        std::vector<pddl::TypedParam> vars;
        for (const auto& v : goal.vars) {
            if (used.contains(v.name)) vars.push_back(v);
        }
        st.labels.push_back(c.label);
        st.conditions.push_back(st.success || pddl::exists_binding(vars, c.literals, objects, s));
    }
    return st;
}

}  // namespace egoplan::env
