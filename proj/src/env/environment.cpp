#include "egoplan/env/environment.hpp"

#include <algorithm>
#include <json.hpp>
#include <stdexcept>

namespace egoplan::env {

namespace {

struct KindName {
    ActionKind kind;
    const char* name;
    bool parametric;
};

constexpr KindName kKinds[] = {
    {ActionKind::MoveAhead, "MoveAhead", false}, {ActionKind::RotateLeft, "RotateLeft", false},
    {ActionKind::RotateRight, "RotateRight", false}, {ActionKind::Pickup, "Pickup", true},
    {ActionKind::Put, "Put", true}, {ActionKind::ToggleOn, "ToggleOn", true},
    {ActionKind::HeatIn, "HeatIn", true}, {ActionKind::CoolIn, "CoolIn", true},
    {ActionKind::CleanIn, "CleanIn", true}, {ActionKind::Slice, "Slice", true},
};

const char* treatment_property(ActionKind k) {
    switch (k) {
        case ActionKind::HeatIn: return "isHeated";
        case ActionKind::CoolIn: return "isCooled";
        case ActionKind::CleanIn: return "isCleaned";
        default: return nullptr;
    }
}

const char* treatment_relation(ActionKind k) {
    switch (k) {
        case ActionKind::HeatIn: return "canHeat";
        case ActionKind::CoolIn: return "canCool";
        case ActionKind::CleanIn: return "canClean";
        default: return nullptr;
    }
}

}  // namespace

bool EnvAction::is_movement() const {
    return kind == ActionKind::MoveAhead || kind == ActionKind::RotateLeft || kind == ActionKind::RotateRight;
}

std::string EnvAction::to_string() const {
    for (const auto& k : kKinds) {
        if (k.kind == kind) return k.parametric ? std::string(k.name) + "(" + target + ")" : std::string(k.name);
    }
    return "?";
}

EnvAction EnvAction::parse(std::string_view text) {
    auto open = text.find('(');
    std::string_view head = text.substr(0, open);
    for (const auto& k : kKinds) {
        if (head != k.name) continue;
        if (!k.parametric) {
            if (open != std::string_view::npos) break;
            return {k.kind, {}};
        }
        if (open == std::string_view::npos || text.back() != ')' || text.size() < open + 3) break;
        return {k.kind, std::string(text.substr(open + 1, text.size() - open - 2))};
    }
    throw std::invalid_argument("malformed env action '" + std::string(text) + "'");
}

std::vector<std::string> Perception::ids() const {
    std::vector<std::string> out;
    for (const auto& e : entities) out.push_back(e.id);
    return out;
}

std::string step_record_json(const StepRecord& r) {
    nlohmann::ordered_json j;
    j["t"] = r.t;
    j["action"] = r.action;
    j["failed"] = r.failed;
    j["cost"] = r.cost;
    j["perceived_ids"] = r.perceived_ids;
    return j.dump();
}

const std::vector<std::string>& entity_predicates() {
    static const std::vector<std::string> p{
        "objectType",    "receptacleType",   "objectAtLocation", "receptacleAtLocation", "inReceptacle",
        "isInReceptacle", "recepInReceptacle", "isRecepInReceptacle", "holds", "holdsReceptacle",
        "isHeated",      "isCooled",         "isCleaned",        "isSliced",             "isToggled",
        "canToggle",     "isMovableReceptacle"};
    return p;
}

std::vector<pddl::GroundAtom> entity_atoms(const PerceivedEntity& e, const Knowledge& kb) {
    using pddl::atom;
    const SubtypeInfo& s = kb.at(e.subtype);
    std::vector<pddl::GroundAtom> out;
    if (e.kind == EntityKind::Object) {
        out.push_back(atom("objectType", {e.id, e.subtype}));
        if (!e.location.empty()) out.push_back(atom("objectAtLocation", {e.id, e.location}));
        if (!e.container.empty()) {
            out.push_back(atom("inReceptacle", {e.id, e.container}));
            out.push_back(atom("isInReceptacle", {e.id}));
        }
        if (e.held) out.push_back(atom("holds", {e.id}));
        for (const auto& p : e.props) {
            if (p != "open") out.push_back(atom(p, {e.id}));
        }
        if (s.toggleable) out.push_back(atom("canToggle", {e.id}));
    } else {
        out.push_back(atom("receptacleType", {e.id, e.subtype}));
        if (!e.location.empty()) out.push_back(atom("receptacleAtLocation", {e.id, e.location}));
        if (!e.container.empty()) {
            out.push_back(atom("recepInReceptacle", {e.id, e.container}));
            out.push_back(atom("isRecepInReceptacle", {e.id}));
        }
        if (e.held) out.push_back(atom("holdsReceptacle", {e.id}));
        if (s.movable) out.push_back(atom("isMovableReceptacle", {e.id}));
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PerceivedEdge> cell_edges(const Scenario& sc, const Cell& c) {
    std::vector<PerceivedEdge> out;
    for (int f = 0; f < 4; ++f) {
        Pose p{c, static_cast<Facing>(f)};
        const std::string from = pose_token(p);
        out.push_back({from, pose_token(p.rotated_left()), kRotateLeft});
        out.push_back({from, pose_token(p.rotated_right()), kRotateRight});
        if (sc.free(p.ahead())) out.push_back({from, pose_token({p.ahead(), p.facing}), kMoveAhead});
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<PerceivedEdge> perceived_edges(const Scenario& sc, const Pose& pose) {
    std::vector<PerceivedEdge> out = cell_edges(sc, pose.cell);
    for (int f = 0; f < 4; ++f) {
        Pose out_pose{pose.cell, static_cast<Facing>(f)};
        const Cell n = out_pose.ahead();
        if (!sc.free(n)) continue;
        for (const auto& e : cell_edges(sc, n)) {
            if (e.label != kMoveAhead) out.push_back(e);
        }
        // The way back from the neighbour.
        Pose back{n, out_pose.rotated_left().rotated_left().facing};
        out.push_back({pose_token(back), pose_token({pose.cell, back.facing}), kMoveAhead});
    }
    std::sort(out.begin(), out.end());
    return out;
}

Environment::Environment(EnvTask task, FaultConfig faults) : task_(std::move(task)), faults_(faults) {
    task_.scenario.validate();
    if (!task_.task.family.empty()) validate_task(task_.task, task_.scenario.kb);
    if (faults_.rate < 0.0 || faults_.rate > 1.0) throw std::invalid_argument("fault rate must be in [0,1]");
    reset();
}

Perception Environment::reset() {
    pose_ = task_.scenario.start;
    entities_ = task_.scenario.entities;
    held_.clear();
    failures_ = steps_ = injected_ = 0;
    hard_failed_ = false;
    trace_.clear();
    fault_rng_.seed(faults_.seed);
    return perceive(false);
}

EntitySpec* Environment::find(std::string_view id) {
    for (auto& e : entities_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

const EntitySpec* Environment::find(std::string_view id) const {
    for (const auto& e : entities_) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

bool Environment::carried(const EntitySpec& e) const {
    const EntitySpec* cur = &e;
    while (cur) {
        if (cur->id == held_) return true;
        if (cur->container.empty()) return false;
        cur = find(cur->container);
    }
    return false;
}

Cell Environment::cell_of(const EntitySpec& e) const {
    if (carried(e)) return pose_.cell;
    const EntitySpec* cur = &e;
    while (!cur->container.empty()) cur = find(cur->container);
    return cur->cell;
}

bool Environment::hidden(const EntitySpec& e) const {
    const EntitySpec* cur = &e;
    while (!cur->container.empty()) {
        cur = find(cur->container);
        if (task_.scenario.kb.at(cur->subtype).openable && !cur->props.contains("open")) return true;
    }
    return false;
}

bool Environment::at_agent(const EntitySpec& e) const {
    return !carried(e) && !hidden(e) && cell_of(e) == pose_.cell;
}

std::vector<std::string> Environment::visible_entities() const {
    const Cell here = pose_.cell;
    const Cell ahead = pose_.ahead();
    std::vector<std::string> out;
    for (const auto& e : entities_) {
        if (hidden(e)) continue;
        Cell c = cell_of(e);
        if (carried(e) || c == here || c == ahead) out.push_back(e.id);
    }
    std::sort(out.begin(), out.end());
    return out;
}

PerceivedEntity Environment::view(const EntitySpec& e) const {
    PerceivedEntity v;
    v.id = e.id;
    v.subtype = e.subtype;
    v.kind = task_.scenario.kb.at(e.subtype).kind;
    v.props = e.props;
    v.container = e.container;
    v.held = e.id == held_;
    if (!carried(e)) v.location = cell_token(cell_of(e));
    return v;
}

Perception Environment::perceive(bool failed) const {
    Perception p;
    p.failed = failed;
    p.agent_location = pose_token(pose_);
    p.edges = perceived_edges(task_.scenario, pose_);
    for (const auto& id : visible_entities()) p.entities.push_back(view(*find(id)));
    p.held = held_;
    return p;
}

bool Environment::inject_fault() {
    if (injected_ >= faults_.shots || faults_.rate <= 0.0) return false;
    const double u = static_cast<double>(fault_rng_() >> 11) * 0x1.0p-53;
    if (u >= faults_.rate) return false;
    ++injected_;
    return true;
}

bool Environment::attempt(const EnvAction& a) {
    const Knowledge& kb = task_.scenario.kb;
    switch (a.kind) {
        case ActionKind::MoveAhead: {
            if (!task_.scenario.free(pose_.ahead())) return false;
            pose_.cell = pose_.ahead();
            return true;
        }
        case ActionKind::RotateLeft: pose_ = pose_.rotated_left(); return true;
        case ActionKind::RotateRight: pose_ = pose_.rotated_right(); return true;
        default: break;
    }
    EntitySpec* target = find(a.target);
    if (!target || !at_agent(*target)) return false;
    const SubtypeInfo& ts = kb.at(target->subtype);
    EntitySpec* held = held_.empty() ? nullptr : find(held_);
    const SubtypeInfo* hs = held ? &kb.at(held->subtype) : nullptr;

    switch (a.kind) {
        case ActionKind::Pickup: {
            if (held || (ts.kind == EntityKind::Receptacle && !ts.movable)) return false;
            if (inject_fault()) return false;
            target->cell = cell_of(*target);
            target->container.clear();
            held_ = target->id;
            return true;
        }
        case ActionKind::Put: {
            if (!held || ts.kind != EntityKind::Receptacle || !kb.holds("canContain", target->subtype, held->subtype)) {
                return false;
            }
            if (hs->kind == EntityKind::Receptacle && ts.openable) return false;
            if (inject_fault()) return false;
            held->container = target->id;
            held->cell = cell_of(*target);
            held_.clear();
            if (ts.openable) target->props.insert("open");
            return true;
        }
        case ActionKind::ToggleOn: {
            if (!ts.toggleable || target->props.contains("isToggled")) return false;
            if (inject_fault()) return false;
            target->props.insert("isToggled");
            return true;
        }
        case ActionKind::HeatIn:
        case ActionKind::CoolIn:
        case ActionKind::CleanIn: {
            if (!held || hs->kind != EntityKind::Object || ts.kind != EntityKind::Receptacle) return false;
            if (!kb.holds(treatment_relation(a.kind), target->subtype, held->subtype)) return false;
            if (inject_fault()) return false;
            held->props.insert(treatment_property(a.kind));
            if (ts.openable) target->props.insert("open");
            return true;
        }
        case ActionKind::Slice: {
            if (!held || hs->kind != EntityKind::Object || ts.kind != EntityKind::Object) return false;
            if (!kb.holds("canSlice", held->subtype, target->subtype) || target->props.contains("isSliced")) return false;
            if (inject_fault()) return false;
            target->props.insert("isSliced");
            return true;
        }
        default: return false;
    }
}

std::pair<Perception, double> Environment::step(const EnvAction& a) {
    constexpr double kCost = 1.0;
    StepRecord rec{trace_.size(), a.to_string(), true, kCost, {}};
    if (hard_failed_) {
        Perception p = perceive(true);
        rec.perceived_ids = p.ids();
        trace_.push_back(std::move(rec));
        return {std::move(p), kCost};
    }
    ++steps_;
    const bool ok = attempt(a);
    if (!ok) ++failures_;
    if (failures_ >= kDefaultFailureLimit || steps_ >= kDefaultStepLimit) hard_failed_ = true;
    Perception p = perceive(!ok);
    rec.failed = !ok;
    rec.perceived_ids = p.ids();
    trace_.push_back(std::move(rec));
    return {std::move(p), kCost};
}

pddl::Problem Environment::full_problem() const {
    using pddl::atom;
    const Scenario& sc = task_.scenario;
    pddl::Problem prob;
    prob.name = "hidden_state";
    prob.domain_name = "alfred_task";
    prob.objects.push_back({"agent0", "agent"});
    std::set<pddl::GroundAtom> init;
    for (const Cell& c : sc.free_cells()) {
        for (int f = 0; f < 4; ++f) prob.objects.push_back({pose_token({c, static_cast<Facing>(f)}), "location"});
        for (const auto& e : cell_edges(sc, c)) init.insert(atom("conn", {e.from, e.to, e.label}));
    }
    for (const auto& e : entities_) {
        prob.objects.push_back({e.id, sc.kb.at(e.subtype).kind == EntityKind::Object ? "obj" : "receptacle"});
        for (auto& a : entity_atoms(view(e), sc.kb)) init.insert(std::move(a));
    }
    for (auto& o : sc.kb.itemtype_objects()) prob.objects.push_back(std::move(o));
    for (const char* m : {kMoveAhead, kRotateLeft, kRotateRight}) {
        prob.objects.push_back({m, "movement"});
        init.insert(atom("move", {m}));
    }
    for (auto& a : sc.kb.static_atoms()) init.insert(std::move(a));
    init.insert(atom("atLocation", {"agent0", pose_token(pose_)}));
    if (!held_.empty()) init.insert(atom("holdsAny"));
    prob.init = pddl::State(std::move(init));
    if (!task_.task.family.empty()) prob.goal = build_goal(task_.task).pddl_goal();
    return prob;
}

GoalStatus Environment::goal_check() const {
    if (task_.task.family.empty()) throw std::logic_error("environment has no task goal");
    pddl::Problem prob = full_problem();
    return evaluate_goal(build_goal(task_.task), prob.objects, prob.init);
}

}  // namespace egoplan::env
