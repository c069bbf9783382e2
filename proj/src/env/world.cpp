#include "egoplan/env/world.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <map>
#include <sstream>
#include <stdexcept>

namespace egoplan::env {

Cell Pose::ahead() const {
    switch (facing) {
        case Facing::North: return {cell.x, cell.y + 1};
        case Facing::East: return {cell.x + 1, cell.y};
        case Facing::South: return {cell.x, cell.y - 1};
        case Facing::West: return {cell.x - 1, cell.y};
    }
    return cell;
}

Pose Pose::rotated_left() const { return {cell, static_cast<Facing>((static_cast<int>(facing) + 3) % 4)}; }
Pose Pose::rotated_right() const { return {cell, static_cast<Facing>((static_cast<int>(facing) + 1) % 4)}; }

std::string pose_token(const Pose& p) {
    return "f" + std::to_string(p.cell.x) + "_" + std::to_string(p.cell.y) + "_" +
           std::to_string(static_cast<int>(p.facing)) + "f";
}

std::string cell_token(const Cell& c) { return pose_token({c, Facing::North}); }

std::optional<Pose> parse_pose_token(std::string_view t) {
    if (t.size() < 7 || t.front() != 'f' || t.back() != 'f') return std::nullopt;
    t = t.substr(1, t.size() - 2);
    int v[3];
    for (int i = 0; i < 3; ++i) {
        auto us = t.find('_');
        std::string_view part = i < 2 ? t.substr(0, us) : t;
        if (part.empty() || (i < 2 && us == std::string_view::npos)) return std::nullopt;
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v[i]);
        if (ec != std::errc{} || ptr != part.data() + part.size()) return std::nullopt;
        if (i < 2) t = t.substr(us + 1);
    }
    if (v[2] < 0 || v[2] > 3) return std::nullopt;
    return Pose{{v[0], v[1]}, static_cast<Facing>(v[2])};
}

std::vector<Cell> Scenario::free_cells() const {
    std::vector<Cell> out;
    for (int y = 0; y < height; ++y) {
        for (int x = 0; x < width; ++x) {
            if (free({x, y})) out.push_back({x, y});
        }
    }
    return out;
}

const EntitySpec* Scenario::find(std::string_view id) const {
    for (const auto& e : entities) {
        if (e.id == id) return &e;
    }
    return nullptr;
}

Cell Scenario::effective_cell(std::string_view id) const {
    const EntitySpec* e = find(id);
    for (std::size_t guard = 0; e && !e->container.empty(); ++guard) {
        if (guard > entities.size()) throw std::invalid_argument("containment cycle at '" + e->id + "'");
        e = find(e->container);
    }
    if (!e) throw std::invalid_argument("unknown entity '" + std::string(id) + "'");
    return e->cell;
}

void Scenario::validate() const {
    if (width < 1 || height < 1) throw std::invalid_argument("grid must be at least 1x1");
    if (!free(start.cell)) throw std::invalid_argument("start pose is not a free cell");
    std::set<std::string> ids;
    for (const auto& e : entities) {
        if (e.id.empty() || !ids.insert(e.id).second) throw std::invalid_argument("duplicate entity id '" + e.id + "'");
        kb.at(e.subtype);
        for (const auto& p : e.props) {
            if (std::find(property_names().begin(), property_names().end(), p) == property_names().end()) {
                throw std::invalid_argument("unknown property '" + p + "' on " + e.id);
            }
        }
    }
    // Reachability over free cells from the start.
    std::set<Cell> seen{start.cell};
    std::deque<Cell> q{start.cell};
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}}) {
            if (free(n) && seen.insert(n).second) q.push_back(n);
        }
    }
    for (const auto& e : entities) {
        const SubtypeInfo& s = kb.at(e.subtype);
        if (!e.container.empty()) {
            const EntitySpec* c = find(e.container);
            if (!c) throw std::invalid_argument(e.id + ": unknown container '" + e.container + "'");
            if (kb.at(c->subtype).kind != EntityKind::Receptacle) {
                throw std::invalid_argument(e.id + ": container " + c->id + " is not a receptacle");
            }
            if (!kb.holds("canContain", c->subtype, e.subtype)) {
                throw std::invalid_argument(c->subtype + " cannot contain " + e.subtype);
            }
            if (s.kind == EntityKind::Receptacle && !s.movable) {
                throw std::invalid_argument(e.id + ": only movable receptacles can be contained");
            }
        }
        Cell cell = effective_cell(e.id);
        if (!free(cell)) throw std::invalid_argument(e.id + " is not on a free cell");
        if (!seen.contains(cell)) throw std::invalid_argument(e.id + " is unreachable from the start");
    }
}

namespace {

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
    throw std::invalid_argument("scenario line " + std::to_string(line) + ": " + msg);
}

int to_int(const std::string& s, std::size_t line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) fail(line, "expected integer, got '" + s + "'");
    return v;
}

std::set<std::string> split_props(const std::string& s) {
    std::set<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.insert(item);
    }
    return out;
}

}  // namespace

EnvTask parse_scenario(std::string_view text) {
    EnvTask t;
    Scenario& sc = t.scenario;
    std::istringstream in{std::string(text)};
    std::string raw;
    std::size_t line = 0;
    bool header = false;
    bool have_grid = false;
    std::vector<std::tuple<std::string, std::string, std::string, std::size_t>> affordances;
    while (std::getline(in, raw)) {
        ++line;
        if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
        std::istringstream ls(raw);
        std::vector<std::string> w;
        for (std::string tok; ls >> tok;) w.push_back(tok);
        if (w.empty()) continue;
        if (!header) {
            if (w.size() != 2 || w[0] != "egoplan-scenario" || w[1] != "v1") fail(line, "expected 'egoplan-scenario v1'");
            header = true;
            continue;
        }
        const std::string& k = w[0];
        auto need = [&](std::size_t lo, std::size_t hi) {
            if (w.size() < lo || w.size() > hi) fail(line, "wrong number of fields for '" + k + "'");
        };
        if (k == "seed") {
            need(2, 2);
            try {
                sc.seed = std::stoull(w[1]);
            } catch (const std::exception&) {
                fail(line, "bad seed");
            }
        } else if (k == "grid") {
            need(3, 3);
            sc.width = to_int(w[1], line);
            sc.height = to_int(w[2], line);
            have_grid = true;
        } else if (k == "start") {
            need(4, 4);
            int f = to_int(w[3], line);
            if (f < 0 || f > 3) fail(line, "facing must be 0..3");
            sc.start = {{to_int(w[1], line), to_int(w[2], line)}, static_cast<Facing>(f)};
        } else if (k == "wall") {
            need(3, 3);
            sc.walls.insert({to_int(w[1], line), to_int(w[2], line)});
        } else if (k == "subtype") {
            need(3, 6);
            SubtypeInfo s;
            s.name = w[1];
            if (w[2] == "object") {
                s.kind = EntityKind::Object;
            } else if (w[2] == "receptacle") {
                s.kind = EntityKind::Receptacle;
            } else {
                fail(line, "subtype kind must be object or receptacle");
            }
            for (std::size_t i = 3; i < w.size(); ++i) {
                if (w[i] == "openable") {
                    s.openable = true;
                } else if (w[i] == "movable") {
                    s.movable = true;
                } else if (w[i] == "toggleable") {
                    s.toggleable = true;
                } else {
                    fail(line, "unknown subtype flag '" + w[i] + "'");
                }
            }
            sc.kb.add_subtype(s);
        } else if (k == "affordance") {
            need(4, 4);
            affordances.emplace_back(w[1], w[2], w[3], line);
        } else if (k == "entity") {
            // entity <id> <subtype> (<x> <y> | in <container>) [props a,b]
            if (w.size() < 5) fail(line, "entity needs a position");
            EntitySpec e;
            e.id = w[1];
            e.subtype = w[2];
            if (w[3] == "in") {
                e.container = w[4];
            } else {
                e.cell = {to_int(w[3], line), to_int(w[4], line)};
            }
            if (const std::size_t i = 5; i < w.size()) {
                if (w[i] != "props" || i + 2 != w.size()) fail(line, "expected 'props a,b'");
                e.props = split_props(w[i + 1]);
            }
            sc.entities.push_back(std::move(e));
        } else if (k == "goal") {
            need(2, 8);
            std::string spec = w[1];
            for (std::size_t i = 2; i < w.size(); ++i) spec += (i == 2 ? ":" : ",") + w[i];
            try {
                t.task = TaskSpec::parse(spec);
            } catch (const std::exception& e) {
                fail(line, e.what());
            }
        } else {
            fail(line, "unknown record '" + k + "'");
        }
    }
    if (!header) fail(line + 1, "missing header");
    if (!have_grid) fail(line, "missing grid record");
    for (const auto& [rel, a, b, l] : affordances) {
        try {
            sc.kb.add_affordance(rel, a, b);
        } catch (const std::exception& e) {
            fail(l, e.what());
        }
    }
    sc.validate();
    if (!t.task.family.empty()) validate_task(t.task, sc.kb);
    return t;
}

std::string print_scenario(const EnvTask& t) {
    const Scenario& sc = t.scenario;
    std::ostringstream out;
    out << "egoplan-scenario v1\n";
    out << "seed " << sc.seed << "\n";
    out << "grid " << sc.width << " " << sc.height << "\n";
    out << "start " << sc.start.cell.x << " " << sc.start.cell.y << " " << static_cast<int>(sc.start.facing) << "\n";
    for (const auto& w : sc.walls) out << "wall " << w.x << " " << w.y << "\n";
    for (const auto* s : sc.kb.subtypes()) {
        out << "subtype " << s->name << (s->kind == EntityKind::Object ? " object" : " receptacle");
        if (s->openable) out << " openable";
        if (s->movable) out << " movable";
        if (s->toggleable) out << " toggleable";
        out << "\n";
    }
    for (const auto& a : sc.kb.affordances()) out << "affordance " << a.relation << " " << a.actor << " " << a.target << "\n";
    for (const auto& e : sc.entities) {
        out << "entity " << e.id << " " << e.subtype;
        if (!e.container.empty()) {
            out << " in " << e.container;
        } else {
            out << " " << e.cell.x << " " << e.cell.y;
        }
        if (!e.props.empty()) {
            out << " props ";
            bool first = true;
            for (const auto& p : e.props) {
                out << (first ? "" : ",") << p;
                first = false;
            }
        }
        out << "\n";
    }
    if (!t.task.family.empty()) {
        out << "goal " << t.task.family;
        for (const auto& p : t.task.params) out << " " << p;
        out << "\n";
    }
    return out.str();
}

}  // namespace egoplan::env
