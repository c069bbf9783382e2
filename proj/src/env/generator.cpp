#include "egoplan/env/generator.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <map>
#include <stdexcept>

#include "egoplan/agent/domain.hpp"
#include "egoplan/env/environment.hpp"
#include "egoplan/pddl/grounding.hpp"

namespace egoplan::env {

std::size_t Rng::below(std::size_t n) {
    if (n == 0) throw std::invalid_argument("Rng::below(0)");
    // Rejection sampling keeps the draw unbiased.
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t v;
    do {
        v = eng_();
    } while (v >= limit);
    return static_cast<std::size_t>(v % n);
}

int Rng::between(int lo, int hi) { return lo + static_cast<int>(below(static_cast<std::size_t>(hi - lo + 1))); }

bool Rng::chance(double p) { return static_cast<double>(eng_() >> 11) * 0x1.0p-53 < p; }

namespace {

std::vector<std::string> role_candidates(Role role, const Knowledge& kb) {
    std::vector<std::string> out;
    for (const auto* s : kb.subtypes()) {
        bool ok = false;
        switch (role) {
            case Role::Object: ok = s->kind == EntityKind::Object && !s->toggleable; break;
            case Role::Lamp: ok = s->kind == EntityKind::Object && s->toggleable; break;
            case Role::Receptacle: ok = s->kind == EntityKind::Receptacle && !s->movable; break;
            case Role::MovableReceptacle: ok = s->kind == EntityKind::Receptacle && s->movable; break;
        }
        if (ok) out.push_back(s->name);
    }
    return out;
}

bool connected(const Scenario& sc) {
    auto cells = sc.free_cells();
    if (cells.empty()) return false;
    std::set<Cell> seen{cells.front()};
    std::deque<Cell> q{cells.front()};
    while (!q.empty()) {
        Cell c = q.front();
        q.pop_front();
        for (Cell n : {Cell{c.x + 1, c.y}, Cell{c.x - 1, c.y}, Cell{c.x, c.y + 1}, Cell{c.x, c.y - 1}}) {
            if (sc.free(n) && seen.insert(n).second) q.push_back(n);
        }
    }
    return seen.size() == cells.size();
}

class Builder {
public:
    Builder(Scenario& sc, Rng& rng) : sc_(sc), rng_(rng) {}

    std::string next_id(const std::string& subtype) {
        std::string base = subtype.substr(0, subtype.size() - 4);
        std::transform(base.begin(), base.end(), base.begin(), [](unsigned char c) { return std::tolower(c); });
        return base + std::to_string(++counters_[base]);
    }

    /// Receptacles get their own cell while unused cells remain.
    const EntitySpec& place_floor_receptacle(const std::string& subtype) {
        std::vector<Cell> cells;
        for (const Cell& c : sc_.free_cells()) {
            if (!used_.contains(c)) cells.push_back(c);
        }
        if (cells.empty()) throw std::invalid_argument("not enough free cells for the receptacles");
        Cell c = rng_.pick(cells);
        used_.insert(c);
        sc_.entities.push_back({next_id(subtype), subtype, c, "", {}});
        return sc_.entities.back();
    }

    void place_on_floor(const std::string& subtype) {
        sc_.entities.push_back({next_id(subtype), subtype, rng_.pick(sc_.free_cells()), "", {}});
    }

    /// Floor or one of the receptacles accepted by `allow`.
    template <typename Allow>
    void place_anywhere(const std::string& subtype, double floor_chance, Allow allow) {
        std::vector<std::string> hosts;
        for (const auto& e : sc_.entities) {
            const SubtypeInfo& s = sc_.kb.at(e.subtype);
            if (s.kind == EntityKind::Receptacle && !s.movable && sc_.kb.holds("canContain", e.subtype, subtype) &&
                allow(s)) {
                hosts.push_back(e.id);
            }
        }
        if (hosts.empty() || rng_.chance(floor_chance)) {
            place_on_floor(subtype);
            return;
        }
        const std::string host = rng_.pick(hosts);
        sc_.entities.push_back({next_id(subtype), subtype, Cell{}, host, {}});
    }

private:
    Scenario& sc_;
    Rng& rng_;
    std::map<std::string, int> counters_;
    std::set<Cell> used_;
};

Scenario draw_scenario(std::uint64_t seed, const TaskSpec& spec, const GeneratorConfig& cfg, const Knowledge& kb,
                       Rng& rng) {
    const FamilyInfo& f = family_info(spec.family);
    Scenario sc;
    sc.seed = seed;
    sc.width = cfg.width;
    sc.height = cfg.height;

    std::vector<Cell> all;
    for (int y = 0; y < cfg.height; ++y) {
        for (int x = 0; x < cfg.width; ++x) all.push_back({x, y});
    }
    rng.shuffle(all);
    const auto n_walls = static_cast<std::size_t>(cfg.wall_fraction * static_cast<double>(all.size()));
    for (const Cell& c : all) {
        if (sc.walls.size() >= n_walls) break;
        sc.walls.insert(c);
        if (!connected(sc)) sc.walls.erase(c);
    }
    sc.start = {rng.pick(sc.free_cells()), static_cast<Facing>(rng.below(4))};

    // Knowledge restricted to what the scenario mentions happens at the end;
    // placement consults the full table.
    sc.kb = kb;
    Builder b(sc, rng);

    std::string holder;  // goal receptacle subtype, if any
    if (!f.implicit_receptacle.empty()) {
        holder = f.implicit_receptacle;
    } else if (f.roles.back() == Role::Receptacle) {
        holder = spec.params.back();
    }
    const int holder_copies = f.roles.back() == Role::Receptacle ? f.copies.back() : 1;
    if (!holder.empty()) {
        for (int i = 0; i < holder_copies; ++i) b.place_floor_receptacle(holder);
    }
    std::set<std::string> actors;
    for (const auto& t : f.treatments) {
        auto options = kb.actors(t, spec.params[0]);
        std::sort(options.begin(), options.end());
        std::string a = rng.pick(options);
        if (a != holder && actors.insert(a).second) b.place_floor_receptacle(a);
    }
    auto receptacle_pool = role_candidates(Role::Receptacle, kb);
    for (int i = 0; i < cfg.distractor_receptacles; ++i) b.place_floor_receptacle(rng.pick(receptacle_pool));

    auto visible_host = [&](const SubtypeInfo& s) { return !s.openable && s.name != holder; };
    for (std::size_t i = 0; i < f.roles.size(); ++i) {
        const std::string& p = spec.params[i];
        switch (f.roles[i]) {
            case Role::Object:
                for (int c = 0; c < f.copies[i]; ++c) b.place_anywhere(p, 0.4, visible_host);
                break;
            case Role::MovableReceptacle: b.place_anywhere(p, 0.5, visible_host); break;
            case Role::Lamp: b.place_on_floor(p); break;
            case Role::Receptacle: break;
        }
    }

    std::vector<std::string> goal_subtypes(spec.params.begin(), spec.params.end());
    auto object_pool = role_candidates(Role::Object, kb);
    for (int i = 0; i < cfg.distractor_objects; ++i) {
        const std::string s = rng.pick(object_pool);
        const bool goal_like = std::find(goal_subtypes.begin(), goal_subtypes.end(), s) != goal_subtypes.end();
        b.place_anywhere(s, 0.3, [&](const SubtypeInfo& h) { return !goal_like || h.name != holder; });
    }

    // Keep only the knowledge the scenario uses.
    std::set<std::string> used(goal_subtypes.begin(), goal_subtypes.end());
    if (!holder.empty()) used.insert(holder);
    for (const auto& e : sc.entities) used.insert(e.subtype);
    Knowledge small;
    for (const auto& name : used) small.add_subtype(kb.at(name));
    for (const auto& a : kb.affordances()) {
        if (used.contains(a.actor) && used.contains(a.target)) small.add_affordance(a.relation, a.actor, a.target);
    }
    sc.kb = std::move(small);
    return sc;
}

}  // namespace

TaskSpec sample_task(const std::string& family, Rng& rng, const Knowledge& kb) {
    const FamilyInfo& f = family_info(family);
    std::vector<std::vector<std::string>> pools;
    for (Role r : f.roles) pools.push_back(role_candidates(r, kb));
    for (int tries = 0; tries < 10000; ++tries) {
        TaskSpec spec{family, {}};
        for (const auto& pool : pools) {
            if (pool.empty()) throw std::invalid_argument(family + ": knowledge base lacks a subtype for some role");
            spec.params.push_back(rng.pick(pool));
        }
        try {
            validate_task(spec, kb);
            return spec;
        } catch (const std::invalid_argument&) {
        }
    }
    throw std::invalid_argument("no valid parameters for " + family);
}

EnvTask generate_scenario(std::uint64_t seed, const TaskSpec& spec_in, const GeneratorConfig& cfg, const Knowledge& kb) {
    if (cfg.width < 2 || cfg.height < 2) throw std::invalid_argument("grid must be at least 2x2");
    if (cfg.wall_fraction < 0.0 || cfg.wall_fraction >= 1.0) throw std::invalid_argument("wall fraction must be in [0,1)");
    if (cfg.distractor_objects < 0 || cfg.distractor_receptacles < 0) {
        throw std::invalid_argument("distractor counts must be non-negative");
    }
    Rng rng(seed);
    TaskSpec spec = spec_in;
    if (spec.params.empty()) {
        spec = sample_task(spec.family, rng, kb);
    } else {
        validate_task(spec, kb);
    }
    std::string last_error = "no attempt made";
    for (int attempt = 0; attempt < cfg.max_attempts; ++attempt) {
        EnvTask task{draw_scenario(seed, spec, cfg, kb, rng), spec};
        try {
            task.scenario.validate();
        } catch (const std::invalid_argument& e) {
            last_error = e.what();
            continue;
        }
        Environment env(task);
        if (env.goal_check().success) {
            last_error = "goal already satisfied";
            continue;
        }
        if (cfg.check_solvable) {
            const pddl::Problem prob = env.full_problem();
            auto grounded = pddl::ground(agent::runtime_domain(), prob);
            if (!planner::solve_gbfs(grounded, cfg.budget).found()) {
                last_error = "no plan on the fully observable problem";
                continue;
            }
        }
        return task;
    }
    throw std::invalid_argument("could not generate " + spec.to_string() + ": " + last_error);
}

}  // namespace egoplan::env
