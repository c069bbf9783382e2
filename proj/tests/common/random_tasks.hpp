#pragma once

// Random propositional tasks for oracle and property checks.

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>

#include "egoplan/pddl/grounding.hpp"
#include "egoplan/pddl/strips.hpp"

namespace testutil {

inline egoplan::pddl::GroundedTask random_task(std::uint64_t seed, std::size_t n_atoms = 10, std::size_t n_actions = 14) {
    using namespace egoplan::pddl;
    std::mt19937_64 rng(seed);
    auto coin = [&](unsigned den) { return rng() % den == 0; };
    GroundedTask t;
    for (std::size_t i = 0; i < n_atoms; ++i) {
        char name[8];
        std::snprintf(name, sizeof name, "p%02zu", i);
        t.atoms.push_back(GroundAtom{name, {}});
    }
    for (std::size_t i = 0; i < n_atoms; ++i) {
        if (coin(3)) t.init.push_back(static_cast<AtomId>(i));
    }
    for (std::size_t k = 0; k < n_actions; ++k) {
        IndexedAction a;
        a.schema = "a" + std::to_string(100 + k);
        std::set<AtomId> pp, pn, ad, de;
        for (std::size_t i = 0; i < n_atoms; ++i) {
            auto id = static_cast<AtomId>(i);
            if (coin(6)) pp.insert(id);
            else if (coin(12)) pn.insert(id);
            if (coin(5)) ad.insert(id);
            else if (coin(6)) de.insert(id);
        }
        a.pre_pos.assign(pp.begin(), pp.end());
        a.pre_neg.assign(pn.begin(), pn.end());
        a.add.assign(ad.begin(), ad.end());
        a.del.assign(de.begin(), de.end());
        t.actions.push_back(std::move(a));
    }
    std::set<AtomId> gp, gn;
    for (std::size_t i = 0; i < n_atoms; ++i) {
        if (coin(4)) gp.insert(static_cast<AtomId>(i));
        else if (coin(12)) gn.insert(static_cast<AtomId>(i));
    }
    t.goal_pos.assign(gp.begin(), gp.end());
    t.goal_neg.assign(gn.begin(), gn.end());
    return t;
}

/// Exhaustive shortest-plan length over explicit string states, independent
/// of the planner's encoding. nullopt when unsolvable.
inline std::optional<std::size_t> exhaustive_shortest(const egoplan::pddl::GroundedTask& t, std::size_t* n_states = nullptr) {
    using namespace egoplan::pddl;
    const GroundGoal g = t.goal();
    std::map<std::set<GroundAtom>, std::size_t> dist;
    std::deque<State> queue;
    State s0 = t.initial_state();
    dist[s0.atoms()] = 0;
    queue.push_back(s0);
    std::optional<std::size_t> best;
    while (!queue.empty()) {
        State s = queue.front();
        queue.pop_front();
        const std::size_t d = dist[s.atoms()];
        if (satisfies(s, g) && !best) best = d;
        for (std::size_t i = 0; i < t.actions.size(); ++i) {
            GroundAction a = t.action(i);
            if (!applicable(s, a)) continue;
            State n = apply(s, a);
            if (dist.emplace(n.atoms(), d + 1).second) queue.push_back(n);
        }
    }
    if (n_states) *n_states = dist.size();
    return best;
}

}  // namespace testutil
