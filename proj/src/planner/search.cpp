#include "egoplan/planner/search.hpp"

#include <algorithm>
#include <queue>
#include <tuple>

#include "compiled.hpp"
#include "egoplan/pddl/strips.hpp"

namespace egoplan::planner {

using detail::CompiledTask;
using detail::StateRegistry;
using detail::Word;

std::string to_string(Outcome o) {
    switch (o) {
        case Outcome::PlanFound:
            return "plan_found";
        case Outcome::Unsolvable:
            return "unsolvable";
        case Outcome::BudgetExhausted:
            return "budget_exhausted";
    }
    return "unknown";
}

std::size_t Plan::length() const {
    return static_cast<std::size_t>(
        std::count_if(steps.begin(), steps.end(), [](const pddl::GroundAction& a) { return !a.synthetic; }));
}

namespace {

using Clock = std::chrono::steady_clock;

constexpr std::uint32_t kNoParent = 0xffffffffU;

class SearchSpace {
public:
    explicit SearchSpace(const CompiledTask& task) : task_(task), registry_(task.words()) {}

    std::pair<std::uint32_t, bool> add(const Word* s, std::uint32_t parent, std::uint32_t action) {
        auto res = registry_.insert(s);
        if (res.second) {
            parent_.push_back(parent);
            via_.push_back(action);
        }
        return res;
    }

    const Word* state(std::uint32_t id) const { return registry_.get(id); }
    std::size_t size() const { return registry_.size(); }

    void extract(std::uint32_t goal, const pddl::GroundedTask& task, SearchResult& out) const {
        std::vector<std::uint32_t> chain;
        for (std::uint32_t id = goal; parent_[id] != kNoParent; id = parent_[id]) chain.push_back(via_[id]);
        std::reverse(chain.begin(), chain.end());
        Plan plan;
        for (auto ca : chain) {
            const std::size_t ti = task_.actions()[ca].task_index;
            out.action_indices.push_back(ti);
            plan.steps.push_back(task.action(ti));
        }
        out.plan = std::move(plan);
    }

private:
    const CompiledTask& task_;
    StateRegistry registry_;
    std::vector<std::uint32_t> parent_;
    std::vector<std::uint32_t> via_;
};

class Limits {
public:
    explicit Limits(const Budget& b) : budget_(b), start_(Clock::now()) {}

    bool exceeded(std::uint64_t expanded) const {
        if (expanded >= budget_.max_nodes) return true;
        if ((expanded & 255U) == 0 && expanded > 0) {
            return Clock::now() - start_ > budget_.max_time;
        }
        return false;
    }

    double elapsed_ms() const {
        return std::chrono::duration<double, std::milli>(Clock::now() - start_).count();
    }

private:
    Budget budget_;
    Clock::time_point start_;
};

SearchResult finish(SearchResult r, Outcome o, const Limits& limits) {
    r.stats.result = o;
    r.stats.wall_ms = limits.elapsed_ms();
    return r;
}

}  // namespace

SearchResult solve_bfs(const pddl::GroundedTask& task, const Budget& budget) {
    Limits limits(budget);
    SearchResult result;
    CompiledTask ct(task);
    if (ct.goal_impossible()) return finish(std::move(result), Outcome::Unsolvable, limits);
    SearchSpace space(ct);
    space.add(ct.init().data(), kNoParent, 0);
    if (ct.is_goal(ct.init().data())) {
        result.plan = Plan{};
        return finish(std::move(result), Outcome::PlanFound, limits);
    }
    std::vector<std::uint32_t> succ;
    std::vector<Word> buf(ct.words());
    // Registry ids are assigned in generation order, so they double as the FIFO queue.
    for (std::uint32_t next = 0; next < space.size(); ++next) {
        if (limits.exceeded(result.stats.expanded)) return finish(std::move(result), Outcome::BudgetExhausted, limits);
        ++result.stats.expanded;
        ct.successors(space.state(next), succ);
        for (auto ai : succ) {
            ct.apply(space.state(next), ct.actions()[ai], buf.data());
            auto [id, fresh] = space.add(buf.data(), next, ai);
            if (!fresh) continue;
            ++result.stats.generated;
            if (ct.is_goal(buf.data())) {
                space.extract(id, task, result);
                return finish(std::move(result), Outcome::PlanFound, limits);
            }
        }
    }
    return finish(std::move(result), Outcome::Unsolvable, limits);
}

SearchResult solve_gbfs(const pddl::GroundedTask& task, const Budget& budget) {
    Limits limits(budget);
    SearchResult result;
    CompiledTask ct(task);
    if (ct.goal_impossible()) return finish(std::move(result), Outcome::Unsolvable, limits);
    SearchSpace space(ct);
    detail::AdditiveHeuristic h(ct);
    space.add(ct.init().data(), kNoParent, 0);
    if (ct.is_goal(ct.init().data())) {
        result.plan = Plan{};
        return finish(std::move(result), Outcome::PlanFound, limits);
    }
    const std::uint64_t h0 = h.evaluate(ct.init().data());
    if (h0 == kInfinity) return finish(std::move(result), Outcome::Unsolvable, limits);

    // (h, insertion sequence, state id): FIFO among equal h.
    using Entry = std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
    std::uint64_t seq = 0;
    open.emplace(h0, seq++, 0);
    std::vector<std::uint32_t> succ;
    std::vector<Word> buf(ct.words());
    while (!open.empty()) {
        if (limits.exceeded(result.stats.expanded)) return finish(std::move(result), Outcome::BudgetExhausted, limits);
        auto [hv, order, node] = open.top();
        open.pop();
        ++result.stats.expanded;
        ct.successors(space.state(node), succ);
        for (auto ai : succ) {
            ct.apply(space.state(node), ct.actions()[ai], buf.data());
            auto [id, fresh] = space.add(buf.data(), node, ai);
            if (!fresh) continue;
            ++result.stats.generated;
            if (ct.is_goal(buf.data())) {
                space.extract(id, task, result);
                return finish(std::move(result), Outcome::PlanFound, limits);
            }
            const std::uint64_t hs = h.evaluate(buf.data());
            if (hs == kInfinity) continue;
            open.emplace(hs, seq++, id);
        }
    }
    return finish(std::move(result), Outcome::Unsolvable, limits);
}

std::uint64_t h_add(const pddl::GroundedTask& task, const pddl::State& s) {
    CompiledTask ct(task);
    detail::AdditiveHeuristic h(ct);
    auto bits = ct.encode(s);
    // Static goal atoms are judged against `s` rather than init.
    for (auto id : task.goal_pos) {
        if (ct.fluent_of(id) < 0 && !s.contains(task.atoms[id])) return kInfinity;
    }
    return h.evaluate(bits.data());
}

pddl::GroundedTask reachability_prune(const pddl::GroundedTask& task) {
    const std::size_t n = task.atoms.size();
    std::vector<char> reached(n, 0), deleted(n, 0), in_init(n, 0);
    for (auto id : task.init) reached[id] = in_init[id] = 1;
    for (const auto& a : task.actions) {
        for (auto id : a.del) deleted[id] = 1;
    }
    auto blocked = [&](const pddl::IndexedAction& a) {
        return std::any_of(a.pre_neg.begin(), a.pre_neg.end(),
                           [&](pddl::AtomId id) { return in_init[id] && !deleted[id]; });
    };
    std::vector<char> fired(task.actions.size(), 0);
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t i = 0; i < task.actions.size(); ++i) {
            if (fired[i]) continue;
            const auto& a = task.actions[i];
            if (blocked(a)) continue;
            if (!std::all_of(a.pre_pos.begin(), a.pre_pos.end(), [&](pddl::AtomId id) { return reached[id] != 0; })) {
                continue;
            }
            fired[i] = 1;
            changed = true;
            for (auto id : a.add) reached[id] = 1;
        }
    }
    pddl::GroundedTask out = task;
    out.actions.clear();
    for (std::size_t i = 0; i < task.actions.size(); ++i) {
        if (fired[i]) out.actions.push_back(task.actions[i]);
    }
    return out;
}

Validation validate_plan(const pddl::GroundedTask& task, const Plan& plan) {
    Validation v;
    pddl::State s = task.initial_state();
    for (std::size_t i = 0; i < plan.steps.size(); ++i) {
        if (!pddl::applicable(s, plan.steps[i])) {
            v.failed_index = i;
            v.reason = "step " + std::to_string(i) + " " + plan.steps[i].to_string() + " is not applicable";
            return v;
        }
        s = pddl::apply(s, plan.steps[i]);
    }
    if (pddl::satisfies(s, task.goal())) {
        v.ok = true;
        return v;
    }
    for (std::size_t i = 0; i < task.actions.size(); ++i) {
        if (!task.actions[i].synthetic) continue;
        pddl::GroundAction achiever = task.action(i);
        if (pddl::applicable(s, achiever) && pddl::satisfies(pddl::apply(s, achiever), task.goal())) {
            v.ok = true;
            return v;
        }
    }
    v.failed_index = plan.steps.size();
    v.reason = "final state does not satisfy the goal";
    return v;
}

}  // namespace egoplan::planner
