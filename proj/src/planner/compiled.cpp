#include "compiled.hpp"

#include <algorithm>
#include <queue>

#include "egoplan/planner/search.hpp"

namespace egoplan::planner::detail {

CompiledTask::CompiledTask(const pddl::GroundedTask& task) : task_(&task) {
    const std::size_t n_atoms = task.atoms.size();
    std::vector<char> touched(n_atoms, 0);
    for (const auto& a : task.actions) {
        for (auto id : a.add) touched[id] = 1;
        for (auto id : a.del) touched[id] = 1;
    }
    std::vector<char> in_init(n_atoms, 0);
    for (auto id : task.init) in_init[id] = 1;

    fluent_of_atom_.assign(n_atoms, -1);
    static_true_.assign(n_atoms, 0);
    for (pddl::AtomId id = 0; id < n_atoms; ++id) {
        if (touched[id]) {
            fluent_of_atom_[id] = static_cast<std::int32_t>(fluent_atoms_.size());
            fluent_atoms_.push_back(id);
        } else {
            static_true_[id] = in_init[id];
        }
    }
    words_ = std::max<std::size_t>(1, (fluent_atoms_.size() + 63) / 64);

    init_.assign(words_, 0);
    for (auto id : task.init) {
        if (fluent_of_atom_[id] >= 0) set_bit(init_.data(), static_cast<std::uint32_t>(fluent_of_atom_[id]));
    }

    for (auto id : task.goal_pos) {
        if (fluent_of_atom_[id] >= 0) {
            goal_pos_.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
        } else if (!static_true_[id]) {
            goal_impossible_ = true;
        }
    }
    for (auto id : task.goal_neg) {
        if (fluent_of_atom_[id] >= 0) {
            goal_neg_.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
        } else if (static_true_[id]) {
            goal_impossible_ = true;
        }
    }

    for (std::size_t i = 0; i < task.actions.size(); ++i) {
        const auto& ta = task.actions[i];
        CompiledAction ca;
        ca.task_index = static_cast<std::uint32_t>(i);
        ca.synthetic = ta.synthetic;
        bool possible = true;
        for (auto id : ta.pre_pos) {
            if (fluent_of_atom_[id] >= 0) {
                ca.pre_pos.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
            } else if (!static_true_[id]) {
                possible = false;
            }
        }
        for (auto id : ta.pre_neg) {
            if (fluent_of_atom_[id] >= 0) {
                ca.pre_neg.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
            } else if (static_true_[id]) {
                possible = false;
            }
        }
        if (!possible) continue;
        for (auto id : ta.add) ca.add.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
        for (auto id : ta.del) ca.del.push_back(static_cast<std::uint32_t>(fluent_of_atom_[id]));
        actions_.push_back(std::move(ca));
    }

    // Key each action on the positive fluent precondition shared by the
    // fewest actions; such atoms are rarely true together.
    std::vector<std::uint32_t> demand(fluent_atoms_.size(), 0);
    for (const auto& a : actions_) {
        for (auto f : a.pre_pos) ++demand[f];
    }
    by_key_.assign(fluent_atoms_.size(), {});
    for (std::uint32_t ai = 0; ai < actions_.size(); ++ai) {
        const auto& a = actions_[ai];
        if (a.pre_pos.empty()) {
            keyless_.push_back(ai);
            continue;
        }
        std::uint32_t key = a.pre_pos[0];
        for (auto f : a.pre_pos) {
            if (demand[f] < demand[key]) key = f;
        }
        by_key_[key].push_back(ai);
    }
}

bool CompiledTask::applicable(const Word* s, const CompiledAction& a) const {
    for (auto f : a.pre_pos) {
        if (!test_bit(s, f)) return false;
    }
    for (auto f : a.pre_neg) {
        if (test_bit(s, f)) return false;
    }
    return true;
}

bool CompiledTask::is_goal(const Word* s) const {
    if (goal_impossible_) return false;
    for (auto f : goal_pos_) {
        if (!test_bit(s, f)) return false;
    }
    for (auto f : goal_neg_) {
        if (test_bit(s, f)) return false;
    }
    return true;
}

void CompiledTask::apply(const Word* s, const CompiledAction& a, Word* out) const {
    std::copy(s, s + words_, out);
    for (auto f : a.del) clear_bit(out, f);
    for (auto f : a.add) set_bit(out, f);
}

void CompiledTask::successors(const Word* s, std::vector<std::uint32_t>& out) const {
    out.clear();
    for (auto ai : keyless_) {
        if (applicable(s, actions_[ai])) out.push_back(ai);
    }
    for (std::size_t w = 0; w < words_; ++w) {
        Word bits = s[w];
        while (bits != 0) {
            const auto f = static_cast<std::uint32_t>(w * 64 + static_cast<std::size_t>(__builtin_ctzll(bits)));
            bits &= bits - 1;
            for (auto ai : by_key_[f]) {
                if (applicable(s, actions_[ai])) out.push_back(ai);
            }
        }
    }
    std::sort(out.begin(), out.end());
}

std::vector<Word> CompiledTask::encode(const pddl::State& s) const {
    std::vector<Word> out(words_, 0);
    for (const auto& a : s) {
        auto id = task_->find(a);
        if (id && fluent_of_atom_[*id] >= 0) set_bit(out.data(), static_cast<std::uint32_t>(fluent_of_atom_[*id]));
    }
    return out;
}

StateRegistry::StateRegistry(std::size_t words) : words_(words), index_(1024, Hash{this}, Eq{this}) {}

std::size_t StateRegistry::Hash::operator()(std::uint32_t id) const {
    const Word* s = reg->get(id);
    std::size_t h = 0x9e3779b97f4a7c15ULL;
    for (std::size_t i = 0; i < reg->words_; ++i) {
        h ^= s[i] + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return h;
}

bool StateRegistry::Eq::operator()(std::uint32_t a, std::uint32_t b) const {
    return std::equal(reg->get(a), reg->get(a) + reg->words_, reg->get(b));
}

std::pair<std::uint32_t, bool> StateRegistry::insert(const Word* s) {
    const auto id = static_cast<std::uint32_t>(count_);
    arena_.insert(arena_.end(), s, s + words_);
    ++count_;
    auto [it, inserted] = index_.insert(id);
    if (!inserted) {
        arena_.resize(arena_.size() - words_);
        --count_;
        return {*it, false};
    }
    return {id, true};
}

AdditiveHeuristic::AdditiveHeuristic(const CompiledTask& task) : task_(task), n_fluents_(task.fluent_count()) {
    const auto& acts = task.actions();
    std::vector<std::int64_t> comp(n_fluents_, -1);
    auto complement = [&](std::uint32_t f) {
        if (comp[f] < 0) {
            comp[f] = static_cast<std::int64_t>(n_fluents_ + complemented_.size());
            complemented_.push_back(f);
        }
        return static_cast<std::uint32_t>(comp[f]);
    };
    std::vector<std::vector<std::uint32_t>> pres(acts.size());
    for (std::uint32_t ai = 0; ai < acts.size(); ++ai) {
        pres[ai] = acts[ai].pre_pos;
        for (auto f : acts[ai].pre_neg) pres[ai].push_back(complement(f));
    }
    goal_ = task.goal_pos();
    for (auto f : task.goal_neg()) goal_.push_back(complement(f));
    adds_.resize(acts.size());
    for (std::uint32_t ai = 0; ai < acts.size(); ++ai) {
        adds_[ai] = acts[ai].add;
        for (auto f : acts[ai].del) {
            if (comp[f] >= 0) adds_[ai].push_back(static_cast<std::uint32_t>(comp[f]));
        }
    }
    const std::size_t n_facts = n_fluents_ + complemented_.size();
    is_goal_.assign(n_facts, 0);
    for (auto f : goal_) is_goal_[f] = 1;
    consumers_.assign(n_facts, {});
    pre_count_.resize(acts.size());
    for (std::uint32_t ai = 0; ai < acts.size(); ++ai) {
        pre_count_[ai] = static_cast<std::uint32_t>(pres[ai].size());
        if (pres[ai].empty()) no_pre_.push_back(ai);
        for (auto f : pres[ai]) consumers_[f].push_back(ai);
    }
    cost_.resize(n_facts);
    remaining_.resize(acts.size());
    acc_.resize(acts.size());
    done_.resize(n_facts);
}

std::uint64_t AdditiveHeuristic::evaluate(const Word* s) {
    if (task_.goal_impossible()) return kInfinity;
    std::fill(cost_.begin(), cost_.end(), kInfinity);
    std::fill(done_.begin(), done_.end(), 0);
    std::copy(pre_count_.begin(), pre_count_.end(), remaining_.begin());
    std::fill(acc_.begin(), acc_.end(), 0);

    using Entry = std::pair<std::uint64_t, std::uint32_t>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
    for (std::uint32_t f = 0; f < n_fluents_; ++f) {
        if (test_bit(s, f)) {
            cost_[f] = 0;
            queue.emplace(0, f);
        }
    }
    for (std::size_t i = 0; i < complemented_.size(); ++i) {
        if (!test_bit(s, complemented_[i])) {
            const auto f = static_cast<std::uint32_t>(n_fluents_ + i);
            cost_[f] = 0;
            queue.emplace(0, f);
        }
    }
    auto fire = [&](std::uint32_t ai) {
        const std::uint64_t c = acc_[ai] + 1;
        for (auto f : adds_[ai]) {
            if (c < cost_[f]) {
                cost_[f] = c;
                queue.emplace(c, f);
            }
        }
    };
    for (auto ai : no_pre_) fire(ai);

    std::size_t goals_left = goal_.size();
    while (!queue.empty() && goals_left > 0) {
        auto [c, f] = queue.top();
        queue.pop();
        if (done_[f] || c > cost_[f]) continue;
        done_[f] = 1;
        if (is_goal_[f]) --goals_left;
        for (auto ai : consumers_[f]) {
            acc_[ai] += c;
            if (--remaining_[ai] == 0) fire(ai);
        }
    }
    std::uint64_t h = 0;
    for (auto f : goal_) {
        if (cost_[f] == kInfinity) return kInfinity;
        h += cost_[f];
    }
    return h;
}

}  // namespace egoplan::planner::detail
