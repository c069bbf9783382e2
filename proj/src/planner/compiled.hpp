#pragma once

// Fluent-only bitset encoding of a GroundedTask shared by the searches.

#include <cstdint>
#include <functional>
#include <unordered_set>
#include <vector>

#include "egoplan/pddl/grounding.hpp"

namespace egoplan::planner::detail {

using Word = std::uint64_t;

struct CompiledAction {
    std::uint32_t task_index{0};
    bool synthetic{false};
    std::vector<std::uint32_t> pre_pos;
    std::vector<std::uint32_t> pre_neg;
    std::vector<std::uint32_t> add;
    std::vector<std::uint32_t> del;
};

class CompiledTask {
public:
    explicit CompiledTask(const pddl::GroundedTask& task);

    std::size_t words() const { return words_; }
    std::size_t fluent_count() const { return fluent_atoms_.size(); }
    const std::vector<CompiledAction>& actions() const { return actions_; }
    const std::vector<Word>& init() const { return init_; }
    bool goal_impossible() const { return goal_impossible_; }

    /// -1 for atoms that never change.
    std::int32_t fluent_of(pddl::AtomId a) const { return fluent_of_atom_[a]; }
    bool static_true(pddl::AtomId a) const { return static_true_[a] != 0; }

    bool applicable(const Word* s, const CompiledAction& a) const;
    bool is_goal(const Word* s) const;
    void apply(const Word* s, const CompiledAction& a, Word* out) const;

    /// Applicable action ids in canonical order.
    void successors(const Word* s, std::vector<std::uint32_t>& out) const;

    /// Encodes a string-level state (atoms absent from the task are ignored).
    std::vector<Word> encode(const pddl::State& s) const;

    const std::vector<std::uint32_t>& goal_pos() const { return goal_pos_; }
    const std::vector<std::uint32_t>& goal_neg() const { return goal_neg_; }

private:
    std::size_t words_{0};
    std::vector<std::int32_t> fluent_of_atom_;
    std::vector<char> static_true_;
    std::vector<pddl::AtomId> fluent_atoms_;
    std::vector<CompiledAction> actions_;
    std::vector<std::vector<std::uint32_t>> by_key_;
    std::vector<std::uint32_t> keyless_;
    std::vector<Word> init_;
    std::vector<std::uint32_t> goal_pos_;
    std::vector<std::uint32_t> goal_neg_;
    bool goal_impossible_{false};
    const pddl::GroundedTask* task_;
};

inline bool test_bit(const Word* s, std::uint32_t f) { return (s[f >> 6] >> (f & 63)) & 1U; }
inline void set_bit(Word* s, std::uint32_t f) { s[f >> 6] |= Word{1} << (f & 63); }
inline void clear_bit(Word* s, std::uint32_t f) { s[f >> 6] &= ~(Word{1} << (f & 63)); }

/// Interned packed states; ids are dense and assigned in insertion order.
class StateRegistry {
public:
    explicit StateRegistry(std::size_t words);
    StateRegistry(const StateRegistry&) = delete;
    StateRegistry& operator=(const StateRegistry&) = delete;

    /// Returns (id, inserted).
    std::pair<std::uint32_t, bool> insert(const Word* s);
    const Word* get(std::uint32_t id) const { return arena_.data() + static_cast<std::size_t>(id) * words_; }
    std::size_t size() const { return count_; }

private:
    struct Hash {
        const StateRegistry* reg;
        std::size_t operator()(std::uint32_t id) const;
    };
    struct Eq {
        const StateRegistry* reg;
        bool operator()(std::uint32_t a, std::uint32_t b) const;
    };

    std::size_t words_;
    std::size_t count_{0};
    std::vector<Word> arena_;
    std::unordered_set<std::uint32_t, Hash, Eq> index_;
};

/// h_add evaluator over a compiled task (unit costs). Negative
/// preconditions and goals are compiled into complement facts, made true by
/// the actions deleting the atom.
class AdditiveHeuristic {
public:
    explicit AdditiveHeuristic(const CompiledTask& task);
    std::uint64_t evaluate(const Word* s);

private:
    const CompiledTask& task_;
    std::size_t n_fluents_;
    std::vector<std::uint32_t> complemented_;  // fluents with a complement fact
    std::vector<std::vector<std::uint32_t>> adds_;
    std::vector<std::uint32_t> goal_;
    std::vector<char> is_goal_;
    std::vector<std::vector<std::uint32_t>> consumers_;
    std::vector<std::uint32_t> pre_count_;
    std::vector<std::uint32_t> no_pre_;
    std::vector<std::uint64_t> cost_;
    std::vector<std::uint32_t> remaining_;
    std::vector<std::uint64_t> acc_;
    std::vector<char> done_;
};

}  // namespace egoplan::planner::detail
