#include "egoplan/pddl/grounding.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <unordered_map>
#include <unordered_set>

#include "egoplan/pddl/strips.hpp"

namespace egoplan::pddl {

std::string IndexedAction::to_string() const {
    std::string out = "(" + schema;
    for (const auto& a : args) out += " " + a;
    return out + ")";
}

std::optional<AtomId> GroundedTask::find(const GroundAtom& a) const {
    auto it = std::lower_bound(atoms.begin(), atoms.end(), a);
    if (it == atoms.end() || *it != a) return std::nullopt;
    return static_cast<AtomId>(it - atoms.begin());
}

GroundAction GroundedTask::action(std::size_t i) const {
    const auto& ia = actions.at(i);
    GroundAction g;
    g.schema = ia.schema;
    g.args = ia.args;
    g.synthetic = ia.synthetic;
    auto conv = [&](const std::vector<AtomId>& ids, std::vector<GroundAtom>& out) {
        for (AtomId id : ids) out.push_back(atoms[id]);
    };
    conv(ia.pre_pos, g.pre_pos);
    conv(ia.pre_neg, g.pre_neg);
    conv(ia.add, g.add);
    conv(ia.del, g.del);
    return g;
}

State GroundedTask::initial_state() const {
    State s;
    for (AtomId id : init) s.insert(atoms[id]);
    return s;
}

GroundGoal GroundedTask::goal() const {
    GroundGoal g;
    for (AtomId id : goal_pos) g.pos.push_back(atoms[id]);
    for (AtomId id : goal_neg) g.neg.push_back(atoms[id]);
    return g;
}

std::size_t GroundedTask::synthetic_count() const {
    return static_cast<std::size_t>(
        std::count_if(actions.begin(), actions.end(), [](const IndexedAction& a) { return a.synthetic; }));
}

namespace {

using Sym = std::uint32_t;
using Key = std::vector<Sym>;  // predicate followed by argument symbols

struct KeyHash {
    std::size_t operator()(const Key& k) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (Sym x : k) h = (h ^ x) * 1099511628211ULL;
        return h;
    }
};

struct PairHash {
    std::size_t operator()(const std::pair<Sym, Sym>& p) const noexcept {
        return (static_cast<std::size_t>(p.first) << 32) ^ p.second;
    }
};

/// Literal argument: >= 0 is a parameter index, < 0 encodes constant -(sym+1).
struct CompiledLiteral {
    Sym pred{0};
    std::vector<int> args;
};

struct CompiledSchema {
    ActionSchema source;
    bool synthetic{false};
    std::vector<std::vector<Sym>> domains;   // candidates per parameter
    std::vector<std::vector<char>> allowed;  // allowed[param][object]
    std::vector<CompiledLiteral> positive;
    std::vector<CompiledLiteral> static_negative;
    std::vector<std::pair<CompiledLiteral, bool>> equalities;  // literal, polarity
};

class Grounder {
public:
    Grounder(const Domain& dom, const Problem& prob) : dom_(dom), prob_(prob) {
        std::vector<const ObjectConst*> objs;
        for (const auto& o : prob.objects) objs.push_back(&o);
        std::sort(objs.begin(), objs.end(), [](auto* a, auto* b) { return a->name < b->name; });
        for (const auto* o : objs) {
            obj_ids_.emplace(o->name, static_cast<Sym>(obj_names_.size()));
            obj_names_.push_back(o->name);
            obj_types_.push_back(o->type);
        }
        for (const auto& p : dom.predicates) intern_pred(p.name);
        statics_ = dom.static_predicates();
        for (const auto& a : prob.init) {
            Key k = key_of(a);
            init_.insert(k);
        }
    }

    void add_schema(const ActionSchema& schema, bool synthetic) {
        CompiledSchema cs;
        cs.source = schema;
        cs.synthetic = synthetic;
        for (const auto& p : schema.params) {
            std::vector<Sym> dom_syms;
            std::vector<char> allowed(obj_names_.size(), 0);
            for (Sym o = 0; o < obj_names_.size(); ++o) {
                if (type_matches(obj_types_[o], p.type)) {
                    dom_syms.push_back(o);
                    allowed[o] = 1;
                }
            }
            cs.domains.push_back(std::move(dom_syms));
            cs.allowed.push_back(std::move(allowed));
        }
        for (const auto& l : schema.pre) {
            CompiledLiteral cl = compile_literal(schema, l);
            if (l.is_equality()) {
                cs.equalities.emplace_back(std::move(cl), l.positive);
            } else if (l.positive) {
                cs.positive.push_back(std::move(cl));
            } else if (statics_.contains(l.predicate)) {
                cs.static_negative.push_back(std::move(cl));
            }
        }
        schemas_.push_back(std::move(cs));
    }

    /// Every binding passing equality filters (and, when `static_filter`,
    /// static literals evaluated against init).
    void enumerate_all(std::size_t si, bool static_filter, const std::function<void(const std::vector<Sym>&)>& emit) {
        const auto& cs = schemas_[si];
        std::vector<Sym> binding(cs.domains.size());
        std::function<void(std::size_t)> rec = [&](std::size_t i) {
            if (i == binding.size()) {
                if (!passes_filters(cs, binding)) return;
                if (static_filter) {
                    for (const auto& l : cs.positive) {
                        if (statics_.contains(pred_names_[l.pred]) && !init_.contains(resolve(l, binding))) return;
                    }
                }
                emit(binding);
                return;
            }
            for (Sym o : cs.domains[i]) {
                binding[i] = o;
                rec(i + 1);
            }
        };
        rec(0);
    }

    /// Delete-relaxation fixpoint; returns the reachable bindings per schema.
    /// Semi-naive: after the first round a binding is only searched for when
    /// one of its positive literals matches an atom reached in the last round.
    std::vector<std::vector<std::vector<Sym>>> reachable_bindings() {
        for (const auto& k : init_) add_reached(k);
        std::vector<std::unordered_set<Key, KeyHash>> found(schemas_.size());
        std::vector<std::vector<std::vector<Sym>>> ordered(schemas_.size());
        std::vector<std::size_t> delta_begin(by_pred_.size(), 0);
        for (bool first = true;; first = false) {
            std::vector<Key> fresh;
            for (std::size_t si = 0; si < schemas_.size(); ++si) {
                auto emit = [&](const std::vector<Sym>& binding) {
                    if (!found[si].insert(binding).second) return;
                    ordered[si].push_back(binding);
                    for (const auto& l : schemas_[si].source.add) {
                        fresh.push_back(resolve(compile_literal(schemas_[si].source, l), binding));
                    }
                };
                if (first) {
                    match(si, emit);
                    continue;
                }
                const auto& pos_lits = schemas_[si].positive;
                for (std::size_t li = 0; li < pos_lits.size(); ++li) {
                    const Sym pred = pos_lits[li].pred;
                    if (delta_begin[pred] < by_pred_[pred].size()) match(si, emit, li, delta_begin[pred]);
                }
            }
            std::vector<std::size_t> before(by_pred_.size());
            for (std::size_t p = 0; p < by_pred_.size(); ++p) before[p] = by_pred_[p].size();
            std::size_t added = 0;
            for (auto& k : fresh) {
                if (add_reached(k)) ++added;
            }
            if (added == 0) break;
            delta_begin = std::move(before);
        }
        return ordered;
    }

    GroundedTask build(const std::vector<std::vector<std::vector<Sym>>>& bindings, const GroundGoal* conj_goal) {
        struct Pending {
            std::size_t schema;
            std::vector<Sym> binding;
            std::vector<Key> pre_pos, pre_neg, add, del;
        };
        std::unordered_map<Key, std::size_t, KeyHash> local;
        std::vector<Key> keys;
        auto intern = [&](const Key& k) {
            auto [it, inserted] = local.emplace(k, keys.size());
            if (inserted) keys.push_back(k);
            return it->second;
        };
        struct Temp {
            std::size_t schema;
            std::vector<Sym> binding;
            std::vector<std::size_t> pp, pn, ad, de;
        };
        std::vector<Temp> temps;
        for (std::size_t si = 0; si < schemas_.size(); ++si) {
            const auto& cs = schemas_[si];
            for (const auto& b : bindings[si]) {
                Temp t{si, b, {}, {}, {}, {}};
                for (const auto& l : cs.source.pre) {
                    if (l.is_equality()) continue;
                    auto id = intern(resolve(compile_literal(cs.source, l), b));
                    (l.positive ? t.pp : t.pn).push_back(id);
                }
                for (const auto& l : cs.source.add) t.ad.push_back(intern(resolve(compile_literal(cs.source, l), b)));
                for (const auto& l : cs.source.del) t.de.push_back(intern(resolve(compile_literal(cs.source, l), b)));
                temps.push_back(std::move(t));
            }
        }
        std::vector<std::size_t> init_ids;
        for (const auto& k : init_) init_ids.push_back(intern(k));
        std::vector<std::size_t> goal_pos_ids, goal_neg_ids;
        if (conj_goal != nullptr) {
            for (const auto& a : conj_goal->pos) goal_pos_ids.push_back(intern(key_of(a)));
            for (const auto& a : conj_goal->neg) goal_neg_ids.push_back(intern(key_of(a)));
        }

        GroundedTask task;
        task.objects = prob_.objects;
        std::vector<GroundAtom> strings;
        strings.reserve(keys.size());
        for (const auto& k : keys) strings.push_back(atom_of(k));
        std::vector<std::size_t> order(keys.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return strings[a] < strings[b]; });
        std::vector<AtomId> remap(keys.size());
        task.atoms.reserve(keys.size());
        for (std::size_t rank = 0; rank < order.size(); ++rank) {
            remap[order[rank]] = static_cast<AtomId>(rank);
            task.atoms.push_back(std::move(strings[order[rank]]));
        }
        auto conv = [&](const std::vector<std::size_t>& ids) {
            std::vector<AtomId> out;
            out.reserve(ids.size());
            for (auto i : ids) out.push_back(remap[i]);
            std::sort(out.begin(), out.end());
            out.erase(std::unique(out.begin(), out.end()), out.end());
            return out;
        };
        for (const auto& t : temps) {
            IndexedAction ia;
            ia.schema = schemas_[t.schema].source.name;
            ia.synthetic = schemas_[t.schema].synthetic;
            for (Sym s : t.binding) ia.args.push_back(obj_names_[s]);
            ia.pre_pos = conv(t.pp);
            ia.pre_neg = conv(t.pn);
            ia.add = conv(t.ad);
            std::vector<AtomId> del = conv(t.de);
            std::vector<AtomId> del_only;
            std::set_difference(del.begin(), del.end(), ia.add.begin(), ia.add.end(), std::back_inserter(del_only));
            ia.del = std::move(del_only);
            task.actions.push_back(std::move(ia));
        }
        std::sort(task.actions.begin(), task.actions.end(), [](const IndexedAction& a, const IndexedAction& b) {
            return std::tie(a.synthetic, a.schema, a.args) < std::tie(b.synthetic, b.schema, b.args);
        });
        task.init = conv(init_ids);
        task.goal_pos = conv(goal_pos_ids);
        task.goal_neg = conv(goal_neg_ids);
        return task;
    }

    std::size_t schema_count() const { return schemas_.size(); }
    const ActionSchema& schema(std::size_t i) const { return schemas_[i].source; }
    const std::string& object_name(Sym s) const { return obj_names_[s]; }

    Key key_of(const GroundAtom& a) {
        Key k;
        k.reserve(a.args.size() + 1);
        k.push_back(intern_pred(a.predicate));
        for (const auto& arg : a.args) k.push_back(object_sym(arg));
        return k;
    }

private:
    Sym intern_pred(const std::string& name) {
        auto [it, inserted] = pred_ids_.emplace(name, static_cast<Sym>(pred_names_.size()));
        if (inserted) {
            pred_names_.push_back(name);
            by_pred_.emplace_back();
        }
        return it->second;
    }

    Sym object_sym(const std::string& name) const {
        auto it = obj_ids_.find(name);
        if (it == obj_ids_.end()) throw SemanticError("undeclared object '" + name + "'");
        return it->second;
    }

    CompiledLiteral compile_literal(const ActionSchema& schema, const Literal& l) {
        CompiledLiteral cl;
        cl.pred = l.is_equality() ? 0 : intern_pred(l.predicate);
        for (const auto& t : l.args) {
            if (is_variable(t)) {
                int idx = -1;
                for (std::size_t i = 0; i < schema.params.size(); ++i) {
                    if (schema.params[i].name == t) idx = static_cast<int>(i);
                }
                if (idx < 0) throw SemanticError("action " + schema.name + ": unbound variable '" + t + "'");
                cl.args.push_back(idx);
            } else {
                cl.args.push_back(-static_cast<int>(object_sym(t)) - 1);
            }
        }
        return cl;
    }

    static Sym arg_value(int arg, const std::vector<Sym>& binding) {
        return arg >= 0 ? binding[static_cast<std::size_t>(arg)] : static_cast<Sym>(-arg - 1);
    }

    Key resolve(const CompiledLiteral& l, const std::vector<Sym>& binding) const {
        Key k;
        k.reserve(l.args.size() + 1);
        k.push_back(l.pred);
        for (int a : l.args) k.push_back(arg_value(a, binding));
        return k;
    }

    GroundAtom atom_of(const Key& k) const {
        GroundAtom a;
        a.predicate = pred_names_[k[0]];
        for (std::size_t i = 1; i < k.size(); ++i) a.args.push_back(obj_names_[k[i]]);
        return a;
    }

    bool passes_filters(const CompiledSchema& cs, const std::vector<Sym>& binding) const {
        for (const auto& [l, positive] : cs.equalities) {
            bool same = arg_value(l.args[0], binding) == arg_value(l.args[1], binding);
            if (same != positive) return false;
        }
        for (const auto& l : cs.static_negative) {
            if (init_.contains(resolve(l, binding))) return false;
        }
        return true;
    }

    bool add_reached(const Key& k) {
        if (!reached_.insert(k).second) return false;
        auto& list = by_pred_[k[0]];
        if (k.size() > 1) by_first_arg_[{k[0], k[1]}].push_back(list.size());
        list.push_back(k);
        return true;
    }

    /// Bindings whose positive literals all hold in the reached set. With
    /// `forced` set, that literal only matches atoms from index `from` on.
    void match(std::size_t si, const std::function<void(const std::vector<Sym>&)>& emit,
               std::size_t forced = static_cast<std::size_t>(-1), std::size_t from = 0) {
        const auto& cs = schemas_[si];
        std::vector<Sym> binding(cs.domains.size(), 0);
        std::vector<char> bound(cs.domains.size(), 0);
        std::vector<char> used(cs.positive.size(), 0);
        std::size_t max_arity = 0;
        for (const auto& l : cs.positive) max_arity = std::max(max_arity, l.args.size());
        // Newly bound parameters, one buffer per recursion depth.
        std::vector<std::vector<std::size_t>> scratch(cs.positive.size() + 1, std::vector<std::size_t>(max_arity));

        std::function<void(std::size_t)> free_params = [&](std::size_t i) {
            if (i == binding.size()) {
                if (passes_filters(cs, binding)) emit(binding);
                return;
            }
            if (bound[i]) {
                free_params(i + 1);
                return;
            }
            bound[i] = 1;
            for (Sym o : cs.domains[i]) {
                binding[i] = o;
                free_params(i + 1);
            }
            bound[i] = 0;
        };

        std::function<void(std::size_t)> rec = [&](std::size_t remaining) {
            if (remaining == 0) {
                free_params(0);
                return;
            }
            // Most-bound literal first, then smallest extension.
            std::size_t best = cs.positive.size();
            int best_bound = -1;
            std::size_t best_size = 0;
            for (std::size_t li = 0; li < cs.positive.size(); ++li) {
                if (used[li]) continue;
                if (li == forced) {
                    best = li;
                    break;
                }
                const auto& l = cs.positive[li];
                int nb = 0;
                for (int a : l.args) {
                    if (a < 0 || bound[static_cast<std::size_t>(a)]) ++nb;
                }
                int unbound = static_cast<int>(l.args.size()) - nb;
                std::size_t ext = by_pred_[l.pred].size();
                int score = unbound == 0 ? 1'000'000 : nb;
                if (score > best_bound || (score == best_bound && ext < best_size)) {
                    best = li;
                    best_bound = score;
                    best_size = ext;
                }
            }
            const auto& l = cs.positive[best];
            used[best] = 1;
            bool all_bound = std::all_of(l.args.begin(), l.args.end(),
                                         [&](int a) { return a < 0 || bound[static_cast<std::size_t>(a)]; });
            if (all_bound) {
                if (reached_.contains(resolve(l, binding))) rec(remaining - 1);
                used[best] = 0;
                return;
            }
            auto try_candidate = [&](const Key& cand) {
                auto& newly = scratch[remaining];
                std::size_t n_newly = 0;
                bool ok = true;
                for (std::size_t i = 0; i < l.args.size() && ok; ++i) {
                    int a = l.args[i];
                    Sym v = cand[i + 1];
                    if (a < 0) {
                        ok = static_cast<Sym>(-a - 1) == v;
                    } else if (bound[static_cast<std::size_t>(a)]) {
                        ok = binding[static_cast<std::size_t>(a)] == v;
                    } else if (!cs.allowed[static_cast<std::size_t>(a)][v]) {
                        ok = false;
                    } else {
                        binding[static_cast<std::size_t>(a)] = v;
                        bound[static_cast<std::size_t>(a)] = 1;
                        newly[n_newly++] = static_cast<std::size_t>(a);
                    }
                }
                if (ok) rec(remaining - 1);
                for (std::size_t p = 0; p < n_newly; ++p) bound[newly[p]] = 0;
            };
            if (best == forced) {
                const auto& list = by_pred_[l.pred];
                for (std::size_t j = from; j < list.size(); ++j) try_candidate(list[j]);
                used[best] = 0;
                return;
            }
            int first = l.args.empty() ? 0 : l.args[0];
            bool first_bound = !l.args.empty() && (first < 0 || bound[static_cast<std::size_t>(first)]);
            if (first_bound) {
                auto it = by_first_arg_.find({l.pred, arg_value(first, binding)});
                if (it != by_first_arg_.end()) {
                    // Copy: the index does not change during matching, but keep it cheap to reason about.
                    const auto& idxs = it->second;
                    for (std::size_t j = 0; j < idxs.size(); ++j) try_candidate(by_pred_[l.pred][idxs[j]]);
                }
            } else {
                const auto& list = by_pred_[l.pred];
                for (std::size_t j = 0; j < list.size(); ++j) try_candidate(list[j]);
            }
            used[best] = 0;
        };
        rec(cs.positive.size());
    }

    const Domain& dom_;
    const Problem& prob_;
    std::vector<std::string> obj_names_;
    std::vector<std::string> obj_types_;
    std::unordered_map<std::string, Sym> obj_ids_;
    std::vector<std::string> pred_names_;
    std::unordered_map<std::string, Sym> pred_ids_;
    std::set<std::string> statics_;
    std::unordered_set<Key, KeyHash> init_;
    std::vector<CompiledSchema> schemas_;
    std::unordered_set<Key, KeyHash> reached_;
    std::vector<std::vector<Key>> by_pred_;
    std::unordered_map<std::pair<Sym, Sym>, std::vector<std::size_t>, PairHash> by_first_arg_;
};

ActionSchema achiever_schema(const Goal& goal) {
    ActionSchema s;
    s.name = std::string(kAchieverSchema);
    s.params = goal.vars;
    s.pre = goal.conjunction;
    s.add = {pos(std::string(kGoalAchievedPredicate))};
    return s;
}

GroundGoal ground_conjunction(const Goal& goal) {
    GroundGoal g;
    for (const auto& l : goal.conjunction) {
        if (l.is_equality()) continue;
        (l.positive ? g.pos : g.neg).push_back(GroundAtom{l.predicate, l.args});
    }
    return g;
}

/// Domain plus the (goal-achieved) predicate, so synthetic literals resolve.
Domain with_goal_predicate(const Domain& dom) {
    Domain d = dom;
    d.predicates.push_back(PredicateSchema{std::string(kGoalAchievedPredicate), {}});
    return d;
}

}  // namespace

CompiledGoal compile_goal(const Domain& dom, const Problem& prob) {
    CompiledGoal out;
    if (!prob.goal.existential()) {
        out.conjunctive = ground_conjunction(prob.goal);
        return out;
    }
    out.existential = true;
    out.conjunctive.pos.push_back(GroundAtom{std::string(kGoalAchievedPredicate), {}});
    Domain d = with_goal_predicate(dom);
    Grounder g(d, prob);
    ActionSchema schema = achiever_schema(prob.goal);
    g.add_schema(schema, true);
    g.enumerate_all(0, true, [&](const std::vector<Sym>& binding) {
        std::vector<std::string> args;
        for (Sym s : binding) args.push_back(g.object_name(s));
        GroundAction a = instantiate(schema, args);
        a.synthetic = true;
        out.achievers.push_back(std::move(a));
    });
    std::sort(out.achievers.begin(), out.achievers.end(),
              [](const GroundAction& a, const GroundAction& b) { return a.args < b.args; });
    return out;
}

bool goal_holds(const Domain& dom, const Problem& prob, const State& s) {
    CompiledGoal cg = compile_goal(dom, prob);
    if (!cg.existential) return satisfies(s, cg.conjunctive);
    return std::any_of(cg.achievers.begin(), cg.achievers.end(),
                       [&](const GroundAction& a) { return applicable(s, a); });
}

GroundedTask ground(const Domain& dom, const Problem& prob, GroundingMode mode) {
    const bool existential = prob.goal.existential();
    Domain d = existential ? with_goal_predicate(dom) : dom;
    Grounder g(d, prob);
    for (const auto& a : dom.actions) g.add_schema(a, false);
    GroundGoal conj;
    if (existential) {
        g.add_schema(achiever_schema(prob.goal), true);
        conj.pos.push_back(GroundAtom{std::string(kGoalAchievedPredicate), {}});
    } else {
        conj = ground_conjunction(prob.goal);
    }
    std::vector<std::vector<std::vector<Sym>>> bindings;
    if (mode == GroundingMode::AllBindings) {
        bindings.resize(g.schema_count());
        for (std::size_t si = 0; si < g.schema_count(); ++si) {
            const bool is_achiever = existential && si + 1 == g.schema_count();
            g.enumerate_all(si, is_achiever, [&](const std::vector<Sym>& b) { bindings[si].push_back(b); });
        }
    } else {
        bindings = g.reachable_bindings();
    }
    return g.build(bindings, &conj);
}

std::size_t count_type_consistent_bindings(const ActionSchema& schema, const Problem& prob) {
    std::size_t total = 1;
    for (const auto& p : schema.params) {
        std::size_t n = static_cast<std::size_t>(std::count_if(
            prob.objects.begin(), prob.objects.end(), [&](const ObjectConst& o) { return type_matches(o.type, p.type); }));
        total *= n;
    }
    return total;
}

}  // namespace egoplan::pddl
