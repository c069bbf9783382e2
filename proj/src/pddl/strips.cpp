#include "egoplan/pddl/strips.hpp"

#include <algorithm>
#include <functional>

#include "egoplan/pddl/printer.hpp"

namespace egoplan::pddl {

bool applicable(const State& s, const GroundAction& a) {
    for (const auto& p : a.pre_pos) {
        if (!s.contains(p)) return false;
    }
    for (const auto& n : a.pre_neg) {
        if (s.contains(n)) return false;
    }
    return true;
}

State apply(const State& s, const GroundAction& a) {
    if (!applicable(s, a)) throw NotApplicable("action " + a.to_string() + " is not applicable");
    State next = s;
    for (const auto& d : a.del) next.erase(d);
    for (const auto& ad : a.add) next.insert(ad);
    return next;
}

bool satisfies(const State& s, const GroundGoal& g) {
    return std::all_of(g.pos.begin(), g.pos.end(), [&](const GroundAtom& a) { return s.contains(a); }) &&
           std::none_of(g.neg.begin(), g.neg.end(), [&](const GroundAtom& a) { return s.contains(a); });
}

namespace {

std::string resolve(const ActionSchema& schema, const std::vector<std::string>& binding, const std::string& term) {
    if (!is_variable(term)) return term;
    for (std::size_t i = 0; i < schema.params.size(); ++i) {
        if (schema.params[i].name == term) return binding[i];
    }
    throw SemanticError("action " + schema.name + ": unbound variable '" + term + "'");
}

GroundAtom ground_literal(const ActionSchema& schema, const std::vector<std::string>& binding, const Literal& l) {
    GroundAtom g{l.predicate, {}};
    g.args.reserve(l.args.size());
    for (const auto& t : l.args) g.args.push_back(resolve(schema, binding, t));
    return g;
}

void sort_unique(std::vector<GroundAtom>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

void check_vars(const ActionSchema& a, const std::vector<Literal>& lits) {
    for (const auto& l : lits) {
        for (const auto& t : l.args) {
            if (is_variable(t) && a.find_param(t) == nullptr) {
                throw SemanticError("action " + a.name + ": unbound variable '" + t + "' in extension");
            }
        }
    }
}

}  // namespace

bool equality_holds(const ActionSchema& schema, const std::vector<std::string>& binding) {
    for (const auto& l : schema.pre) {
        if (!l.is_equality()) continue;
        bool same = resolve(schema, binding, l.args[0]) == resolve(schema, binding, l.args[1]);
        if (same != l.positive) return false;
    }
    return true;
}

GroundAction instantiate(const ActionSchema& schema, const std::vector<std::string>& binding) {
    if (binding.size() != schema.params.size()) {
        throw SemanticError("action " + schema.name + ": expected " + std::to_string(schema.params.size()) +
                            " arguments, got " + std::to_string(binding.size()));
    }
    GroundAction g;
    g.schema = schema.name;
    g.args = binding;
    for (const auto& l : schema.pre) {
        if (l.is_equality()) continue;
        (l.positive ? g.pre_pos : g.pre_neg).push_back(ground_literal(schema, binding, l));
    }
    for (const auto& l : schema.add) g.add.push_back(ground_literal(schema, binding, l));
    for (const auto& l : schema.del) g.del.push_back(ground_literal(schema, binding, l));
    sort_unique(g.pre_pos);
    sort_unique(g.pre_neg);
    sort_unique(g.add);
    sort_unique(g.del);
    // add ∩ del = ∅ per ground action: an atom both added and deleted
    // (e.g. a move with from == to) stays true.
    std::vector<GroundAtom> del;
    std::set_difference(g.del.begin(), g.del.end(), g.add.begin(), g.add.end(), std::back_inserter(del));
    g.del = std::move(del);
    return g;
}

bool exists_binding(const std::vector<TypedParam>& vars, const std::vector<Literal>& conj,
                    const std::vector<ObjectConst>& objects, const State& s) {
    std::vector<std::vector<const std::string*>> domains(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        for (const auto& o : objects) {
            if (type_matches(o.type, vars[i].type)) domains[i].push_back(&o.name);
        }
    }
    // Each literal is checked at the depth where its last variable is bound.
    auto var_index = [&](const std::string& t) -> int {
        for (std::size_t i = 0; i < vars.size(); ++i) {
            if (vars[i].name == t) return static_cast<int>(i);
        }
        return -1;
    };
    std::vector<std::vector<const Literal*>> due(vars.size() + 1);
    for (const auto& l : conj) {
        int depth = 0;
        for (const auto& t : l.args) {
            if (is_variable(t)) {
                int vi = var_index(t);
                if (vi < 0) throw SemanticError("goal: unbound variable '" + t + "'");
                depth = std::max(depth, vi + 1);
            }
        }
        due[static_cast<std::size_t>(depth)].push_back(&l);
    }
    std::vector<const std::string*> binding(vars.size(), nullptr);
    auto value = [&](const std::string& t) -> const std::string& {
        return is_variable(t) ? *binding[static_cast<std::size_t>(var_index(t))] : t;
    };
    auto holds = [&](const Literal& l) {
        if (l.is_equality()) return (value(l.args[0]) == value(l.args[1])) == l.positive;
        GroundAtom g{l.predicate, {}};
        for (const auto& t : l.args) g.args.push_back(value(t));
        return s.contains(g) == l.positive;
    };
    std::function<bool(std::size_t)> rec = [&](std::size_t depth) {
        for (const auto* l : due[depth]) {
            if (!holds(*l)) return false;
        }
        if (depth == vars.size()) return true;
        for (const auto* o : domains[depth]) {
            binding[depth] = o;
            if (rec(depth + 1)) return true;
        }
        return false;
    };
    return rec(0);
}

ActionSchema extend_precondition(const ActionSchema& a, const std::vector<Literal>& delta) {
    check_vars(a, delta);
    ActionSchema out = a;
    for (const auto& l : delta) {
        if (std::find(out.pre.begin(), out.pre.end(), l) == out.pre.end()) out.pre.push_back(l);
    }
    return out;
}

ActionSchema extend_effect(const ActionSchema& a, const std::vector<Literal>& add_delta,
                           const std::vector<Literal>& del_delta) {
    check_vars(a, add_delta);
    check_vars(a, del_delta);
    auto present = [&](const Literal& l) {
        return std::find(a.add.begin(), a.add.end(), l) != a.add.end() ||
               std::find(a.del.begin(), a.del.end(), l) != a.del.end();
    };
    for (const auto* group : {&add_delta, &del_delta}) {
        for (const auto& l : *group) {
            if (!l.positive) throw SemanticError("action " + a.name + ": effect extension literals must be positive");
            if (present(l)) {
                throw SemanticError("action " + a.name + ": effect " + print_literal(l) + " already present");
            }
        }
    }
    for (const auto& l : add_delta) {
        if (std::find(del_delta.begin(), del_delta.end(), l) != del_delta.end()) {
            throw SemanticError("action " + a.name + ": effect extension adds and deletes the same literal");
        }
    }
    ActionSchema out = a;
    out.add.insert(out.add.end(), add_delta.begin(), add_delta.end());
    out.del.insert(out.del.end(), del_delta.begin(), del_delta.end());
    return out;
}

ActionSchema make_explore_action(const ActionSchema& a, std::string_view anchor_param) {
    if (a.find_param(anchor_param) == nullptr) {
        throw SemanticError("action " + a.name + ": '" + std::string(anchor_param) + "' is not a parameter");
    }
    const std::string anchor(anchor_param);
    ActionSchema out = extend_precondition(
        a, {pos(std::string(kUnknownPredicate), {anchor}), neg(std::string(kExplorePredicate))});
    out = extend_effect(out, {pos(std::string(kExplorePredicate))}, {pos(std::string(kUnknownPredicate), {anchor})});
    out.name = std::string(kExplorePrefix) + a.name;
    return out;
}

}  // namespace egoplan::pddl
