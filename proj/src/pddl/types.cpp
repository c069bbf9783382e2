#include "egoplan/pddl/types.hpp"

#include <algorithm>
#include <map>

namespace egoplan::pddl {

ParseError::ParseError(std::size_t line, std::size_t col, std::string expected)
    : std::runtime_error("parse error at " + std::to_string(line) + ":" + std::to_string(col) +
                         ": expected " + expected),
      line_(line),
      col_(col),
      expected_(std::move(expected)) {}

Literal pos(std::string predicate, std::vector<std::string> args) {
    return Literal{true, std::move(predicate), std::move(args)};
}

Literal neg(std::string predicate, std::vector<std::string> args) {
    return Literal{false, std::move(predicate), std::move(args)};
}

GroundAtom atom(std::string predicate, std::vector<std::string> args) {
    return GroundAtom{std::move(predicate), std::move(args)};
}

std::string GroundAtom::to_string() const {
    std::string out = "(" + predicate;
    for (const auto& a : args) {
        out += ' ';
        out += a;
    }
    out += ')';
    return out;
}

std::string GroundAction::to_string() const {
    std::string out = "(" + schema;
    for (const auto& a : args) {
        out += ' ';
        out += a;
    }
    out += ')';
    return out;
}

bool type_matches(std::string_view declared, std::string_view required) {
    return required == kRootType || declared == required;
}

namespace {

std::vector<Literal> sorted_unique(std::vector<Literal> v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
    return v;
}

}  // namespace

const TypedParam* ActionSchema::find_param(std::string_view var) const {
    for (const auto& p : params) {
        if (p.name == var) return &p;
    }
    return nullptr;
}

bool operator==(const ActionSchema& a, const ActionSchema& b) {
    return a.name == b.name && a.params == b.params && sorted_unique(a.pre) == sorted_unique(b.pre) &&
           sorted_unique(a.add) == sorted_unique(b.add) && sorted_unique(a.del) == sorted_unique(b.del);
}

bool Domain::has_type(std::string_view type) const {
    if (type == kRootType) return true;
    return std::any_of(types.begin(), types.end(), [&](const TypeDecl& t) { return t.name == type; });
}

const PredicateSchema* Domain::find_predicate(std::string_view pname) const {
    for (const auto& p : predicates) {
        if (p.name == pname) return &p;
    }
    return nullptr;
}

const ActionSchema* Domain::find_action(std::string_view aname) const {
    for (const auto& a : actions) {
        if (a.name == aname) return &a;
    }
    return nullptr;
}

std::set<std::string> Domain::static_predicates() const {
    std::set<std::string> result;
    for (const auto& p : predicates) result.insert(p.name);
    for (const auto& a : actions) {
        for (const auto& l : a.add) result.erase(l.predicate);
        for (const auto& l : a.del) result.erase(l.predicate);
    }
    return result;
}

namespace {

void check_literal(const Domain& dom, const std::string& where, const Literal& lit,
                   const std::map<std::string, std::string>& vars,
                   const std::map<std::string, std::string>* constants, bool allow_equality) {
    if (lit.is_equality()) {
        if (!allow_equality) throw SemanticError(where + ": unsupported construct: equality outside a precondition");
        if (lit.args.size() != 2) throw SemanticError(where + ": arity mismatch for '='");
    }
    const PredicateSchema* pred = lit.is_equality() ? nullptr : dom.find_predicate(lit.predicate);
    if (!lit.is_equality() && pred == nullptr) throw SemanticError(where + ": unknown predicate '" + lit.predicate + "'");
    if (pred != nullptr && pred->arity() != lit.args.size()) {
        throw SemanticError(where + ": arity mismatch for '" + lit.predicate + "': expected " +
                            std::to_string(pred->arity()) + ", got " + std::to_string(lit.args.size()));
    }
    for (std::size_t i = 0; i < lit.args.size(); ++i) {
        const auto& arg = lit.args[i];
        std::string arg_type;
        if (is_variable(arg)) {
            auto it = vars.find(arg);
            if (it == vars.end()) throw SemanticError(where + ": unbound variable '" + arg + "'");
            arg_type = it->second;
        } else {
            if (constants == nullptr) throw SemanticError(where + ": constant '" + arg + "' in action body");
            auto it = constants->find(arg);
            if (it == constants->end()) throw SemanticError(where + ": undeclared object '" + arg + "'");
            arg_type = it->second;
        }
        if (pred != nullptr && !type_matches(arg_type, pred->params[i].type)) {
            throw SemanticError(where + ": argument '" + arg + "' of type '" + arg_type + "' does not match '" +
                                pred->params[i].type + "' in '" + lit.predicate + "'");
        }
    }
}

std::map<std::string, std::string> param_map(const Domain& dom, const std::string& where,
                                             const std::vector<TypedParam>& params) {
    std::map<std::string, std::string> vars;
    for (const auto& p : params) {
        if (!is_variable(p.name)) throw SemanticError(where + ": parameter '" + p.name + "' is not a variable");
        if (!dom.has_type(p.type)) throw SemanticError(where + ": unknown type '" + p.type + "'");
        if (!vars.emplace(p.name, p.type).second) throw SemanticError(where + ": duplicate parameter '" + p.name + "'");
    }
    return vars;
}

}  // namespace

void Domain::validate() const {
    std::set<std::string> seen_types;
    for (const auto& t : types) {
        if (t.name.empty()) throw SemanticError("empty type name");
        if (t.name == kRootType) continue;
        if (!seen_types.insert(t.name).second) throw SemanticError("duplicate type '" + t.name + "'");
        if (t.parent != kRootType) {
            throw SemanticError("unsupported construct: type hierarchy ('" + t.name + " - " + t.parent + "')");
        }
    }
    std::set<std::string> seen_preds;
    for (const auto& p : predicates) {
        if (!seen_preds.insert(p.name).second) throw SemanticError("duplicate predicate '" + p.name + "'");
        param_map(*this, "predicate " + p.name, p.params);
    }
    std::set<std::string> seen_actions;
    for (const auto& a : actions) {
        const std::string where = "action " + a.name;
        if (!seen_actions.insert(a.name).second) throw SemanticError("duplicate action '" + a.name + "'");
        auto vars = param_map(*this, where, a.params);
        for (const auto& l : a.pre) check_literal(*this, where, l, vars, nullptr, true);
        for (const auto& l : a.add) {
            if (!l.positive) throw SemanticError(where + ": negative literal in add list");
            check_literal(*this, where, l, vars, nullptr, false);
        }
        for (const auto& l : a.del) {
            if (!l.positive) throw SemanticError(where + ": negative literal in delete list");
            check_literal(*this, where, l, vars, nullptr, false);
        }
    }
}

const ObjectConst* Problem::find_object(std::string_view oname) const {
    for (const auto& o : objects) {
        if (o.name == oname) return &o;
    }
    return nullptr;
}

void Problem::validate(const Domain& dom) const {
    std::map<std::string, std::string> constants;
    for (const auto& o : objects) {
        if (!dom.has_type(o.type)) throw SemanticError("object '" + o.name + "': unknown type '" + o.type + "'");
        if (!constants.emplace(o.name, o.type).second) throw SemanticError("duplicate object '" + o.name + "'");
    }
    const std::map<std::string, std::string> no_vars;
    for (const auto& a : init) {
        if (a.predicate == "=") throw SemanticError("init: equality atom");
        check_literal(dom, "init", Literal{true, a.predicate, a.args}, no_vars, &constants, false);
    }
    auto vars = param_map(dom, "goal", goal.vars);
    for (const auto& l : goal.conjunction) check_literal(dom, "goal", l, vars, &constants, true);
}

}  // namespace egoplan::pddl
