#pragma once

#include <compare>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace egoplan::pddl {

/// Raised by the PDDL reader on malformed input. Line and column are 1-based.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, std::size_t col, std::string expected);

    std::size_t line() const { return line_; }
    std::size_t col() const { return col_; }
    const std::string& expected() const { return expected_; }

private:
    std::size_t line_;
    std::size_t col_;
    std::string expected_;
};

/// Well-formed input that violates the supported fragment or references
/// undeclared names.
class SemanticError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NotApplicable : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::string_view kRootType = "object";

inline bool is_variable(std::string_view term) { return !term.empty() && term.front() == '?'; }

struct TypedParam {
    std::string name;
    std::string type;

    friend bool operator==(const TypedParam&, const TypedParam&) = default;
};

struct TypeDecl {
    std::string name;
    std::string parent{kRootType};

    friend bool operator==(const TypeDecl&, const TypeDecl&) = default;
};

struct PredicateSchema {
    std::string name;
    std::vector<TypedParam> params;

    std::size_t arity() const { return params.size(); }
    friend bool operator==(const PredicateSchema&, const PredicateSchema&) = default;
};

/// A possibly negated atom over variables (`?x`) and constants. The
/// predicate `=` is the equality built-in.
struct Literal {
    bool positive{true};
    std::string predicate;
    std::vector<std::string> args;

    bool is_equality() const { return predicate == "="; }
    Literal negated() const { return Literal{!positive, predicate, args}; }

    friend auto operator<=>(const Literal&, const Literal&) = default;
    friend bool operator==(const Literal&, const Literal&) = default;
};

Literal pos(std::string predicate, std::vector<std::string> args = {});
Literal neg(std::string predicate, std::vector<std::string> args = {});

/// Parametric STRIPS action. `add` and `del` hold positive literals only.
/// Equality compares the precondition and effect lists as sets.
struct ActionSchema {
    std::string name;
    std::vector<TypedParam> params;
    std::vector<Literal> pre;
    std::vector<Literal> add;
    std::vector<Literal> del;

    const TypedParam* find_param(std::string_view var) const;
    friend bool operator==(const ActionSchema& a, const ActionSchema& b);
};

struct Domain {
    std::string name;
    std::vector<std::string> requirements;
    std::vector<TypeDecl> types;
    std::vector<PredicateSchema> predicates;
    std::vector<ActionSchema> actions;

    bool has_type(std::string_view type) const;
    const PredicateSchema* find_predicate(std::string_view name) const;
    const ActionSchema* find_action(std::string_view name) const;

    /// Predicates never touched by any action effect.
    std::set<std::string> static_predicates() const;

    /// Checks every type/predicate reference; throws SemanticError.
    void validate() const;

    friend bool operator==(const Domain&, const Domain&) = default;
};

struct ObjectConst {
    std::string name;
    std::string type;

    friend auto operator<=>(const ObjectConst&, const ObjectConst&) = default;
    friend bool operator==(const ObjectConst&, const ObjectConst&) = default;
};

/// Ground atom; ordering is lexicographic by predicate then arguments.
struct GroundAtom {
    std::string predicate;
    std::vector<std::string> args;

    std::string to_string() const;
    friend auto operator<=>(const GroundAtom&, const GroundAtom&) = default;
    friend bool operator==(const GroundAtom&, const GroundAtom&) = default;
};

GroundAtom atom(std::string predicate, std::vector<std::string> args = {});

/// Closed-world state: atoms absent from the set are false.
class State {
public:
    State() = default;
    State(std::initializer_list<GroundAtom> atoms) : atoms_(atoms) {}
    explicit State(std::set<GroundAtom> atoms) : atoms_(std::move(atoms)) {}

    bool contains(const GroundAtom& a) const { return atoms_.contains(a); }
    void insert(GroundAtom a) { atoms_.insert(std::move(a)); }
    void erase(const GroundAtom& a) { atoms_.erase(a); }
    std::size_t size() const { return atoms_.size(); }
    bool empty() const { return atoms_.empty(); }

    const std::set<GroundAtom>& atoms() const { return atoms_; }
    auto begin() const { return atoms_.begin(); }
    auto end() const { return atoms_.end(); }

    friend bool operator==(const State&, const State&) = default;

private:
    std::set<GroundAtom> atoms_;
};

/// Either a plain conjunction over constants or an existential conjunction
/// over typed variables.
struct Goal {
    std::vector<TypedParam> vars;
    std::vector<Literal> conjunction;

    bool existential() const { return !vars.empty(); }
    friend bool operator==(const Goal&, const Goal&) = default;
};

struct Problem {
    std::string name;
    std::string domain_name;
    std::vector<ObjectConst> objects;
    State init;
    Goal goal;

    const ObjectConst* find_object(std::string_view name) const;

    /// Checks declarations against `dom`; throws SemanticError.
    void validate(const Domain& dom) const;

    friend bool operator==(const Problem&, const Problem&) = default;
};

/// Fully instantiated action in string form.
struct GroundAction {
    std::string schema;
    std::vector<std::string> args;
    std::vector<GroundAtom> pre_pos;
    std::vector<GroundAtom> pre_neg;
    std::vector<GroundAtom> add;
    std::vector<GroundAtom> del;
    bool synthetic{false};

    /// PDDL call syntax, e.g. `(MoveAgent agent0 l1 l2 MoveAhead)`.
    std::string to_string() const;
    friend bool operator==(const GroundAction&, const GroundAction&) = default;
};

struct GroundGoal {
    std::vector<GroundAtom> pos;
    std::vector<GroundAtom> neg;
};

bool type_matches(std::string_view declared, std::string_view required);

}  // namespace egoplan::pddl
