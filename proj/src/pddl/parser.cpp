#include "egoplan/pddl/parser.hpp"

#include <algorithm>
#include <cctype>

namespace egoplan::pddl {

namespace {

struct Sexpr {
    bool is_list{false};
    std::string atom;
    std::vector<Sexpr> items;
    std::size_t line{1};
    std::size_t col{1};
};

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) { return std::tolower(c); });
    return out;
}

class Reader {
public:
    explicit Reader(std::string_view text) : text_(text) {}

    Sexpr read_top() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(line_, col_, "'('");
        if (text_[pos_] != '(') throw ParseError(line_, col_, "'('");
        Sexpr e = read();
        skip_ws();
        if (pos_ < text_.size()) throw ParseError(line_, col_, "end of input");
        return e;
    }

private:
    void advance() {
        if (text_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_ws() {
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == ';') {
                while (pos_ < text_.size() && text_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }

    Sexpr read() {
        skip_ws();
        if (pos_ >= text_.size()) throw ParseError(line_, col_, "expression");
        Sexpr e;
        e.line = line_;
        e.col = col_;
        if (text_[pos_] == ')') throw ParseError(line_, col_, "expression");
        if (text_[pos_] == '(') {
            e.is_list = true;
            advance();
            for (;;) {
                skip_ws();
                if (pos_ >= text_.size()) throw ParseError(line_, col_, "')'");
                if (text_[pos_] == ')') {
                    advance();
                    break;
                }
                e.items.push_back(read());
            }
            return e;
        }
        std::size_t start = pos_;
        while (pos_ < text_.size()) {
            char c = text_[pos_];
            if (c == '(' || c == ')' || c == ';' || std::isspace(static_cast<unsigned char>(c))) break;
            advance();
        }
        e.atom = std::string(text_.substr(start, pos_ - start));
        return e;
    }

    std::string_view text_;
    std::size_t pos_{0};
    std::size_t line_{1};
    std::size_t col_{1};
};

[[noreturn]] void expect_fail(const Sexpr& at, const std::string& what) { throw ParseError(at.line, at.col, what); }

const std::string& expect_atom(const Sexpr& e, const std::string& what) {
    if (e.is_list) expect_fail(e, what);
    return e.atom;
}

void expect_keyword(const Sexpr& e, std::string_view kw) {
    if (e.is_list || lower(e.atom) != kw) expect_fail(e, "'" + std::string(kw) + "'");
}

bool head_is(const Sexpr& e, std::string_view kw) {
    return e.is_list && !e.items.empty() && !e.items[0].is_list && lower(e.items[0].atom) == kw;
}

void set_type(TypedParam& p, const std::string& t) { p.type = t; }
void set_type(TypeDecl& d, const std::string& t) { d.parent = t; }
void set_type(ObjectConst& o, const std::string& t) { o.type = t; }

/// `a b - t c - u d` style list; untyped names default to `object`.
template <typename Out>
std::vector<Out> typed_list(const std::vector<Sexpr>& items, std::size_t begin, bool want_vars) {
    std::vector<Out> out;
    std::size_t pending = 0;
    for (std::size_t i = begin; i < items.size(); ++i) {
        const auto& tok = items[i];
        const std::string& name = expect_atom(tok, want_vars ? "variable" : "name");
        if (name == "-") {
            if (i + 1 >= items.size()) expect_fail(tok, "type name after '-'");
            const auto& type_tok = items[i + 1];
            if (type_tok.is_list) {
                throw SemanticError("unsupported construct: either-type at line " + std::to_string(type_tok.line));
            }
            if (pending == out.size()) expect_fail(tok, "name before '-'");
            for (std::size_t k = pending; k < out.size(); ++k) set_type(out[k], type_tok.atom);
            pending = out.size();
            ++i;
            continue;
        }
        if (want_vars && !is_variable(name)) expect_fail(tok, "variable");
        out.push_back(Out{name, std::string(kRootType)});
    }
    return out;
}

const std::set<std::string>& supported_requirements() {
    static const std::set<std::string> reqs{":strips", ":typing", ":equality", ":negative-preconditions"};
    return reqs;
}

[[noreturn]] void unsupported(const Sexpr& e, const std::string& what) {
    throw SemanticError("unsupported construct: " + what + " at line " + std::to_string(e.line));
}

Literal read_atom_literal(const Sexpr& e, bool positive) {
    if (!e.is_list || e.items.empty()) expect_fail(e, "atomic formula");
    const std::string& head = expect_atom(e.items[0], "predicate name");
    Literal lit{positive, head, {}};
    for (std::size_t i = 1; i < e.items.size(); ++i) lit.args.push_back(expect_atom(e.items[i], "term"));
    return lit;
}

const std::set<std::string>& unsupported_heads() {
    static const std::set<std::string> heads{"or",     "imply",    "exists",   "forall",   "when",
                                             "increase", "decrease", "assign", "scale-up", "scale-down",
                                             "preference"};
    return heads;
}

// `at`/`over` are ordinary predicate names unless they introduce a timed
// condition such as (at start ...) or (over all ...).
bool is_unsupported_head(const Sexpr& e, const std::string& head) {
    if (unsupported_heads().contains(head)) return true;
    if ((head == "at" || head == "over") && e.items.size() == 3 && !e.items[1].is_list) {
        const std::string second = lower(e.items[1].atom);
        return second == "start" || second == "end" || second == "all";
    }
    return false;
}

void read_conjunction(const Sexpr& e, std::vector<Literal>& out, bool allow_negation) {
    if (!e.is_list) expect_fail(e, "formula");
    if (e.items.empty()) return;
    const std::string head = e.items[0].is_list ? std::string() : lower(e.items[0].atom);
    if (head == "and") {
        for (std::size_t i = 1; i < e.items.size(); ++i) read_conjunction(e.items[i], out, allow_negation);
        return;
    }
    if (head == "not") {
        if (!allow_negation) unsupported(e, "negation");
        if (e.items.size() != 2) expect_fail(e, "single formula under 'not'");
        const auto& inner = e.items[1];
        if (inner.is_list && !inner.items.empty() && !inner.items[0].is_list) {
            std::string ih = lower(inner.items[0].atom);
            if (ih == "and" || ih == "not" || is_unsupported_head(inner, ih)) unsupported(inner, "'" + ih + "' under negation");
        }
        out.push_back(read_atom_literal(inner, false));
        return;
    }
    if (is_unsupported_head(e, head)) unsupported(e, "'" + head + "'");
    out.push_back(read_atom_literal(e, true));
}

ActionSchema read_action(const Sexpr& e) {
    if (e.items.size() < 2) expect_fail(e, "action name");
    ActionSchema act;
    act.name = expect_atom(e.items[1], "action name");
    for (std::size_t i = 2; i < e.items.size(); i += 2) {
        const auto& key = e.items[i];
        const std::string k = lower(expect_atom(key, "action keyword"));
        if (i + 1 >= e.items.size()) expect_fail(key, "value after " + k);
        const auto& val = e.items[i + 1];
        if (k == ":parameters") {
            if (!val.is_list) expect_fail(val, "parameter list");
            act.params = typed_list<TypedParam>(val.items, 0, true);
        } else if (k == ":precondition") {
            read_conjunction(val, act.pre, true);
        } else if (k == ":effect") {
            std::vector<Literal> effects;
            read_conjunction(val, effects, true);
            for (auto& l : effects) {
                if (l.is_equality()) unsupported(val, "equality in effect");
                if (l.positive) {
                    act.add.push_back(std::move(l));
                } else {
                    l.positive = true;
                    act.del.push_back(std::move(l));
                }
            }
        } else {
            unsupported(key, "action keyword '" + k + "'");
        }
    }
    return act;
}

}  // namespace

Domain parse_domain(std::string_view text) {
    Sexpr top = Reader(text).read_top();
    if (top.items.empty()) expect_fail(top, "'define'");
    expect_keyword(top.items[0], "define");
    if (top.items.size() < 2 || !head_is(top.items[1], "domain") || top.items[1].items.size() != 2) {
        expect_fail(top.items.size() > 1 ? top.items[1] : top, "(domain <name>)");
    }
    Domain dom;
    dom.name = expect_atom(top.items[1].items[1], "domain name");
    for (std::size_t i = 2; i < top.items.size(); ++i) {
        const auto& sec = top.items[i];
        if (!sec.is_list || sec.items.empty()) expect_fail(sec, "domain section");
        const std::string head = lower(expect_atom(sec.items[0], "section keyword"));
        if (head == ":requirements") {
            for (std::size_t k = 1; k < sec.items.size(); ++k) {
                std::string r = lower(expect_atom(sec.items[k], "requirement"));
                if (!supported_requirements().contains(r)) unsupported(sec.items[k], "requirement " + r);
                dom.requirements.push_back(r);
            }
        } else if (head == ":types") {
            auto decls = typed_list<TypeDecl>(sec.items, 1, false);
            for (auto& d : decls) {
                if (d.name == kRootType) continue;
                dom.types.push_back(std::move(d));
            }
        } else if (head == ":predicates") {
            for (std::size_t k = 1; k < sec.items.size(); ++k) {
                const auto& p = sec.items[k];
                if (!p.is_list || p.items.empty()) expect_fail(p, "predicate declaration");
                PredicateSchema ps;
                ps.name = expect_atom(p.items[0], "predicate name");
                ps.params = typed_list<TypedParam>(p.items, 1, true);
                dom.predicates.push_back(std::move(ps));
            }
        } else if (head == ":action") {
            dom.actions.push_back(read_action(sec));
        } else {
            unsupported(sec, "domain section '" + head + "'");
        }
    }
    dom.validate();
    return dom;
}

Problem parse_problem(std::string_view text, const Domain& dom) {
    Sexpr top = Reader(text).read_top();
    if (top.items.empty()) expect_fail(top, "'define'");
    expect_keyword(top.items[0], "define");
    if (top.items.size() < 2 || !head_is(top.items[1], "problem") || top.items[1].items.size() != 2) {
        expect_fail(top.items.size() > 1 ? top.items[1] : top, "(problem <name>)");
    }
    Problem prob;
    prob.name = expect_atom(top.items[1].items[1], "problem name");
    bool have_goal = false;
    for (std::size_t i = 2; i < top.items.size(); ++i) {
        const auto& sec = top.items[i];
        if (!sec.is_list || sec.items.empty()) expect_fail(sec, "problem section");
        const std::string head = lower(expect_atom(sec.items[0], "section keyword"));
        if (head == ":domain") {
            if (sec.items.size() != 2) expect_fail(sec, "(:domain <name>)");
            prob.domain_name = expect_atom(sec.items[1], "domain name");
            if (prob.domain_name != dom.name) {
                throw SemanticError("problem refers to domain '" + prob.domain_name + "', expected '" + dom.name + "'");
            }
        } else if (head == ":requirements") {
            continue;
        } else if (head == ":objects") {
            prob.objects = typed_list<ObjectConst>(sec.items, 1, false);
        } else if (head == ":init") {
            for (std::size_t k = 1; k < sec.items.size(); ++k) {
                const auto& a = sec.items[k];
                if (head_is(a, "not")) unsupported(a, "negative literal in init");
                Literal lit = read_atom_literal(a, true);
                for (const auto& arg : lit.args) {
                    if (is_variable(arg)) expect_fail(a, "ground atom");
                }
                prob.init.insert(GroundAtom{lit.predicate, lit.args});
            }
        } else if (head == ":goal") {
            if (sec.items.size() != 2) expect_fail(sec, "single goal formula");
            const auto& g = sec.items[1];
            if (head_is(g, "exists")) {
                if (g.items.size() != 3 || !g.items[1].is_list) expect_fail(g, "(exists (<vars>) <formula>)");
                prob.goal.vars = typed_list<TypedParam>(g.items[1].items, 0, true);
                read_conjunction(g.items[2], prob.goal.conjunction, true);
            } else {
                read_conjunction(g, prob.goal.conjunction, true);
            }
            have_goal = true;
        } else {
            unsupported(sec, "problem section '" + head + "'");
        }
    }
    if (!have_goal) expect_fail(top, "(:goal ...)");
    if (prob.domain_name.empty()) prob.domain_name = dom.name;
    prob.validate(dom);
    return prob;
}

}  // namespace egoplan::pddl
