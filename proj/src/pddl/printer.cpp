#include "egoplan/pddl/printer.hpp"

#include <sstream>

namespace egoplan::pddl {

namespace {

constexpr const char* kIndent = "    ";

std::string params_text(const std::vector<TypedParam>& params) {
    std::string out;
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (i > 0) out += ' ';
        out += params[i].name + " - " + params[i].type;
    }
    return out;
}

void print_conjunction(std::ostringstream& os, const std::vector<std::string>& parts, const std::string& indent) {
    if (parts.empty()) {
        os << "(and )";
        return;
    }
    os << "(and";
    for (const auto& p : parts) os << '\n' << indent << p;
    os << ')';
}

}  // namespace

std::string print_literal(const Literal& lit) {
    std::string inner = "(" + lit.predicate;
    for (const auto& a : lit.args) inner += " " + a;
    inner += ")";
    return lit.positive ? inner : "(not " + inner + ")";
}

std::string print_action(const ActionSchema& act) {
    std::ostringstream os;
    const std::string body = std::string(kIndent) + kIndent + kIndent;
    os << kIndent << "(:action " << act.name << '\n';
    os << kIndent << kIndent << ":parameters (" << params_text(act.params) << ")\n";
    std::vector<std::string> pre;
    for (const auto& l : act.pre) pre.push_back(print_literal(l));
    os << kIndent << kIndent << ":precondition ";
    print_conjunction(os, pre, body);
    os << '\n';
    std::vector<std::string> eff;
    for (const auto& l : act.del) eff.push_back(print_literal(l.negated()));
    for (const auto& l : act.add) eff.push_back(print_literal(l));
    os << kIndent << kIndent << ":effect ";
    print_conjunction(os, eff, body);
    os << '\n' << kIndent << ")\n";
    return os.str();
}

std::string print_domain(const Domain& dom) {
    std::ostringstream os;
    os << "(define (domain " << dom.name << ")\n";
    if (!dom.requirements.empty()) {
        os << kIndent << "(:requirements";
        for (const auto& r : dom.requirements) os << ' ' << r;
        os << ")\n";
    }
    os << kIndent << "(:types\n";
    for (const auto& t : dom.types) os << kIndent << kIndent << t.name << " - " << t.parent << '\n';
    os << kIndent << ")\n\n";
    os << kIndent << "(:predicates\n";
    for (const auto& p : dom.predicates) {
        os << kIndent << kIndent << '(' << p.name;
        if (!p.params.empty()) os << ' ' << params_text(p.params);
        os << ")\n";
    }
    os << kIndent << ")\n";
    for (const auto& a : dom.actions) os << '\n' << print_action(a);
    os << ")\n";
    return os.str();
}

std::string print_problem(const Problem& prob) {
    std::ostringstream os;
    os << "(define (problem " << prob.name << ")\n";
    os << kIndent << "(:domain " << prob.domain_name << ")\n\n";
    os << kIndent << "(:objects\n";
    for (std::size_t i = 0; i < prob.objects.size();) {
        std::size_t j = i;
        os << kIndent << kIndent;
        while (j < prob.objects.size() && prob.objects[j].type == prob.objects[i].type) {
            os << prob.objects[j].name << ' ';
            ++j;
        }
        os << "- " << prob.objects[i].type << '\n';
        i = j;
    }
    os << kIndent << ")\n\n";
    os << kIndent << "(:init\n";
    for (const auto& a : prob.init) os << kIndent << kIndent << a.to_string() << '\n';
    os << kIndent << ")\n\n";
    os << kIndent << "(:goal\n";
    std::vector<std::string> parts;
    for (const auto& l : prob.goal.conjunction) parts.push_back(print_literal(l));
    const std::string inner = std::string(kIndent) + kIndent + kIndent + kIndent;
    if (prob.goal.existential()) {
        os << kIndent << kIndent << "(exists\n";
        os << kIndent << kIndent << kIndent << '(' << params_text(prob.goal.vars) << ")\n";
        os << kIndent << kIndent << kIndent;
        print_conjunction(os, parts, inner);
        os << ")\n";
    } else {
        os << kIndent << kIndent;
        print_conjunction(os, parts, std::string(kIndent) + kIndent + kIndent);
        os << '\n';
    }
    os << kIndent << ")\n";
    os << ")\n";
    return os.str();
}

}  // namespace egoplan::pddl
