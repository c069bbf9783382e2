#pragma once

#include <string>

#include "egoplan/pddl/types.hpp"

namespace egoplan::pddl {

// Both printers are byte-stable: output depends only on the value, with
// init atoms emitted in canonical order and objects grouped by type runs.
std::string print_domain(const Domain& dom);
std::string print_problem(const Problem& prob);

std::string print_literal(const Literal& lit);
std::string print_action(const ActionSchema& act);

}  // namespace egoplan::pddl
