#pragma once

#include <string_view>

#include "egoplan/pddl/types.hpp"

namespace egoplan::pddl {

/// Reads the typed-STRIPS subset documented in docs/pddl-subset.md.
/// Throws ParseError for malformed text and SemanticError for unsupported
/// constructs or unresolved names.
Domain parse_domain(std::string_view text);

Problem parse_problem(std::string_view text, const Domain& dom);

}  // namespace egoplan::pddl
