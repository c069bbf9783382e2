#pragma once

#include <string_view>

#include "egoplan/pddl/types.hpp"

namespace egoplan::agent {

/// Text of the household domain the agent plans with (embedded at build time).
std::string_view runtime_domain_text();

/// Parsed once and cached; thread-safe.
const pddl::Domain& runtime_domain();

}  // namespace egoplan::agent
