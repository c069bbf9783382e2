#include "egoplan/agent/domain.hpp"

#include "egoplan/pddl/parser.hpp"

namespace egoplan::agent {

const pddl::Domain& runtime_domain() {
    static const pddl::Domain dom = pddl::parse_domain(runtime_domain_text());
    return dom;
}

}  // namespace egoplan::agent
