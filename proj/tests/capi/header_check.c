/* Compiled as C to keep egoplan.h free of C++-only constructs. */
#include "egoplan/egoplan.h"

int egoplan_c_header_smoke(void) {
    egoplan_domain* dom = NULL;
    egoplan_search_options opts;
    egoplan_search_options_default(&opts);
    if (egoplan_domain_runtime(&dom) != EGOPLAN_OK) return 0;
    egoplan_domain_free(dom);
    return opts.algo == EGOPLAN_ALGO_GBFS && egoplan_version()[0] != '\0';
}
