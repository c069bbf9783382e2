/* C interface to the egoplan library.
 *
 * Conventions:
 *  - Every fallible call returns an egoplan_status. On failure a message is
 *    available from egoplan_last_error() on the same thread until the next
 *    call on that thread.
 *  - Strings returned through `char**` are owned by the caller and released
 *    with egoplan_free_string(). Output pointers are left untouched on error.
 *  - Handles are opaque; each *_free accepts NULL.
 *  - Handles may be used from several threads only with external locking.
 */
#ifndef EGOPLAN_H
#define EGOPLAN_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  if defined(EGOPLAN_BUILDING_LIBRARY)
#    define EGOPLAN_API __declspec(dllexport)
#  else
#    define EGOPLAN_API __declspec(dllimport)
#  endif
#else
#  define EGOPLAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum egoplan_status {
    EGOPLAN_OK = 0,
    EGOPLAN_UNSOLVABLE = 1,       /* search space exhausted without a plan */
    EGOPLAN_BUDGET = 2,           /* node or time budget hit */
    EGOPLAN_EPISODE_FAILED = 3,   /* agent episode ended without success */
    EGOPLAN_INVALID_PLAN = 4,     /* plan replay failed */
    EGOPLAN_ERR_ARGUMENT = 10,    /* NULL handle, bad option value, unknown name */
    EGOPLAN_ERR_PARSE = 11,       /* malformed PDDL, scenario, plan or JSON text */
    EGOPLAN_ERR_SEMANTIC = 12,    /* well-formed text that does not type-check */
    EGOPLAN_ERR_IO = 13,          /* file system errors */
    EGOPLAN_ERR_NOT_FOUND = 14,   /* requested iteration or entity does not exist */
    EGOPLAN_ERR_INTERNAL = 15
} egoplan_status;

typedef enum egoplan_algo { EGOPLAN_ALGO_GBFS = 0, EGOPLAN_ALGO_BFS = 1 } egoplan_algo;
typedef enum egoplan_phase { EGOPLAN_PHASE_SOLVE = 0, EGOPLAN_PHASE_EXPLORE = 1 } egoplan_phase;

typedef struct egoplan_domain egoplan_domain;
typedef struct egoplan_problem egoplan_problem;
typedef struct egoplan_scenario egoplan_scenario;
typedef struct egoplan_env egoplan_env;

EGOPLAN_API const char* egoplan_version(void);
EGOPLAN_API const char* egoplan_last_error(void);
EGOPLAN_API void egoplan_free_string(char* s);

/* ---- PDDL ---------------------------------------------------------------- */

EGOPLAN_API egoplan_status egoplan_domain_parse(const char* text, egoplan_domain** out);
/* The domain the agent plans with. */
EGOPLAN_API egoplan_status egoplan_domain_runtime(egoplan_domain** out);
EGOPLAN_API egoplan_status egoplan_domain_print(const egoplan_domain* dom, char** out);
EGOPLAN_API void egoplan_domain_free(egoplan_domain* dom);

/* Parses and type-checks against `dom`. */
EGOPLAN_API egoplan_status egoplan_problem_parse(const egoplan_domain* dom, const char* text, egoplan_problem** out);
EGOPLAN_API egoplan_status egoplan_problem_print(const egoplan_problem* prob, char** out);
EGOPLAN_API void egoplan_problem_free(egoplan_problem* prob);

typedef struct egoplan_search_options {
    egoplan_algo algo;
    uint64_t max_nodes;  /* > 0 */
    int64_t max_time_ms; /* > 0 */
} egoplan_search_options;

typedef struct egoplan_search_stats {
    uint64_t expanded;
    uint64_t generated;
    double wall_ms;
    size_t plan_length; /* non-synthetic steps */
} egoplan_search_stats;

EGOPLAN_API void egoplan_search_options_default(egoplan_search_options* opts);

/* Grounds and solves. Returns EGOPLAN_OK with the plan (one
 * "(name arg ...)" line per action, synthetic steps omitted),
 * EGOPLAN_UNSOLVABLE or EGOPLAN_BUDGET. `stats` may be NULL. */
EGOPLAN_API egoplan_status egoplan_solve(const egoplan_domain* dom, const egoplan_problem* prob,
                                         const egoplan_search_options* opts, char** plan_out,
                                         egoplan_search_stats* stats);

/* Replays a plan in the same text format. EGOPLAN_OK when every step applies
 * and the goal holds at the end, EGOPLAN_INVALID_PLAN otherwise; `report`
 * (may be NULL) receives a one-line explanation either way. */
EGOPLAN_API egoplan_status egoplan_validate_plan(const egoplan_domain* dom, const egoplan_problem* prob,
                                                 const char* plan_text, char** report);

/* ---- scenarios ----------------------------------------------------------- */

typedef struct egoplan_generator_options {
    int width;
    int height;
    double wall_fraction;
    int distractor_objects;
    int distractor_receptacles;
} egoplan_generator_options;

EGOPLAN_API void egoplan_generator_options_default(egoplan_generator_options* opts);

EGOPLAN_API egoplan_status egoplan_scenario_parse(const char* text, egoplan_scenario** out);
EGOPLAN_API egoplan_status egoplan_scenario_load(const char* path, egoplan_scenario** out);
/* `task` is "family" (parameters drawn from the seed) or "family:P1,P2". */
EGOPLAN_API egoplan_status egoplan_scenario_generate(const char* task, uint64_t seed,
                                                     const egoplan_generator_options* opts,
                                                     egoplan_scenario** out);
EGOPLAN_API egoplan_status egoplan_scenario_print(const egoplan_scenario* sc, char** out);
/* Replaces the task. A bare family name keeps the current parameters when the
 * family matches. */
EGOPLAN_API egoplan_status egoplan_scenario_set_task(egoplan_scenario* sc, const char* task);
/* "family:P1,P2", or an empty string when the scenario has no task. */
EGOPLAN_API egoplan_status egoplan_scenario_task(const egoplan_scenario* sc, char** out);
/* The fully observable problem of the scenario in the runtime vocabulary. */
EGOPLAN_API egoplan_status egoplan_scenario_full_problem(const egoplan_scenario* sc, char** out);
/* Length in env steps of a shortest plan on the fully observable problem. */
EGOPLAN_API egoplan_status egoplan_scenario_expert_length(const egoplan_scenario* sc, size_t* out);
EGOPLAN_API void egoplan_scenario_free(egoplan_scenario* sc);

/* ---- environment --------------------------------------------------------- */

/* Perceptions are JSON objects:
 * {"failed","agent_location","held","edges":[[from,to,label]...],
 *  "entities":[{"id","subtype","kind","location","container","props","held"}...]} */
EGOPLAN_API egoplan_status egoplan_env_create(const egoplan_scenario* sc, double fault_rate, int fault_shots,
                                              uint64_t fault_seed, egoplan_env** out);
EGOPLAN_API egoplan_status egoplan_env_reset(egoplan_env* env, char** perception);
/* `action` is "MoveAhead", "RotateLeft", "RotateRight" or "Kind(target)". A
 * failed step is still EGOPLAN_OK; see `failed` and the perception. */
EGOPLAN_API egoplan_status egoplan_env_step(egoplan_env* env, const char* action, char** perception, int* failed);
/* {"success", "conditions":[{"label","satisfied"}...]} */
EGOPLAN_API egoplan_status egoplan_env_goal_check(const egoplan_env* env, char** status, int* success);
/* One JSON line per step so far. */
EGOPLAN_API egoplan_status egoplan_env_trace(const egoplan_env* env, char** out);
EGOPLAN_API void egoplan_env_free(egoplan_env* env);

/* ---- agent --------------------------------------------------------------- */

typedef struct egoplan_agent_options {
    egoplan_algo planner;
    uint64_t max_nodes;
    int64_t max_time_ms;
    int pre_explore;          /* random movement steps before planning */
    uint64_t seed;            /* agent randomness */
    int fault_recovery;       /* 0 ends the episode on the first failure */
    int prioritize_frontier;
    int explore_empty_hands;
    double fault_rate;        /* injected interaction failures */
    int fault_shots;
    uint64_t fault_seed;
} egoplan_agent_options;

EGOPLAN_API void egoplan_agent_options_default(egoplan_agent_options* opts);

/* Runs one episode. EGOPLAN_OK on success, EGOPLAN_EPISODE_FAILED otherwise;
 * the traces are filled in both cases. Either trace pointer may be NULL. */
EGOPLAN_API egoplan_status egoplan_run_episode(const egoplan_scenario* sc, const egoplan_agent_options* opts,
                                               char** agent_trace, char** env_trace);

/* Runs the episode and returns the PDDL problem (or, with `domain` set, the
 * domain) the agent built for `phase` at `iteration`. EGOPLAN_ERR_NOT_FOUND
 * when the episode never built it. */
EGOPLAN_API egoplan_status egoplan_dump_problem(const egoplan_scenario* sc, const egoplan_agent_options* opts,
                                                size_t iteration, egoplan_phase phase, int domain, char** out);

/* ---- benchmark ----------------------------------------------------------- */

/* Runs the suite described by `config_json` and writes metrics.csv,
 * episodes.csv and traces/ under `out_dir` (NULL: write nothing).
 * `threads` > 0 overrides the config. `table` receives the aligned text
 * table and `csv` the metrics CSV; either may be NULL. */
EGOPLAN_API egoplan_status egoplan_bench(const char* config_json, const char* out_dir, int threads, char** table,
                                         char** csv);

#ifdef __cplusplus
}
#endif

#endif /* EGOPLAN_H */
