#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "egoplan/agent/agent.hpp"
#include "egoplan/env/world.hpp"

namespace egoplan::bench {

using Rational = boost::multiprecision::cpp_rational;

/// Decimal rendering rounded half-up to `places` digits.
std::string format_decimal(const Rational& r, int places = 6);

/// What the metrics need from one episode.
struct EpisodeOutcome {
    bool success{false};
    std::size_t gc_satisfied{0};
    std::size_t gc_total{0};
    std::size_t steps{0};   // L̂
    std::size_t expert{0};  // L*
    double planner_ms{0.0};
};

EpisodeOutcome outcome_of(const agent::EpisodeResult& r, std::size_t expert);

struct MetricsRow {
    std::string family;
    std::size_t episodes{0};
    Rational sr, gc, plwsr, plwgc;
    Rational mean_steps;
    double mean_planner_ms{0.0};

    /// 0 ≤ PLWSR ≤ SR ≤ GC ≤ 1 and 0 ≤ PLWGC ≤ GC.
    bool bounds_ok() const;
};

/// SR, GC and the path-length weighted variants s·L*/max(L*, L̂). An
/// episode with L* = L̂ = 0 has weight 1. Throws on empty input.
MetricsRow compute_metrics(const std::vector<EpisodeOutcome>& episodes, std::string family = "all");
MetricsRow compute_metrics(const std::vector<agent::EpisodeResult>& results, const std::vector<std::size_t>& experts,
                           std::string family = "all");

/// The fully observable problem restricted to entities an optimal plan can
/// use: fixed receptacles, entities whose subtype the goal names, and the
/// movable receptacles holding those.
pddl::Problem expert_problem(const env::EnvTask& task);

/// Env steps of a shortest plan on expert_problem. Throws std::logic_error
/// when no plan exists within `budget`.
std::size_t expert_length(const env::EnvTask& task, const planner::Budget& budget = {});

struct SuiteConfig {
    std::vector<std::string> families;  // empty: all twelve
    std::size_t episodes{20};           // per family
    std::uint64_t first_seed{0};
    std::vector<int> sizes{5, 6, 7, 8, 9};  // episode i uses sizes[i % n]
    double wall_fraction{0.1};
    int distractor_objects{4};
    int distractor_receptacles{2};
    agent::PlannerKind planner{agent::PlannerKind::Gbfs};
    planner::Budget budget{};
    double fault_rate{0.0};
    int fault_shots{0};
    bool fault_recovery{true};
    int pre_explore{0};
    bool prioritize_frontier{true};
    bool explore_empty_hands{true};
    bool expert{true};   // compute L*; without it PLW uses L* = L̂
    int threads{1};

    void validate() const;
};

/// Reads a JSON object; unknown keys are an error. Missing keys keep defaults.
SuiteConfig parse_suite_config(const std::string& json_text);
std::string suite_config_json(const SuiteConfig& cfg);

struct EpisodeRecord {
    std::string family;
    std::uint64_t seed{0};
    int size{0};
    std::string task;  // family:Param,...
    EpisodeOutcome outcome;
    agent::EpisodeResult result;
};

struct SuiteResult {
    std::vector<EpisodeRecord> episodes;  // family order, then seed order
    std::vector<MetricsRow> rows;         // one per family present, then "all"
};

/// Scenario seeds, fault seeds and agent seeds are derived from the episode
/// seed, so results do not depend on thread count.
SuiteResult run_suite(const SuiteConfig& cfg, const std::function<void(const EpisodeRecord&)>& progress = {});

/// Header: family,SR,GC,PLWSR,PLWGC,episodes,mean_steps
std::string metrics_csv(const std::vector<MetricsRow>& rows);
/// Aligned text table including mean planner time.
std::string metrics_table(const std::vector<MetricsRow>& rows);
/// One line per episode: family,seed,size,task,success,gc_satisfied,gc_total,steps,expert
std::string episodes_csv(const std::vector<EpisodeRecord>& episodes);

/// metrics.csv, episodes.csv and traces/<family>_<seed>.jsonl under `dir`.
void write_suite(const SuiteResult& res, const std::string& dir);

}  // namespace egoplan::bench
