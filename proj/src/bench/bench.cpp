#include "egoplan/bench/bench.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <type_traits>

#include "egoplan/agent/domain.hpp"
#include "egoplan/env/environment.hpp"
#include "egoplan/env/generator.hpp"
#include "egoplan/pddl/grounding.hpp"

namespace egoplan::bench {

std::string format_decimal(const Rational& r, int places) {
    using boost::multiprecision::cpp_int;
    cpp_int scale = 1;
    for (int i = 0; i < places; ++i) scale *= 10;
    cpp_int num = boost::multiprecision::numerator(r) * scale;
    const cpp_int den = boost::multiprecision::denominator(r);
    const bool negative = num < 0;
    if (negative) num = -num;
    cpp_int q = (num * 2 + den) / (den * 2);
    std::string digits = q.str();
    if (places > 0) {
        if (digits.size() <= static_cast<std::size_t>(places)) {
            digits.insert(0, static_cast<std::size_t>(places) + 1 - digits.size(), '0');
        }
        digits.insert(digits.size() - static_cast<std::size_t>(places), ".");
    }
    return (negative && q != 0 ? "-" : "") + digits;
}

EpisodeOutcome outcome_of(const agent::EpisodeResult& r, std::size_t expert) {
    EpisodeOutcome o;
    o.success = r.success;
    o.gc_satisfied = r.goal_status.satisfied();
    o.gc_total = r.goal_status.conditions.size();
    o.steps = static_cast<std::size_t>(r.steps);
    o.expert = expert;
    for (const auto& c : r.planner_calls) o.planner_ms += c.wall_ms;
    return o;
}

bool MetricsRow::bounds_ok() const {
    return 0 <= plwsr && plwsr <= sr && sr <= gc && gc <= 1 && 0 <= plwgc && plwgc <= gc;
}

MetricsRow compute_metrics(const std::vector<EpisodeOutcome>& episodes, std::string family) {
    if (episodes.empty()) throw std::invalid_argument("compute_metrics: no episodes");
    MetricsRow row;
    row.family = std::move(family);
    row.episodes = episodes.size();
    double planner_ms = 0.0;
    for (const auto& e : episodes) {
        const Rational s = e.success ? 1 : 0;
        const Rational gc = e.gc_total == 0 ? Rational(s) : Rational(e.gc_satisfied, e.gc_total);
        const std::size_t longest = std::max(e.expert, e.steps);
        const Rational weight = longest == 0 ? Rational(1) : Rational(e.expert, longest);
        row.sr += s;
        row.gc += gc;
        row.plwsr += s * weight;
        row.plwgc += gc * weight;
        row.mean_steps += e.steps;
        planner_ms += e.planner_ms;
    }
    const Rational n = row.episodes;
    row.sr /= n;
    row.gc /= n;
    row.plwsr /= n;
    row.plwgc /= n;
    row.mean_steps /= n;
    row.mean_planner_ms = planner_ms / static_cast<double>(row.episodes);
    return row;
}

MetricsRow compute_metrics(const std::vector<agent::EpisodeResult>& results, const std::vector<std::size_t>& experts,
                           std::string family) {
    if (results.size() != experts.size()) throw std::invalid_argument("compute_metrics: results and lengths differ");
    std::vector<EpisodeOutcome> out;
    for (std::size_t i = 0; i < results.size(); ++i) out.push_back(outcome_of(results[i], experts[i]));
    return compute_metrics(out, std::move(family));
}

pddl::Problem expert_problem(const env::EnvTask& task) {
    const auto& kb = task.scenario.kb;
    std::set<std::string> named;
    for (const auto& l : env::build_goal(task.task).pddl_goal().conjunction) {
        for (const auto& a : l.args) {
            if (!pddl::is_variable(a)) named.insert(a);
        }
    }
    std::map<std::string, const env::EntitySpec*> by_id;
    for (const auto& e : task.scenario.entities) by_id[e.id] = &e;
    std::set<std::string> keep;
    for (const auto& e : task.scenario.entities) {
        const auto& s = kb.at(e.subtype);
        if ((s.kind == env::EntityKind::Receptacle && !s.movable) || named.contains(e.subtype)) keep.insert(e.id);
    }
    // Whatever holds a kept entity stays too.
    for (bool changed = true; changed;) {
        changed = false;
        for (const auto& id : std::vector<std::string>(keep.begin(), keep.end())) {
            const auto& c = by_id.at(id)->container;
            if (!c.empty() && keep.insert(c).second) changed = true;
        }
    }
    env::EnvTask pruned = task;
    pruned.scenario.entities.clear();
    for (const auto& e : task.scenario.entities) {
        if (keep.contains(e.id)) pruned.scenario.entities.push_back(e);
    }
    return env::Environment(pruned).full_problem();
}

std::size_t expert_length(const env::EnvTask& task, const planner::Budget& budget) {
    auto grounded = pddl::ground(agent::runtime_domain(), expert_problem(task));
    auto res = planner::solve_bfs(grounded, budget);
    if (!res.found()) {
        throw std::logic_error("no expert plan for " + task.task.to_string() + " (" +
                               planner::to_string(res.stats.result) + ")");
    }
    std::size_t steps = 0;
    for (const auto& s : res.plan->steps) steps += agent::plan_action_to_env(s).size();
    return steps;
}

void SuiteConfig::validate() const {
    for (const auto& f : families) env::family_info(f);
    if (sizes.empty()) throw std::invalid_argument("sizes must not be empty");
    for (int s : sizes) {
        if (s < 2) throw std::invalid_argument("grid sizes must be at least 2");
    }
    if (fault_rate < 0.0 || fault_rate > 1.0) throw std::invalid_argument("fault_rate must be in [0,1]");
    if (fault_shots < 0 || pre_explore < 0) throw std::invalid_argument("fault_shots and pre_explore must be >= 0");
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
    if (budget.max_nodes == 0 || budget.max_time.count() <= 0) throw std::invalid_argument("budgets must be positive");
}

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    // get<unsigned>() would wrap negative numbers silently.
    if constexpr (std::is_integral_v<T> && std::is_unsigned_v<T> && !std::is_same_v<T, bool>) {
        if (!j.at(key).is_number_unsigned()) {
            throw std::invalid_argument(std::string("suite config: ") + key + " must be a non-negative integer");
        }
    }
    out = j.at(key).get<T>();
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> k{
        "families",   "episodes",    "first_seed",   "sizes",          "wall_fraction",      "distractor_objects",
        "distractor_receptacles",    "planner",      "max_nodes",      "max_time_ms",        "fault_rate",
        "fault_shots", "fault_recovery", "pre_explore", "prioritize_frontier", "explore_empty_hands", "expert",
        "threads"};
    return k;
}

}  // namespace

SuiteConfig parse_suite_config(const std::string& json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(std::string("suite config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw std::invalid_argument("suite config must be a JSON object");
    for (const auto& [k, v] : j.items()) {
        if (!known_keys().contains(k)) throw std::invalid_argument("unknown suite config key '" + k + "'");
    }
    SuiteConfig c;
    try {
        read(j, "families", c.families);
        read(j, "episodes", c.episodes);
        read(j, "first_seed", c.first_seed);
        read(j, "sizes", c.sizes);
        read(j, "wall_fraction", c.wall_fraction);
        read(j, "distractor_objects", c.distractor_objects);
        read(j, "distractor_receptacles", c.distractor_receptacles);
        if (j.contains("planner")) c.planner = agent::parse_planner(j.at("planner").get<std::string>());
        read(j, "max_nodes", c.budget.max_nodes);
        if (j.contains("max_time_ms")) c.budget.max_time = std::chrono::milliseconds(j.at("max_time_ms").get<std::int64_t>());
        read(j, "fault_rate", c.fault_rate);
        read(j, "fault_shots", c.fault_shots);
        read(j, "fault_recovery", c.fault_recovery);
        read(j, "pre_explore", c.pre_explore);
        read(j, "prioritize_frontier", c.prioritize_frontier);
        read(j, "explore_empty_hands", c.explore_empty_hands);
        read(j, "expert", c.expert);
        read(j, "threads", c.threads);
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("suite config: ") + e.what());
    }
    c.validate();
    return c;
}

std::string suite_config_json(const SuiteConfig& c) {
    nlohmann::ordered_json j;
    j["families"] = c.families;
    j["episodes"] = c.episodes;
    j["first_seed"] = c.first_seed;
    j["sizes"] = c.sizes;
    j["wall_fraction"] = c.wall_fraction;
    j["distractor_objects"] = c.distractor_objects;
    j["distractor_receptacles"] = c.distractor_receptacles;
    j["planner"] = agent::to_string(c.planner);
    j["max_nodes"] = c.budget.max_nodes;
    j["max_time_ms"] = c.budget.max_time.count();
    j["fault_rate"] = c.fault_rate;
    j["fault_shots"] = c.fault_shots;
    j["fault_recovery"] = c.fault_recovery;
    j["pre_explore"] = c.pre_explore;
    j["prioritize_frontier"] = c.prioritize_frontier;
    j["explore_empty_hands"] = c.explore_empty_hands;
    j["expert"] = c.expert;
    j["threads"] = c.threads;
    return j.dump(2);
}

namespace {

struct Job {
    std::string family;
    std::uint64_t seed;
    int size;
};

EpisodeRecord run_one(const SuiteConfig& cfg, const Job& job) {
    env::GeneratorConfig g;
    g.width = g.height = job.size;
    g.wall_fraction = cfg.wall_fraction;
    g.distractor_objects = cfg.distractor_objects;
    g.distractor_receptacles = cfg.distractor_receptacles;
    const env::EnvTask task = env::generate_scenario(job.seed, env::TaskSpec{job.family, {}}, g);

    // Fault stream and agent stream are decorrelated from the scenario draw.
    const env::FaultConfig faults{cfg.fault_rate, cfg.fault_shots, job.seed * 0x9E3779B97F4A7C15ULL + 1};
    agent::AgentConfig ac;
    ac.seed = job.seed * 0xBF58476D1CE4E5B9ULL + 2;
    ac.planner = cfg.planner;
    ac.budget = cfg.budget;
    ac.fault_recovery = cfg.fault_recovery;
    ac.pre_explore_budget = cfg.pre_explore;
    ac.prioritize_frontier = cfg.prioritize_frontier;
    ac.explore_empty_hands = cfg.explore_empty_hands;

    env::Environment e(task, faults);
    EpisodeRecord rec;
    rec.family = job.family;
    rec.seed = job.seed;
    rec.size = job.size;
    rec.task = task.task.to_string();
    rec.result = agent::run_episode(e, ac);
    const std::size_t expert = cfg.expert ? expert_length(task) : static_cast<std::size_t>(rec.result.steps);
    rec.outcome = outcome_of(rec.result, expert);
    return rec;
}

}  // namespace

SuiteResult run_suite(const SuiteConfig& cfg, const std::function<void(const EpisodeRecord&)>& progress) {
    cfg.validate();
    std::vector<std::string> fams = cfg.families;
    if (fams.empty()) {
        for (const auto& f : env::families()) fams.push_back(f.name);
    }
    std::vector<Job> jobs;
    for (const auto& f : fams) {
        for (std::size_t i = 0; i < cfg.episodes; ++i) {
            jobs.push_back({f, cfg.first_seed + i, cfg.sizes[i % cfg.sizes.size()]});
        }
    }
    SuiteResult res;
    res.episodes.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    std::mutex progress_mu;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++) {
            try {
                res.episodes[i] = run_one(cfg, jobs[i]);
                if (progress) {
                    std::lock_guard lock(progress_mu);
                    progress(res.episodes[i]);
                }
            } catch (...) {
                std::lock_guard lock(progress_mu);
                if (!error) error = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const auto n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.threads), std::max<std::size_t>(jobs.size(), 1));
    if (n_threads <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);

    std::vector<EpisodeOutcome> all;
    for (const auto& f : fams) {
        std::vector<EpisodeOutcome> mine;
        for (const auto& r : res.episodes) {
            if (r.family == f) mine.push_back(r.outcome);
        }
        if (mine.empty()) continue;
        all.insert(all.end(), mine.begin(), mine.end());
        res.rows.push_back(compute_metrics(mine, f));
    }
    if (!all.empty()) res.rows.push_back(compute_metrics(all, "all"));
    for (const auto& r : res.rows) {
        if (!r.bounds_ok()) throw std::logic_error("metric bounds violated for " + r.family);
    }
    return res;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::string out = "family,SR,GC,PLWSR,PLWGC,episodes,mean_steps\n";
    for (const auto& r : rows) {
        out += r.family + "," + format_decimal(r.sr) + "," + format_decimal(r.gc) + "," + format_decimal(r.plwsr) + "," +
               format_decimal(r.plwgc) + "," + std::to_string(r.episodes) + "," + format_decimal(r.mean_steps, 2) +
               "\n";
    }
    return out;
}

std::string metrics_table(const std::vector<MetricsRow>& rows) {
    std::ostringstream ss;
    std::size_t w = 6;
    for (const auto& r : rows) w = std::max(w, r.family.size());
    ss << std::left << std::setw(static_cast<int>(w)) << "family" << std::right;
    for (const char* h : {"SR", "GC", "PLWSR", "PLWGC"}) ss << std::setw(8) << h;
    ss << std::setw(6) << "n" << std::setw(10) << "steps" << std::setw(12) << "plan ms" << "\n";
    for (const auto& r : rows) {
        ss << std::left << std::setw(static_cast<int>(w)) << r.family << std::right;
        for (const auto* v : {&r.sr, &r.gc, &r.plwsr, &r.plwgc}) {
            ss << std::setw(8) << format_decimal(*v * 100, 1);
        }
        ss << std::setw(6) << r.episodes << std::setw(10) << format_decimal(r.mean_steps, 1) << std::setw(12)
           << std::fixed << std::setprecision(1) << r.mean_planner_ms << "\n";
    }
    return ss.str();
}

std::string episodes_csv(const std::vector<EpisodeRecord>& episodes) {
    std::string out = "family,seed,size,task,success,gc_satisfied,gc_total,steps,expert\n";
    for (const auto& e : episodes) {
        out += e.family + "," + std::to_string(e.seed) + "," + std::to_string(e.size) + "," + e.task + "," +
               (e.outcome.success ? "1" : "0") + "," + std::to_string(e.outcome.gc_satisfied) + "," +
               std::to_string(e.outcome.gc_total) + "," + std::to_string(e.outcome.steps) + "," +
               std::to_string(e.outcome.expert) + "\n";
    }
    return out;
}

namespace {

void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + p.string());
    out << text;
}

}  // namespace

void write_suite(const SuiteResult& res, const std::string& dir) {
    namespace fs = std::filesystem;
    const fs::path root(dir);
    fs::create_directories(root / "traces");
    write_text(root / "metrics.csv", metrics_csv(res.rows));
    write_text(root / "episodes.csv", episodes_csv(res.episodes));
    for (const auto& e : res.episodes) {
        const std::string stem = e.family + "_" + std::to_string(e.seed);
        write_text(root / "traces" / (stem + ".jsonl"), agent::episode_trace_jsonl(e.result));
        std::string steps;
        for (const auto& s : e.result.env_trace) steps += env::step_record_json(s) + "\n";
        write_text(root / "traces" / (stem + ".env.jsonl"), steps);
    }
}

}  // namespace egoplan::bench
