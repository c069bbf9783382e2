#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "egoplan/env/world.hpp"
#include "egoplan/planner/search.hpp"

namespace egoplan::env {

/// Seeded draws that do not depend on the standard library's distribution
/// implementations, so scenarios are identical across toolchains.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    /// Uniform in [0, n); n > 0.
    std::size_t below(std::size_t n);
    /// Uniform in [lo, hi].
    int between(int lo, int hi);
    bool chance(double p);

    template <typename T>
    const T& pick(const std::vector<T>& v) {
        return v.at(below(v.size()));
    }
    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
    }

private:
    std::mt19937_64 eng_;
};

struct GeneratorConfig {
    int width{5};
    int height{5};
    /// Fraction of cells turned into walls (connectivity is preserved).
    double wall_fraction{0.1};
    int distractor_objects{4};
    int distractor_receptacles{2};
    int max_attempts{64};
    /// Confirm a plan exists on the fully observable problem.
    bool check_solvable{true};
    planner::Budget budget{};
};

/// Builds a task of the given family. Empty `spec.params` are drawn from
/// the knowledge base. Throws std::invalid_argument for infeasible configs.
EnvTask generate_scenario(std::uint64_t seed, const TaskSpec& spec, const GeneratorConfig& cfg = {},
                          const Knowledge& kb = default_knowledge());

/// Parameters drawn for `family`, valid under validate_task.
TaskSpec sample_task(const std::string& family, Rng& rng, const Knowledge& kb = default_knowledge());

}  // namespace egoplan::env
