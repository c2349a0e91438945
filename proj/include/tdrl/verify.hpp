#pragma once

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <vector>

namespace tdrl {

class GridChain;
class Rng;
struct TrajectoryDistribution;

/// One randomized verification instance on an enumerable chain environment:
/// a random tabular policy, a random return function that is non-increasing
/// in the distance to the optimal set, and a random temperature.
struct TheoryInstance {
    double alpha = 1.0;
    double d1_p1 = 0.0, d2_p1 = 0.0;
    double d1_p2 = 0.0, d2_p2 = 0.0;
    double eq4_total_variation = 0.0;
    bool lemma1_monotone = false;
    bool theorem1_p1 = false;
    bool theorem1_p2 = false;
    bool intersection_identity = false;
};

struct TheoryVerdict {
    int instances = 0;
    bool lemma1_pass = false;
    bool theorem1_pass = false;
    bool eq4_pass = false;
    bool intersection_pass = false;
    double max_eq4_total_variation = 0.0;
    double first_d1 = 0.0;
    double first_d2 = 0.0;
    std::vector<TheoryInstance> details;

    nlohmann::json to_json() const;
};

/// Runs `instances` randomized instances and aggregates pass/fail flags.
/// Deterministic for a fixed seed.
TheoryVerdict verify_theory(int instances, std::uint64_t seed);

} // namespace tdrl
