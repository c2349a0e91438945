#pragma once

#include "tdrl/envs.hpp"
#include "tdrl/testkit.hpp"
#include "tdrl/trajectory.hpp"

#include <functional>
#include <utility>
#include <vector>

namespace tdrl {

enum class MetricKind {
    hamming_states,      // count of positions where the state sequences differ
    mean_state_distance, // mean per-step Euclidean state distance
};

/// Distance between two equal-length trajectories under the chosen metric.
double trajectory_distance(const Trajectory& a, const Trajectory& b, MetricKind metric);

/// The enumerated trajectories passing every pass-fail test of a suite.
struct OptimalSet {
    std::vector<Trajectory> members;

    bool empty() const { return members.empty(); }
    std::size_t size() const { return members.size(); }
};

OptimalSet optimal_set(const TrajectoryDistribution& space, TestSuite& suite);

/// Distance from a trajectory to the optimal set: min over members.
/// Empty set means the task is infeasible at this horizon and is an error.
double distance_to_set(const Trajectory& trajectory, const OptimalSet& set, MetricKind metric);

/// Wasserstein-p distance between a trajectory distribution and the point
/// mass on the optimal set: (sum P(tau) rho(tau)^p)^(1/p) with rho the
/// distance to the set. Requires p >= 1.
double wasserstein_to_dirac(const TrajectoryDistribution& dist, const OptimalSet& set,
                            MetricKind metric, double p);

struct Lemma1Report {
    bool monotone = false;
    double max_violation = 0.0;
    /// Occupied distance bins in ascending order with their probability
    /// ratios P2(rho)/P1(rho).
    std::vector<std::pair<double, double>> ratio_by_distance;
};

/// Checks that the marginal probability ratio over distance bins is
/// non-increasing (tolerance 1e-9). Bins with zero base probability are
/// skipped. Both distributions must cover the same enumeration.
Lemma1Report check_lemma1(const TrajectoryDistribution& base,
                          const TrajectoryDistribution& updated, const OptimalSet& set,
                          MetricKind metric);

struct Theorem1Report {
    bool hypothesis_met = false;
    double d1 = 0.0;
    double d2 = 0.0;
    bool conclusion_holds = false;
};

/// Verifies that one exact maximum-entropy step under a return function that
/// is non-increasing in the distance to the optimal set cannot move the
/// policy farther from the optimal policy set: d2 <= d1 + 1e-12.
/// The monotonicity hypothesis is checked over the whole enumeration first;
/// when it fails the report says so instead of asserting the conclusion.
Theorem1Report check_theorem1(const TrajectoryDistribution& base,
                              const std::function<double(const Trajectory&)>& R, double alpha,
                              const OptimalSet& set, MetricKind metric, double p);

/// Exact comparison label from true distances to the optimal set:
/// 1 if the first trajectory is strictly closer, 0 if strictly farther,
/// 0.5 if equidistant.
double mu_reference(const Trajectory& a, const Trajectory& b, const OptimalSet& set,
                    MetricKind metric);

} // namespace tdrl
