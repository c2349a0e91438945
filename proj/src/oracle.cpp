#include "tdrl/oracle.hpp"

#include "tdrl/error.hpp"
#include "tdrl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace tdrl {

double trajectory_distance(const Trajectory& a, const Trajectory& b, MetricKind metric) {
    const auto states_a = a.state_sequence();
    const auto states_b = b.state_sequence();
    if (states_a.size() != states_b.size()) {
        throw Error("trajectory_distance: trajectories have different lengths");
    }
    switch (metric) {
    case MetricKind::hamming_states: {
        int differing = 0;
        for (std::size_t t = 0; t < states_a.size(); ++t) {
            if (states_a[t] != states_b[t]) ++differing;
        }
        return static_cast<double>(differing);
    }
    case MetricKind::mean_state_distance: {
        double sum = 0.0;
        for (std::size_t t = 0; t < states_a.size(); ++t) {
            double squared = 0.0;
            for (std::size_t i = 0; i < states_a[t].size(); ++i) {
                const double d = states_a[t][i] - states_b[t][i];
                squared += d * d;
            }
            sum += std::sqrt(squared);
        }
        return sum / static_cast<double>(states_a.size());
    }
    }
    throw Error("trajectory_distance: unknown metric");
}

OptimalSet optimal_set(const TrajectoryDistribution& space, TestSuite& suite) {
    OptimalSet set;
    const int all = static_cast<int>(suite.passfail_count());
    for (const Trajectory& trajectory : space.trajectories) {
        if (pass_count(suite.evaluate(trajectory)) == all) {
            set.members.push_back(trajectory);
        }
    }
    return set;
}

double distance_to_set(const Trajectory& trajectory, const OptimalSet& set, MetricKind metric) {
    if (set.empty()) {
        throw Error("distance_to_set: optimal set is empty (task infeasible at this horizon)");
    }
    double best = std::numeric_limits<double>::infinity();
    for (const Trajectory& member : set.members) {
        best = std::min(best, trajectory_distance(trajectory, member, metric));
    }
    return best;
}

double wasserstein_to_dirac(const TrajectoryDistribution& dist, const OptimalSet& set,
                            MetricKind metric, double p) {
    if (p < 1.0) throw Error("wasserstein_to_dirac: p must be >= 1");
    double moment = 0.0;
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (dist.probabilities[i] == 0.0) continue;
        const double rho = distance_to_set(dist.trajectories[i], set, metric);
        moment += dist.probabilities[i] * std::pow(rho, p);
    }
    return std::pow(moment, 1.0 / p);
}

Lemma1Report check_lemma1(const TrajectoryDistribution& base,
                          const TrajectoryDistribution& updated, const OptimalSet& set,
                          MetricKind metric) {
    if (base.size() != updated.size()) {
        throw Error("check_lemma1: distributions cover different trajectory spaces");
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
        if (base.trajectories[i].id() != updated.trajectories[i].id()) {
            throw Error("check_lemma1: distributions cover different trajectory spaces");
        }
    }

    std::map<double, std::pair<double, double>> bins; // rho -> (P1 mass, P2 mass)
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double rho = distance_to_set(base.trajectories[i], set, metric);
        auto& [p1, p2] = bins[rho];
        p1 += base.probabilities[i];
        p2 += updated.probabilities[i];
    }

    Lemma1Report report;
    report.monotone = true;
    double previous_ratio = std::numeric_limits<double>::infinity();
    for (const auto& [rho, mass] : bins) {
        if (mass.first == 0.0) continue; // unoccupied under the base policy
        const double ratio = mass.second / mass.first;
        report.ratio_by_distance.emplace_back(rho, ratio);
        if (ratio > previous_ratio + 1e-9) {
            report.monotone = false;
            report.max_violation = std::max(report.max_violation, ratio - previous_ratio);
        }
        previous_ratio = ratio;
    }
    return report;
}

Theorem1Report check_theorem1(const TrajectoryDistribution& base,
                              const std::function<double(const Trajectory&)>& R, double alpha,
                              const OptimalSet& set, MetricKind metric, double p) {
    Theorem1Report report;

    // Hypothesis: rho(a) <= rho(b) implies R(a) >= R(b) over the whole
    // enumeration. Equivalently R is constant on equal-rho classes and
    // non-increasing across ascending rho.
    std::map<double, std::pair<double, double>> range_by_rho; // rho -> (min R, max R)
    for (const Trajectory& trajectory : base.trajectories) {
        const double rho = distance_to_set(trajectory, set, metric);
        const double value = R(trajectory);
        auto [it, inserted] = range_by_rho.try_emplace(rho, std::make_pair(value, value));
        if (!inserted) {
            it->second.first = std::min(it->second.first, value);
            it->second.second = std::max(it->second.second, value);
        }
    }
    report.hypothesis_met = true;
    double previous_min = std::numeric_limits<double>::infinity();
    for (const auto& [rho, range] : range_by_rho) {
        if (range.first != range.second || range.second > previous_min) {
            report.hypothesis_met = false;
            break;
        }
        previous_min = range.first;
    }

    report.d1 = wasserstein_to_dirac(base, set, metric, p);
    const TrajectoryDistribution updated = soft_update_exact(base, R, alpha);
    report.d2 = wasserstein_to_dirac(updated, set, metric, p);
    report.conclusion_holds = report.hypothesis_met && report.d2 <= report.d1 + 1e-12;
    return report;
}

double mu_reference(const Trajectory& a, const Trajectory& b, const OptimalSet& set,
                    MetricKind metric) {
    const double rho_a = distance_to_set(a, set, metric);
    const double rho_b = distance_to_set(b, set, metric);
    if (rho_a < rho_b) return 1.0;
    if (rho_a > rho_b) return 0.0;
    return 0.5;
}

} // namespace tdrl
