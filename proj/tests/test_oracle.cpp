#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tdrl/envs.hpp"
#include "tdrl/lexicomp.hpp"
#include "tdrl/error.hpp"
#include "tdrl/oracle.hpp"
#include "tdrl/rng.hpp"
#include "tdrl/sac.hpp"

#include <cmath>
#include <map>

using namespace tdrl;

namespace {

Trajectory path(std::uint64_t id, const std::vector<int>& states) {
    std::vector<Transition> transitions;
    for (std::size_t t = 0; t + 1 < states.size(); ++t) {
        transitions.push_back({{static_cast<double>(states[t])},
                               {1.0},
                               {static_cast<double>(states[t + 1])},
                               t + 2 == states.size()});
    }
    return Trajectory(id, std::move(transitions));
}

OptimalSet singleton_set(const std::vector<int>& states) {
    OptimalSet set;
    set.members.push_back(path(1000, states));
    return set;
}

TrajectoryDistribution two_point(double p0, const std::vector<int>& s0,
                                 const std::vector<int>& s1) {
    TrajectoryDistribution dist;
    dist.trajectories.push_back(path(0, s0));
    dist.trajectories.push_back(path(1, s1));
    dist.probabilities = {p0, 1.0 - p0};
    return dist;
}

} // namespace

TEST_CASE("hamming distance counts differing state positions") {
    CHECK(trajectory_distance(path(0, {0, 1, 2}), path(1, {0, 1, 2}),
                              MetricKind::hamming_states) == 0.0);
    CHECK(trajectory_distance(path(0, {0, 1, 2}), path(1, {0, 2, 2}),
                              MetricKind::hamming_states) == 1.0);
    CHECK(trajectory_distance(path(0, {0, 1, 2}), path(1, {1, 2, 3}),
                              MetricKind::hamming_states) == 3.0);
    CHECK_THROWS_AS(trajectory_distance(path(0, {0, 1}), path(1, {0, 1, 2}),
                                        MetricKind::hamming_states),
                    Error);
}

TEST_CASE("mean state distance averages per-position euclidean gaps") {
    // states {0,1} vs {2,5}: distances 2 and 4 -> mean 3
    CHECK(trajectory_distance(path(0, {0, 1}), path(1, {2, 5}),
                              MetricKind::mean_state_distance) == doctest::Approx(3.0));
}

TEST_CASE("metric axioms hold on random tabular triples") {
    Rng rng(1);
    for (int trial = 0; trial < 300; ++trial) {
        auto random_states = [&rng] {
            std::vector<int> states;
            for (int t = 0; t < 4; ++t) states.push_back(static_cast<int>(rng.uniform_int(0, 3)));
            return states;
        };
        const auto sa = random_states();
        const auto sb = random_states();
        const auto sc = random_states();
        for (MetricKind metric :
             {MetricKind::hamming_states, MetricKind::mean_state_distance}) {
            const Trajectory a = path(0, sa), b = path(1, sb), c = path(2, sc);
            const double dab = trajectory_distance(a, b, metric);
            const double dba = trajectory_distance(b, a, metric);
            const double dac = trajectory_distance(a, c, metric);
            const double dcb = trajectory_distance(c, b, metric);
            CHECK(dab >= 0.0);
            CHECK(dab == dba);
            CHECK(trajectory_distance(a, a, metric) == 0.0);
            if (sa == sb) CHECK(dab == 0.0);
            if (dab == 0.0) CHECK(sa == sb);
            CHECK(dab <= dac + dcb + 1e-12);
        }
    }
}

TEST_CASE("distance_to_set takes the minimum over members") {
    OptimalSet set;
    set.members.push_back(path(100, {0, 1, 2}));
    set.members.push_back(path(101, {0, 0, 0}));

    // member of the set: zero distance
    CHECK(distance_to_set(path(0, {0, 1, 2}), set, MetricKind::hamming_states) == 0.0);
    // differs from the nearest member in 2 positions
    CHECK(distance_to_set(path(0, {1, 1, 0}), set, MetricKind::hamming_states) == 2.0);

    // singleton set: distance equals the metric to that member
    const OptimalSet single = singleton_set({0, 1, 2});
    CHECK(distance_to_set(path(0, {0, 2, 1}), single, MetricKind::hamming_states) ==
          trajectory_distance(path(0, {0, 2, 1}), single.members[0],
                              MetricKind::hamming_states));

    const OptimalSet empty;
    CHECK_THROWS_AS(distance_to_set(path(0, {0, 1, 2}), empty, MetricKind::hamming_states),
                    Error);
}

TEST_CASE("optimal_set matches the per-test intersection on enumerations") {
    Rng rng(2);
    for (int trial = 0; trial < 10; ++trial) {
        const GridChain env = GridChain::randomized(rng);
        const ExactPolicy policy = ExactPolicy::random(env, rng);
        const TrajectoryDistribution space = enumerate_trajectories(env, policy);
        TestSuite suite = builtin_suite(env);
        const OptimalSet set = optimal_set(space, suite);
        CHECK_FALSE(set.empty()); // randomized() guarantees a feasible goal path

        std::vector<std::uint64_t> expected;
        for (const Trajectory& t : space.trajectories) {
            const TestOutcome& o = suite.evaluate(t);
            bool in_all = true;
            for (std::size_t i = 0; i < o.passfail_bits.size(); ++i) {
                in_all = in_all && o.passfail_bits[i] == 1;
            }
            if (in_all) expected.push_back(t.id());
        }
        std::vector<std::uint64_t> actual;
        for (const Trajectory& t : set.members) actual.push_back(t.id());
        CHECK(actual == expected);
    }
}

TEST_CASE("wasserstein_to_dirac hand-computed cases") {
    const OptimalSet set = singleton_set({0, 1, 2});

    // all mass on the set
    TrajectoryDistribution on_set;
    on_set.trajectories.push_back(path(0, {0, 1, 2}));
    on_set.probabilities = {1.0};
    CHECK(wasserstein_to_dirac(on_set, set, MetricKind::hamming_states, 1.0) == 0.0);

    // rho values {0, 2} at probability 0.5 each
    const TrajectoryDistribution half = two_point(0.5, {0, 1, 2}, {1, 2, 2});
    CHECK(distance_to_set(half.trajectories[1], set, MetricKind::hamming_states) == 2.0);
    CHECK(wasserstein_to_dirac(half, set, MetricKind::hamming_states, 1.0) ==
          doctest::Approx(1.0));
    CHECK(wasserstein_to_dirac(half, set, MetricKind::hamming_states, 2.0) ==
          doctest::Approx(std::sqrt(2.0)));

    CHECK_THROWS_AS(wasserstein_to_dirac(half, set, MetricKind::hamming_states, 0.5), Error);
}

TEST_CASE("wasserstein moments are monotone in p for rho <= 1") {
    // normalized distances: rho in {0, 1} -> W_p constant; mix in rho = 0.5
    OptimalSet set = singleton_set({0, 0});
    TrajectoryDistribution dist;
    dist.trajectories.push_back(path(0, {0, 0}));  // rho 0
    dist.trajectories.push_back(path(1, {0, 1}));  // rho 0.5 under mean-state metric
    dist.trajectories.push_back(path(2, {1, 1}));  // rho 1
    dist.probabilities = {0.3, 0.4, 0.3};
    double previous = wasserstein_to_dirac(dist, set, MetricKind::mean_state_distance, 1.0);
    for (double p : {1.5, 2.0, 3.0, 4.0}) {
        const double current =
            wasserstein_to_dirac(dist, set, MetricKind::mean_state_distance, p);
        CHECK(current >= previous - 1e-12);
        previous = current;
    }
}

TEST_CASE("check_lemma1 flat ratios for a constant return") {
    const GridChain env = GridChain::standard();
    const ExactPolicy policy = ExactPolicy::uniform(env);
    const TrajectoryDistribution base = enumerate_trajectories(env, policy);
    TestSuite suite = builtin_suite(env);
    const OptimalSet set = optimal_set(base, suite);

    const TrajectoryDistribution updated =
        soft_update_exact(base, [](const Trajectory&) { return 2.5; }, 1.3);
    const Lemma1Report report = check_lemma1(base, updated, set, MetricKind::hamming_states);
    CHECK(report.monotone);
    for (const auto& [rho, ratio] : report.ratio_by_distance) {
        CHECK(ratio == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("check_lemma1 ratios match closed-form reweighting per distance") {
    const GridChain env = GridChain::standard();
    const ExactPolicy policy = ExactPolicy::uniform(env);
    const TrajectoryDistribution base = enumerate_trajectories(env, policy);
    TestSuite suite = builtin_suite(env);
    const OptimalSet set = optimal_set(base, suite);

    const double alpha = 0.8;
    auto R = [&set](const Trajectory& t) {
        return -distance_to_set(t, set, MetricKind::hamming_states);
    };
    const TrajectoryDistribution updated = soft_update_exact(base, R, alpha);
    const Lemma1Report report = check_lemma1(base, updated, set, MetricKind::hamming_states);
    CHECK(report.monotone);

    // closed form: r(rho) = exp(-rho/alpha) / Z with Z = sum P1(rho) exp(-rho/alpha)
    std::map<double, double> mass;
    for (std::size_t i = 0; i < base.size(); ++i) {
        mass[distance_to_set(base.trajectories[i], set, MetricKind::hamming_states)] +=
            base.probabilities[i];
    }
    double z = 0.0;
    for (const auto& [rho, p] : mass) z += p * std::exp(-rho / alpha);
    for (const auto& [rho, ratio] : report.ratio_by_distance) {
        CHECK(ratio == doctest::Approx(std::exp(-rho / alpha) / z).epsilon(1e-9));
        // strictly decreasing over ascending bins
    }
    for (std::size_t k = 1; k < report.ratio_by_distance.size(); ++k) {
        CHECK(report.ratio_by_distance[k].second < report.ratio_by_distance[k - 1].second);
    }

    // mismatched spaces are rejected
    TrajectoryDistribution other = base;
    other.trajectories.pop_back();
    other.probabilities.pop_back();
    CHECK_THROWS_AS(check_lemma1(base, other, set, MetricKind::hamming_states), Error);
}

TEST_CASE("check_theorem1 on a policy already supported on the optimal set") {
    // single trajectory at distance zero
    OptimalSet set = singleton_set({0, 1, 2});
    TrajectoryDistribution base;
    base.trajectories.push_back(path(0, {0, 1, 2}));
    base.probabilities = {1.0};
    const Theorem1Report report = check_theorem1(
        base, [](const Trajectory&) { return 1.0; }, 1.0, set, MetricKind::hamming_states, 1.0);
    CHECK(report.hypothesis_met);
    CHECK(report.d1 == 0.0);
    CHECK(report.d2 == 0.0);
    CHECK(report.conclusion_holds);
}

TEST_CASE("check_theorem1 contracts the distance and detects huge alpha") {
    const GridChain env = GridChain::standard();
    const ExactPolicy policy = ExactPolicy::uniform(env);
    const TrajectoryDistribution base = enumerate_trajectories(env, policy);
    TestSuite suite = builtin_suite(env);
    const OptimalSet set = optimal_set(base, suite);
    auto R = [&set](const Trajectory& t) {
        return -distance_to_set(t, set, MetricKind::hamming_states);
    };

    const Theorem1Report report =
        check_theorem1(base, R, 1.0, set, MetricKind::hamming_states, 1.0);
    CHECK(report.hypothesis_met);
    CHECK(report.conclusion_holds);
    CHECK(report.d2 < report.d1);

    // cross-check d2 by closed-form reweighting
    double z = 0.0, moment = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double rho = distance_to_set(base.trajectories[i], set, MetricKind::hamming_states);
        z += base.probabilities[i] * std::exp(-rho);
    }
    for (std::size_t i = 0; i < base.size(); ++i) {
        const double rho = distance_to_set(base.trajectories[i], set, MetricKind::hamming_states);
        moment += base.probabilities[i] * std::exp(-rho) / z * rho;
    }
    CHECK(report.d2 == doctest::Approx(moment).epsilon(1e-12));

    // alpha -> infinity: d2 approaches d1
    const Theorem1Report cold =
        check_theorem1(base, R, 1e6, set, MetricKind::hamming_states, 1.0);
    CHECK(std::abs(cold.d2 - cold.d1) <= 1e-5);
}

TEST_CASE("check_theorem1 flags a non-monotone return instead of asserting") {
    const GridChain env = GridChain::standard();
    const ExactPolicy policy = ExactPolicy::uniform(env);
    const TrajectoryDistribution base = enumerate_trajectories(env, policy);
    TestSuite suite = builtin_suite(env);
    const OptimalSet set = optimal_set(base, suite);

    // reward the farthest trajectories: hypothesis violated
    auto bad = [&set](const Trajectory& t) {
        return distance_to_set(t, set, MetricKind::hamming_states);
    };
    const Theorem1Report report =
        check_theorem1(base, bad, 1.0, set, MetricKind::hamming_states, 1.0);
    CHECK_FALSE(report.hypothesis_met);
    CHECK_FALSE(report.conclusion_holds);
}

TEST_CASE("mu_reference encodes exact distance comparisons") {
    const OptimalSet set = singleton_set({0, 1, 2});
    // both on the set
    CHECK(mu_reference(path(0, {0, 1, 2}), path(1, {0, 1, 2}), set,
                       MetricKind::hamming_states) == 0.5);
    // rho 1 vs rho 3
    CHECK(mu_reference(path(0, {0, 1, 1}), path(1, {1, 2, 0}), set,
                       MetricKind::hamming_states) == 1.0);
    CHECK(mu_reference(path(0, {1, 2, 0}), path(1, {0, 1, 1}), set,
                       MetricKind::hamming_states) == 0.0);
}

TEST_CASE("heuristic-versus-exact agreement is reported as a statistic") {
    const GridChain env = GridChain::standard();
    const ExactPolicy policy = ExactPolicy::uniform(env);
    const TrajectoryDistribution space = enumerate_trajectories(env, policy);
    TestSuite suite = builtin_suite(env);
    const OptimalSet set = optimal_set(space, suite);

    std::size_t agreements = 0, total = 0;
    for (std::size_t i = 0; i < space.size(); ++i) {
        for (std::size_t j = i + 1; j < space.size(); ++j) {
            const double heuristic = compare(suite.evaluate(space.trajectories[i]),
                                             suite.evaluate(space.trajectories[j]),
                                             suite.stats());
            const double exact = mu_reference(space.trajectories[i], space.trajectories[j], set,
                                              MetricKind::hamming_states);
            ++total;
            if (heuristic == exact) ++agreements;
        }
    }
    const double agreement_rate = static_cast<double>(agreements) / static_cast<double>(total);
    // the heuristic is not required to match; it just has to be informative
    CHECK(agreement_rate > 0.3);
    MESSAGE("heuristic/exact agreement on the standard chain: ", agreement_rate);
}
