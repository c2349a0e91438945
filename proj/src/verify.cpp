#include "tdrl/verify.hpp"

#include "tdrl/envs.hpp"
#include "tdrl/error.hpp"
#include "tdrl/oracle.hpp"
#include "tdrl/rng.hpp"
#include "tdrl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

namespace tdrl {

nlohmann::json TheoryVerdict::to_json() const {
    nlohmann::json j;
    j["lemma1"] = lemma1_pass ? "pass" : "fail";
    j["theorem1"] = theorem1_pass ? "pass" : "fail";
    j["eq4"] = eq4_pass ? "pass" : "fail";
    j["intersection"] = intersection_pass ? "pass" : "fail";
    j["d1"] = first_d1;
    j["d2"] = first_d2;
    j["instances"] = instances;
    j["max_eq4_total_variation"] = max_eq4_total_variation;
    nlohmann::json detail_list = nlohmann::json::array();
    for (const TheoryInstance& inst : details) {
        detail_list.push_back(nlohmann::json{{"alpha", inst.alpha},
                                             {"d1_p1", inst.d1_p1},
                                             {"d2_p1", inst.d2_p1},
                                             {"d1_p2", inst.d1_p2},
                                             {"d2_p2", inst.d2_p2},
                                             {"eq4_tv", inst.eq4_total_variation},
                                             {"lemma1", inst.lemma1_monotone},
                                             {"theorem1_p1", inst.theorem1_p1},
                                             {"theorem1_p2", inst.theorem1_p2},
                                             {"intersection", inst.intersection_identity}});
    }
    j["details"] = std::move(detail_list);
    return j;
}

TheoryVerdict verify_theory(int instances, std::uint64_t seed) {
    if (instances < 1) throw Error("verify_theory: need at least one instance");
    TheoryVerdict verdict;
    verdict.instances = instances;
    verdict.lemma1_pass = true;
    verdict.theorem1_pass = true;
    verdict.eq4_pass = true;
    verdict.intersection_pass = true;

    for (int k = 0; k < instances; ++k) {
        Rng rng = Rng::stream(seed, "verify-" + std::to_string(k));
        const GridChain env = GridChain::randomized(rng);
        const ExactPolicy policy = ExactPolicy::random(env, rng);
        const TrajectoryDistribution base = enumerate_trajectories(env, policy);
        TestSuite suite = builtin_suite(env);
        const OptimalSet set = optimal_set(base, suite);

        // monotone return: strictly decreasing over distinct distances
        std::vector<double> rhos;
        rhos.reserve(base.size());
        for (const Trajectory& t : base.trajectories) {
            rhos.push_back(distance_to_set(t, set, MetricKind::hamming_states));
        }
        std::vector<double> distinct = rhos;
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::map<double, double> table;
        double value = rng.uniform(0.0, 3.0);
        for (double rho : distinct) {
            table[rho] = value;
            value -= rng.uniform(0.1, 1.0);
        }
        auto R = [&table, &set](const Trajectory& t) {
            return table.at(distance_to_set(t, set, MetricKind::hamming_states));
        };

        TheoryInstance inst;
        inst.alpha = rng.uniform(0.3, 3.0);

        const TrajectoryDistribution updated = soft_update_exact(base, R, inst.alpha);

        // independent reweighting in extended precision
        {
            long double z = 0.0L;
            std::vector<long double> weights(base.size());
            for (std::size_t i = 0; i < base.size(); ++i) {
                weights[i] = static_cast<long double>(base.probabilities[i]) *
                             std::exp(static_cast<long double>(R(base.trajectories[i])) /
                                      static_cast<long double>(inst.alpha));
                z += weights[i];
            }
            long double tv = 0.0L;
            for (std::size_t i = 0; i < base.size(); ++i) {
                tv += std::abs(static_cast<long double>(updated.probabilities[i]) - weights[i] / z);
            }
            inst.eq4_total_variation = static_cast<double>(0.5L * tv);
        }

        const Lemma1Report lemma = check_lemma1(base, updated, set, MetricKind::hamming_states);
        inst.lemma1_monotone = lemma.monotone;

        const Theorem1Report th_p1 =
            check_theorem1(base, R, inst.alpha, set, MetricKind::hamming_states, 1.0);
        const Theorem1Report th_p2 =
            check_theorem1(base, R, inst.alpha, set, MetricKind::hamming_states, 2.0);
        inst.theorem1_p1 = th_p1.hypothesis_met && th_p1.conclusion_holds;
        inst.theorem1_p2 = th_p2.hypothesis_met && th_p2.conclusion_holds;
        inst.d1_p1 = th_p1.d1;
        inst.d2_p1 = th_p1.d2;
        inst.d1_p2 = th_p2.d1;
        inst.d2_p2 = th_p2.d2;

        // optimal set equals the intersection of per-test passing sets
        {
            std::vector<std::uint64_t> intersection;
            for (const Trajectory& t : base.trajectories) {
                const TestOutcome& o = suite.evaluate(t);
                bool passes_all = true;
                for (std::uint8_t bit : o.passfail_bits) passes_all = passes_all && bit;
                if (passes_all) intersection.push_back(t.id());
            }
            std::vector<std::uint64_t> members;
            for (const Trajectory& t : set.members) members.push_back(t.id());
            inst.intersection_identity = intersection == members;
        }

        if (k == 0) {
            verdict.first_d1 = inst.d1_p1;
            verdict.first_d2 = inst.d2_p1;
        }
        verdict.max_eq4_total_variation =
            std::max(verdict.max_eq4_total_variation, inst.eq4_total_variation);
        verdict.lemma1_pass = verdict.lemma1_pass && inst.lemma1_monotone;
        verdict.theorem1_pass = verdict.theorem1_pass && inst.theorem1_p1 && inst.theorem1_p2;
        verdict.eq4_pass = verdict.eq4_pass && inst.eq4_total_variation <= 1e-12;
        verdict.intersection_pass = verdict.intersection_pass && inst.intersection_identity;
        verdict.details.push_back(inst);
    }
    return verdict;
}

} // namespace tdrl
