#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tdrl/error.hpp"
#include "tdrl/reward_learner.hpp"
#include "tdrl/rng.hpp"

#include <cmath>
#include <vector>

using namespace tdrl;

namespace {

Trajectory two_step(std::uint64_t id, double a0 = 0.5, double a1 = -0.5) {
    std::vector<Transition> transitions = {{{0.0, 0.0}, {a0}, {1.0, 0.0}, false},
                                           {{1.0, 0.0}, {a1}, {2.0, 0.0}, true}};
    return Trajectory(id, std::move(transitions));
}

void nudge(RewardEnsemble& ens, Rng& rng, double scale) {
    for (Mlp& member : ens.members()) {
        for (auto& layer : member.weights) {
            for (double& w : layer) w += rng.uniform(-scale, scale);
        }
        for (auto& layer : member.biases) {
            for (double& b : layer) b += rng.uniform(-scale, scale);
        }
    }
}

} // namespace

TEST_CASE("reward_of averages member outputs over concat(state, action)") {
    Rng rng(1);
    RewardEnsemble zeroed(2, 1, 4, 1, 1, rng);
    CHECK(zeroed.value(std::vector<double>{0.5, 0.5}, std::vector<double>{0.1}) == 0.0);

    RewardEnsemble ens(2, 1, 4, 1, 3, rng);
    for (std::size_t e = 0; e < 3; ++e) {
        Mlp& member = ens.members()[e];
        for (auto& layer : member.weights) std::fill(layer.begin(), layer.end(), 0.0);
        for (auto& layer : member.biases) std::fill(layer.begin(), layer.end(), 0.0);
        member.biases.back()[0] = static_cast<double>(e) - 1.0; // {-1, 0, 1}
    }
    CHECK(ens.value(std::vector<double>{0.0, 0.0}, std::vector<double>{0.0}) ==
          doctest::Approx(0.0));

    CHECK_THROWS_AS(ens.value(std::vector<double>{0.0}, std::vector<double>{0.0}), Error);
}

TEST_CASE("reward_of matches a duplicate forward oracle") {
    Rng rng(2);
    RewardEnsemble ens(2, 1, 6, 2, 2, rng);
    nudge(ens, rng, 0.3);
    const std::vector<double> s = {0.4, -0.8};
    const std::vector<double> a = {0.9};
    const std::vector<double> input = {0.4, -0.8, 0.9};
    double expected = 0.0;
    for (const Mlp& member : ens.members()) expected += forward(member, input)[0] / 2.0;
    CHECK(ens.value(s, a) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("loss_reward direct formula cases") {
    Rng rng(3);
    RewardEnsemble ens(2, 1, 4, 1, 2, rng); // outputs exactly zero

    const Trajectory t = two_step(0);
    std::vector<DecompositionTarget> batch = {{&t, 1.0}};
    // R = 1, both step rewards 0 -> loss = 1
    CHECK(loss_reward(batch, ens).value == doctest::Approx(1.0));

    // rewards already summing to the target -> zero loss
    batch = {{&t, 0.0}};
    CHECK(loss_reward(batch, ens).value == doctest::Approx(0.0));

    CHECK_THROWS_AS(loss_reward({}, ens), Error);
}

TEST_CASE("loss_reward gradients match finite differences") {
    Rng rng(4);
    RewardEnsemble ens(2, 1, 5, 2, 2, rng);
    nudge(ens, rng, 0.2);
    const Trajectory t0 = two_step(0, 0.5, -0.25);
    const Trajectory t1 = two_step(1, -0.75, 0.3);
    std::vector<DecompositionTarget> batch = {{&t0, 1.5}, {&t1, -0.5}};

    const EnsembleLoss loss = loss_reward(batch, ens);
    const double h = 1e-5;
    for (std::size_t e = 0; e < ens.member_count(); ++e) {
        Mlp& member = ens.members()[e];
        for (std::size_t l = 0; l < member.weights.size(); ++l) {
            for (std::size_t i = 0; i < member.weights[l].size(); ++i) {
                const double saved = member.weights[l][i];
                member.weights[l][i] = saved + h;
                const double plus = loss_reward(batch, ens).value;
                member.weights[l][i] = saved - h;
                const double minus = loss_reward(batch, ens).value;
                member.weights[l][i] = saved;
                const double numeric = (plus - minus) / (2.0 * h);
                const double mine = loss.grads[e].weights[l][i];
                const double denom = std::max({1.0, std::abs(numeric), std::abs(mine)});
                CHECK(std::abs(mine - numeric) / denom < 1e-4);
            }
        }
    }
}

TEST_CASE("update_round fits a single trajectory to its target") {
    Rng rng(5), round_rng(6);
    RewardEnsemble ens(2, 1, 16, 2, 2, rng);
    TrajectoryBuffer buffer(4);
    buffer.push(two_step(0));

    RewardUpdateConfig config;
    config.batch_size = 1;
    config.update_num = 400;
    config.lr = 5e-3;
    auto target = [](const Trajectory&) { return 2.0; };

    std::vector<DecompositionTarget> probe = {{&buffer[0], 2.0}};
    const double initial = loss_reward(probe, ens).value;
    const RewardRoundReport report = update_round(ens, buffer, target, config, round_rng);
    CHECK(report.steps == 400);
    const double final_loss = loss_reward(probe, ens).value;
    CHECK(final_loss < 1e-3 * initial);
}

TEST_CASE("update_round rejects an empty buffer and is deterministic") {
    Rng rng(7), round_rng(8);
    RewardEnsemble ens(2, 1, 4, 1, 1, rng);
    TrajectoryBuffer empty(2);
    RewardUpdateConfig config;
    CHECK_THROWS_AS(update_round(ens, empty, [](const Trajectory&) { return 0.0; }, config,
                                 round_rng),
                    Error);

    // same seed, same data -> identical parameters
    auto run_once = [](std::uint64_t seed) {
        Rng init(seed), round(seed + 1);
        RewardEnsemble e(2, 1, 8, 1, 2, init);
        TrajectoryBuffer b(4);
        b.push(two_step(0));
        b.push(two_step(1, 0.25, 0.75));
        RewardUpdateConfig c;
        c.batch_size = 2;
        c.update_num = 20;
        c.lr = 1e-3;
        update_round(e, b, [](const Trajectory& t) {
            return t.transitions().back().next_state[0];
        }, c, round);
        return e;
    };
    const RewardEnsemble a = run_once(42);
    const RewardEnsemble b = run_once(42);
    for (std::size_t e = 0; e < 2; ++e) {
        CHECK(a.members()[e].weights == b.members()[e].weights);
        CHECK(a.members()[e].biases == b.members()[e].biases);
    }
}

TEST_CASE("relabel rewrites every stored reward and is idempotent") {
    Rng rng(9);
    RewardEnsemble ens(2, 1, 6, 1, 2, rng);
    nudge(ens, rng, 0.3);

    ReplayBuffer replay(2000);
    CHECK(relabel(replay, ens) == 0); // empty buffer

    Rng data(10);
    for (int i = 0; i < 1000; ++i) {
        ReplayItem item;
        item.state = {data.uniform(-1.0, 1.0), data.uniform(-1.0, 1.0)};
        item.action = {data.uniform(-1.0, 1.0)};
        item.next_state = item.state;
        item.reward = 123.0;
        item.done = false;
        replay.push(std::move(item));
    }
    CHECK(relabel(replay, ens) == 1000);
    for (std::size_t i = 0; i < replay.size(); ++i) {
        CHECK(replay[i].reward ==
              doctest::Approx(ens.value(replay[i].state, replay[i].action)).epsilon(1e-15));
    }

    // second pass changes nothing
    std::vector<double> first_pass;
    for (std::size_t i = 0; i < replay.size(); ++i) first_pass.push_back(replay[i].reward);
    CHECK(relabel(replay, ens) == 1000);
    for (std::size_t i = 0; i < replay.size(); ++i) CHECK(replay[i].reward == first_pass[i]);
}

TEST_CASE("decomposition consistency on a small fixed dataset") {
    Rng rng(11), round_rng(12);
    RewardEnsemble ens(2, 1, 16, 2, 1, rng);
    TrajectoryBuffer buffer(8);
    Rng data(13);
    std::vector<double> targets;
    for (std::uint64_t id = 0; id < 6; ++id) {
        buffer.push(two_step(id, data.uniform(-1.0, 1.0), data.uniform(-1.0, 1.0)));
        targets.push_back(data.uniform(-2.0, 2.0));
    }
    RewardUpdateConfig config;
    config.batch_size = 6;
    config.update_num = 3000;
    config.lr = 5e-3;
    update_round(ens, buffer, [&targets](const Trajectory& t) {
        return targets[t.id()];
    }, config, round_rng);

    for (std::uint64_t id = 0; id < 6; ++id) {
        double summed = 0.0;
        for (const Transition& tr : buffer[id].transitions()) {
            summed += ens.value(tr.state, tr.action);
        }
        CHECK(std::abs(targets[id] - summed) <= 1e-2 * (1.0 + std::abs(targets[id])));
    }
}
