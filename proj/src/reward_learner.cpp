#include "tdrl/reward_learner.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

#include <cmath>
#include <numeric>

namespace tdrl {

namespace {

void concat_state_action(std::span<const double> state, std::span<const double> action,
                         std::vector<double>& out) {
    out.clear();
    out.insert(out.end(), state.begin(), state.end());
    out.insert(out.end(), action.begin(), action.end());
}

double aggregate_norm(const std::vector<GradientBundle>& grads) {
    double sum = 0.0;
    for (const auto& g : grads) sum += g.squared_norm();
    return std::sqrt(sum);
}

} // namespace

RewardEnsemble::RewardEnsemble(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
                               std::size_t depth, std::size_t members, Rng& rng)
    : state_dim_(state_dim), action_dim_(action_dim) {
    if (members == 0) throw Error("RewardEnsemble: at least one member required");
    std::vector<std::size_t> widths;
    widths.push_back(state_dim + action_dim);
    for (std::size_t d = 0; d < depth; ++d) widths.push_back(hidden);
    widths.push_back(1);
    for (std::size_t e = 0; e < members; ++e) {
        // bounded hidden units: the policy optimizes against this net, and
        // relu extrapolation would hand it unbounded off-data ascent
        // directions; tanh saturates outside the data while the identity
        // output keeps the fitted range unbounded
        Mlp net = Mlp::make(widths, Activation::tanh, Activation::identity, rng);
        net.zero_output_layer();
        optimizer_.push_back(AdamState::zeros_like(net));
        members_.push_back(std::move(net));
    }
}

double RewardEnsemble::value(std::span<const double> state, std::span<const double> action) const {
    if (state.size() != state_dim_ || action.size() != action_dim_) {
        throw Error("RewardEnsemble::value: state/action dimensions do not match the ensemble");
    }
    std::vector<double> input;
    concat_state_action(state, action, input);
    double sum = 0.0;
    for (const Mlp& net : members_) sum += forward(net, input)[0];
    return sum / static_cast<double>(members_.size());
}

EnsembleLoss loss_reward(std::span<const DecompositionTarget> batch,
                         const RewardEnsemble& ensemble) {
    if (batch.empty()) throw Error("loss_reward: empty batch");
    const std::size_t members = ensemble.member_count();
    EnsembleLoss result;
    result.grads.reserve(members);
    const double scale = 1.0 / (static_cast<double>(batch.size()) * static_cast<double>(members));
    std::vector<double> input;
    std::vector<ForwardTrace> traces;
    for (std::size_t e = 0; e < members; ++e) {
        const Mlp& net = ensemble.members()[e];
        GradientBundle grads = GradientBundle::zeros_like(net);
        for (const DecompositionTarget& item : batch) {
            const auto& steps = item.trajectory->transitions();
            traces.resize(steps.size());
            double summed = 0.0;
            for (std::size_t t = 0; t < steps.size(); ++t) {
                concat_state_action(steps[t].state, steps[t].action, input);
                summed += forward(net, input, traces[t])[0];
            }
            const double gap = item.target_return - summed;
            result.value += scale * gap * gap;
            const double upstream[1] = {scale * -2.0 * gap};
            for (std::size_t t = 0; t < steps.size(); ++t) {
                backprop(net, traces[t], upstream, grads);
            }
        }
        result.grads.push_back(std::move(grads));
    }
    return result;
}

RewardRoundReport update_round(RewardEnsemble& ensemble, const TrajectoryBuffer& buffer,
                               const std::function<double(const Trajectory&)>& target_return,
                               const RewardUpdateConfig& config, Rng& rng) {
    if (buffer.empty()) throw Error("reward update_round: empty trajectory buffer");
    RewardRoundReport report;
    std::vector<DecompositionTarget> batch;
    batch.reserve(config.batch_size);
    std::vector<std::size_t> indices;
    for (std::size_t step = 0; step < config.update_num; ++step) {
        indices.clear();
        if (buffer.size() >= config.batch_size) {
            // partial Fisher-Yates: distinct indices
            std::vector<std::size_t> pool(buffer.size());
            std::iota(pool.begin(), pool.end(), 0);
            for (std::size_t k = 0; k < config.batch_size; ++k) {
                const auto pick = static_cast<std::size_t>(
                    rng.uniform_int(static_cast<std::int64_t>(k),
                                    static_cast<std::int64_t>(pool.size()) - 1));
                std::swap(pool[k], pool[pick]);
                indices.push_back(pool[k]);
            }
        } else {
            for (std::size_t k = 0; k < config.batch_size; ++k) {
                indices.push_back(static_cast<std::size_t>(
                    rng.uniform_int(0, static_cast<std::int64_t>(buffer.size()) - 1)));
            }
        }
        batch.clear();
        for (std::size_t index : indices) {
            const Trajectory& trajectory = buffer[index];
            batch.push_back({&trajectory, target_return(trajectory)});
        }
        EnsembleLoss loss = loss_reward(batch, ensemble);
        report.steps = step + 1;
        report.loss = loss.value;
        report.grad_norm = aggregate_norm(loss.grads);
        for (std::size_t e = 0; e < ensemble.member_count(); ++e) {
            adam_step(ensemble.members()[e], loss.grads[e], ensemble.optimizer_states()[e],
                      config.lr);
        }
    }
    return report;
}

std::size_t relabel(ReplayBuffer& replay, const RewardEnsemble& ensemble) {
    for (std::size_t i = 0; i < replay.size(); ++i) {
        ReplayItem& item = replay[i];
        item.reward = ensemble.value(item.state, item.action);
    }
    return replay.size();
}

} // namespace tdrl
