#pragma once

#include "tdrl/mlp.hpp"
#include "tdrl/replay.hpp"
#include "tdrl/return_learner.hpp"
#include "tdrl/trajectory.hpp"

#include <functional>
#include <span>
#include <vector>

namespace tdrl {

class Rng;

/// Ensemble of networks mapping concat(state, action) to a per-step reward.
/// Identity output (unbounded): decomposition targets are unbounded, so no
/// squashing. Output layers start at zero.
class RewardEnsemble {
public:
    RewardEnsemble(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
                   std::size_t depth, std::size_t members, Rng& rng);

    std::size_t member_count() const { return members_.size(); }
    std::size_t state_dim() const { return state_dim_; }
    std::size_t action_dim() const { return action_dim_; }

    /// Ensemble-mean reward for one state-action pair.
    double value(std::span<const double> state, std::span<const double> action) const;

    std::vector<Mlp>& members() { return members_; }
    const std::vector<Mlp>& members() const { return members_; }
    std::vector<AdamState>& optimizer_states() { return optimizer_; }

private:
    std::size_t state_dim_;
    std::size_t action_dim_;
    std::vector<Mlp> members_;
    std::vector<AdamState> optimizer_;
};

/// One trajectory with the trajectory return it should decompose into.
struct DecompositionTarget {
    const Trajectory* trajectory = nullptr;
    double target_return = 0.0;
};

/// Squared gap between each target return and the summed per-step rewards,
/// averaged over the batch and over ensemble members (each member fits every
/// target independently).
EnsembleLoss loss_reward(std::span<const DecompositionTarget> batch,
                         const RewardEnsemble& ensemble);

struct RewardUpdateConfig {
    std::size_t batch_size = 128;
    std::size_t update_num = 50;
    double lr = 3e-4;
};

struct RewardRoundReport {
    std::size_t steps = 0;
    double loss = 0.0;
    double grad_norm = 0.0;
};

/// One reward-learning round: `update_num` Adam steps on minibatches of
/// trajectories (distinct when the buffer is large enough, with replacement
/// otherwise). Targets come from `target_return`, frozen for the round.
RewardRoundReport update_round(RewardEnsemble& ensemble, const TrajectoryBuffer& buffer,
                               const std::function<double(const Trajectory&)>& target_return,
                               const RewardUpdateConfig& config, Rng& rng);

/// Rewrites every stored reward with the current ensemble; returns the number
/// of transitions rewritten.
std::size_t relabel(ReplayBuffer& replay, const RewardEnsemble& ensemble);

} // namespace tdrl
