#pragma once

#include "tdrl/envs.hpp"
#include "tdrl/mlp.hpp"
#include "tdrl/replay.hpp"
#include "tdrl/trajectory.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace tdrl {

class Rng;

/// Adam state for a single scalar parameter (the entropy temperature).
struct AdamScalar {
    double m = 0.0;
    double v = 0.0;
    std::uint64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

void adam_scalar_step(double& parameter, double gradient, AdamScalar& state, double lr);

/// Squashed-Gaussian actor: the network emits per-dimension mean and log-std
/// (log-std clamped to [-20, 2]); samples go through tanh and are mapped into
/// the action box. Temperature alpha is stored as log_alpha and optionally
/// auto-tuned toward a target entropy.
class GaussianPolicy {
public:
    GaussianPolicy(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
                   std::size_t depth, std::vector<double> low, std::vector<double> high,
                   Rng& init_rng);

    std::size_t state_dim() const { return actor.input_width(); }
    std::size_t action_dim() const { return low.size(); }
    double alpha() const;

    /// Stochastic: squashed sample. Deterministic: squashed mean.
    std::vector<double> act(std::span<const double> state, bool stochastic, Rng& rng) const;

    Mlp actor;
    AdamState actor_opt;
    double log_alpha = 0.0;
    AdamScalar alpha_opt;
    bool auto_alpha = true;
    double target_entropy = 0.0;
    std::vector<double> low;
    std::vector<double> high;
};

/// Twin soft Q networks with polyak-averaged targets.
struct SoftCritic {
    SoftCritic(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
               std::size_t depth, Rng& init_rng);

    Mlp q1, q2, q1_target, q2_target;
    AdamState q1_opt, q2_opt;
    double polyak = 0.005;
    double gamma = 0.99;

    void polyak_update();
};

struct SacLearningRates {
    double actor = 5e-4;
    double critic = 5e-4;
    double alpha = 1e-4;
};

struct SacReport {
    double critic_loss = 0.0;
    double actor_loss = 0.0;
    double alpha_loss = 0.0;
    double alpha = 0.0;
    double mean_log_prob = 0.0;
};

/// Bellman targets y = r + gamma (1 - done) (min target Q - alpha log pi)
/// with next actions reparametrized from `noise` (batch * action_dim
/// standard normals).
std::vector<double> critic_targets(const GaussianPolicy& policy, const SoftCritic& critic,
                                   const ReplayBuffer& replay,
                                   std::span<const std::size_t> batch,
                                   std::span<const double> noise);

struct CriticLossResult {
    double loss = 0.0;
    GradientBundle q1_grads, q2_grads;
};

/// Mean squared Bellman error of both online critics against fixed targets.
CriticLossResult critic_loss(const SoftCritic& critic, const ReplayBuffer& replay,
                             std::span<const std::size_t> batch,
                             std::span<const double> targets);

struct ActorLossResult {
    double loss = 0.0;
    double mean_log_prob = 0.0;
    GradientBundle grads;
};

/// Reparametrized actor objective mean(alpha log pi - min Q) with fixed
/// noise; the critics are treated as constants.
ActorLossResult actor_loss(const GaussianPolicy& policy, const SoftCritic& critic,
                           const ReplayBuffer& replay, std::span<const std::size_t> batch,
                           std::span<const double> noise);

/// One soft actor-critic step on a replay minibatch: twin-Q regression to
/// the Bellman targets, reparametrized actor step, optional temperature
/// step, polyak target update. Throws on non-finite losses.
SacReport sac_update(GaussianPolicy& policy, SoftCritic& critic, const ReplayBuffer& replay,
                     std::span<const std::size_t> batch, const SacLearningRates& lrs,
                     Rng& noise_rng);

/// Exact maximum-entropy trajectory reweighting:
/// P2(tau) = P1(tau) exp(R(tau)/alpha) / Z over an enumerated space.
TrajectoryDistribution soft_update_exact(const TrajectoryDistribution& base,
                                         const std::function<double(const Trajectory&)>& R,
                                         double alpha);
TrajectoryDistribution soft_update_exact(const GridChain& env, const ExactPolicy& policy,
                                         const std::function<double(const Trajectory&)>& R,
                                         double alpha);

struct WarmupResult {
    std::vector<Trajectory> trajectories;
    std::vector<ReplayItem> transitions;
};

/// Uniform-random exploration in the action box. Complete episodes become
/// trajectories; a trailing partial episode contributes transitions only.
WarmupResult warmup(Env& env, std::size_t steps, Rng& rng,
                    const std::function<double(std::span<const double>,
                                               std::span<const double>)>& reward,
                    std::uint64_t& next_trajectory_id, Rng& reset_rng);

} // namespace tdrl
