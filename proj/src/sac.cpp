#include "tdrl/sac.hpp"

#include "tdrl/error.hpp"
#include "tdrl/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace tdrl {

namespace {

constexpr double kLogStdMin = -20.0;
constexpr double kLogStdMax = 2.0;
constexpr double kSquashEps = 1e-6;
constexpr double kHalfLog2Pi = 0.9189385332046727; // 0.5 * log(2*pi)

void concat(std::span<const double> a, std::span<const double> b, std::vector<double>& out) {
    out.clear();
    out.insert(out.end(), a.begin(), a.end());
    out.insert(out.end(), b.begin(), b.end());
}

} // namespace

void adam_scalar_step(double& parameter, double gradient, AdamScalar& state, double lr) {
    if (!std::isfinite(gradient)) throw Error("adam_scalar_step: non-finite gradient");
    ++state.step;
    state.m = state.beta1 * state.m + (1.0 - state.beta1) * gradient;
    state.v = state.beta2 * state.v + (1.0 - state.beta2) * gradient * gradient;
    const double m_hat = state.m / (1.0 - std::pow(state.beta1, static_cast<double>(state.step)));
    const double v_hat = state.v / (1.0 - std::pow(state.beta2, static_cast<double>(state.step)));
    parameter -= lr * m_hat / (std::sqrt(v_hat) + state.epsilon);
}

GaussianPolicy::GaussianPolicy(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
                               std::size_t depth, std::vector<double> low_in,
                               std::vector<double> high_in, Rng& init_rng)
    : low(std::move(low_in)), high(std::move(high_in)) {
    if (low.size() != action_dim || high.size() != action_dim) {
        throw Error("GaussianPolicy: action bounds do not match the action dimension");
    }
    for (std::size_t i = 0; i < action_dim; ++i) {
        if (!(low[i] < high[i])) throw Error("GaussianPolicy: empty action box");
    }
    std::vector<std::size_t> widths;
    widths.push_back(state_dim);
    for (std::size_t d = 0; d < depth; ++d) widths.push_back(hidden);
    widths.push_back(2 * action_dim);
    actor = Mlp::make(widths, Activation::relu, Activation::identity, init_rng);
    // start at the box center with a modest exploration std (exp(-1.5))
    actor.zero_output_layer();
    for (std::size_t i = 0; i < action_dim; ++i) actor.biases.back()[action_dim + i] = -1.5;
    actor_opt = AdamState::zeros_like(actor);
    target_entropy = -static_cast<double>(action_dim);
}

double GaussianPolicy::alpha() const {
    return std::exp(log_alpha);
}

std::vector<double> GaussianPolicy::act(std::span<const double> state, bool stochastic,
                                        Rng& rng) const {
    const std::vector<double> out = forward(actor, state);
    const std::size_t da = action_dim();
    std::vector<double> action(da);
    for (std::size_t i = 0; i < da; ++i) {
        double u = out[i];
        if (stochastic) {
            const double log_std = std::clamp(out[da + i], kLogStdMin, kLogStdMax);
            u += std::exp(log_std) * rng.normal();
        }
        const double t = std::tanh(u);
        action[i] = low[i] + (t + 1.0) * 0.5 * (high[i] - low[i]);
    }
    return action;
}

SoftCritic::SoftCritic(std::size_t state_dim, std::size_t action_dim, std::size_t hidden,
                       std::size_t depth, Rng& init_rng) {
    std::vector<std::size_t> widths;
    widths.push_back(state_dim + action_dim);
    for (std::size_t d = 0; d < depth; ++d) widths.push_back(hidden);
    widths.push_back(1);
    q1 = Mlp::make(widths, Activation::relu, Activation::identity, init_rng);
    q2 = Mlp::make(widths, Activation::relu, Activation::identity, init_rng);
    q1_target = q1;
    q2_target = q2;
    q1_opt = AdamState::zeros_like(q1);
    q2_opt = AdamState::zeros_like(q2);
}

void SoftCritic::polyak_update() {
    auto blend = [this](Mlp& target, const Mlp& online) {
        for (std::size_t l = 0; l < online.weights.size(); ++l) {
            for (std::size_t i = 0; i < online.weights[l].size(); ++i) {
                target.weights[l][i] =
                    (1.0 - polyak) * target.weights[l][i] + polyak * online.weights[l][i];
            }
            for (std::size_t i = 0; i < online.biases[l].size(); ++i) {
                target.biases[l][i] =
                    (1.0 - polyak) * target.biases[l][i] + polyak * online.biases[l][i];
            }
        }
    };
    blend(q1_target, q1);
    blend(q2_target, q2);
}

std::vector<double> critic_targets(const GaussianPolicy& policy, const SoftCritic& critic,
                                   const ReplayBuffer& replay,
                                   std::span<const std::size_t> batch,
                                   std::span<const double> noise) {
    const std::size_t da = policy.action_dim();
    if (noise.size() != batch.size() * da) {
        throw Error("critic_targets: noise size must be batch * action_dim");
    }
    const double alpha = policy.alpha();
    std::vector<double> targets(batch.size());
    std::vector<double> input;
    std::vector<double> next_action(da);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const ReplayItem& item = replay[batch[k]];
        const std::vector<double> out = forward(policy.actor, item.next_state);
        double log_prob = 0.0;
        for (std::size_t i = 0; i < da; ++i) {
            const double log_std = std::clamp(out[da + i], kLogStdMin, kLogStdMax);
            const double z = noise[k * da + i];
            const double u = out[i] + std::exp(log_std) * z;
            const double t = std::tanh(u);
            const double width = policy.high[i] - policy.low[i];
            next_action[i] = policy.low[i] + (t + 1.0) * 0.5 * width;
            log_prob += -0.5 * z * z - log_std - kHalfLog2Pi -
                        std::log((1.0 - t * t) + kSquashEps) - std::log(width * 0.5);
        }
        concat(item.next_state, next_action, input);
        const double q_min =
            std::min(forward(critic.q1_target, input)[0], forward(critic.q2_target, input)[0]);
        targets[k] =
            item.reward + critic.gamma * (item.done ? 0.0 : 1.0) * (q_min - alpha * log_prob);
    }
    return targets;
}

CriticLossResult critic_loss(const SoftCritic& critic, const ReplayBuffer& replay,
                             std::span<const std::size_t> batch,
                             std::span<const double> targets) {
    if (batch.empty()) throw Error("critic_loss: empty batch");
    if (targets.size() != batch.size()) {
        throw Error("critic_loss: one target per batch item required");
    }
    const double inv_batch = 1.0 / static_cast<double>(batch.size());
    CriticLossResult result;
    result.q1_grads = GradientBundle::zeros_like(critic.q1);
    result.q2_grads = GradientBundle::zeros_like(critic.q2);
    ForwardTrace trace;
    std::vector<double> input;
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const ReplayItem& item = replay[batch[k]];
        concat(item.state, item.action, input);
        const double q1v = forward(critic.q1, input, trace)[0];
        double gap = q1v - targets[k];
        result.loss += 0.5 * inv_batch * gap * gap;
        double upstream[1] = {inv_batch * gap};
        backprop(critic.q1, trace, upstream, result.q1_grads);

        const double q2v = forward(critic.q2, input, trace)[0];
        gap = q2v - targets[k];
        result.loss += 0.5 * inv_batch * gap * gap;
        upstream[0] = inv_batch * gap;
        backprop(critic.q2, trace, upstream, result.q2_grads);
    }
    return result;
}

ActorLossResult actor_loss(const GaussianPolicy& policy, const SoftCritic& critic,
                           const ReplayBuffer& replay, std::span<const std::size_t> batch,
                           std::span<const double> noise) {
    if (batch.empty()) throw Error("actor_loss: empty batch");
    const std::size_t da = policy.action_dim();
    if (noise.size() != batch.size() * da) {
        throw Error("actor_loss: noise size must be batch * action_dim");
    }
    const double alpha = policy.alpha();
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    ActorLossResult result;
    result.grads = GradientBundle::zeros_like(policy.actor);
    ForwardTrace actor_trace, q1_trace, q2_trace;
    std::vector<double> t_val(da), log_std(da), raw_log_std(da), action(da);
    std::vector<double> input, q_input_grad;
    std::vector<double> actor_upstream(2 * da);
    for (std::size_t k = 0; k < batch.size(); ++k) {
        const ReplayItem& item = replay[batch[k]];
        const std::vector<double>& out = forward(policy.actor, item.state, actor_trace);
        double log_prob = 0.0;
        for (std::size_t i = 0; i < da; ++i) {
            raw_log_std[i] = out[da + i];
            log_std[i] = std::clamp(raw_log_std[i], kLogStdMin, kLogStdMax);
            const double z = noise[k * da + i];
            const double u = out[i] + std::exp(log_std[i]) * z;
            t_val[i] = std::tanh(u);
            const double width = policy.high[i] - policy.low[i];
            action[i] = policy.low[i] + (t_val[i] + 1.0) * 0.5 * width;
            log_prob += -0.5 * z * z - log_std[i] - kHalfLog2Pi -
                        std::log((1.0 - t_val[i] * t_val[i]) + kSquashEps) -
                        std::log(width * 0.5);
        }
        concat(item.state, action, input);
        const double q1v = forward(critic.q1, input, q1_trace)[0];
        const double q2v = forward(critic.q2, input, q2_trace)[0];
        const bool use_q1 = q1v <= q2v;
        const double q_min = use_q1 ? q1v : q2v;

        result.loss += inv_batch * (alpha * log_prob - q_min);
        result.mean_log_prob += inv_batch * log_prob;

        // d(q_min)/d(action) through the selected critic, parameters frozen
        q_input_grad.assign(input.size(), 0.0);
        const double q_upstream[1] = {1.0};
        backprop_input(use_q1 ? critic.q1 : critic.q2, use_q1 ? q1_trace : q2_trace, q_upstream,
                       q_input_grad);
        for (std::size_t i = 0; i < da; ++i) {
            const double z = noise[k * da + i];
            const double one_minus_t2 = 1.0 - t_val[i] * t_val[i];
            const double dlogp_du = 2.0 * t_val[i] * one_minus_t2 / (one_minus_t2 + kSquashEps);
            const double width = policy.high[i] - policy.low[i];
            const double da_du = 0.5 * width * one_minus_t2;
            const double dq_du = q_input_grad[item.state.size() + i] * da_du;
            const double g_u = inv_batch * (alpha * dlogp_du - dq_du);
            actor_upstream[i] = g_u;
            const bool clamped = raw_log_std[i] < kLogStdMin || raw_log_std[i] > kLogStdMax;
            actor_upstream[da + i] =
                clamped ? 0.0 : g_u * z * std::exp(log_std[i]) - inv_batch * alpha;
        }
        backprop(policy.actor, actor_trace, actor_upstream, result.grads);
    }
    return result;
}

SacReport sac_update(GaussianPolicy& policy, SoftCritic& critic, const ReplayBuffer& replay,
                     std::span<const std::size_t> batch, const SacLearningRates& lrs,
                     Rng& noise_rng) {
    if (batch.empty()) throw Error("sac_update: empty batch");
    const std::size_t da = policy.action_dim();

    std::vector<double> noise(batch.size() * da);
    for (double& z : noise) z = noise_rng.normal();
    const std::vector<double> targets = critic_targets(policy, critic, replay, batch, noise);
    const CriticLossResult c_loss = critic_loss(critic, replay, batch, targets);
    adam_step(critic.q1, c_loss.q1_grads, critic.q1_opt, lrs.critic);
    adam_step(critic.q2, c_loss.q2_grads, critic.q2_opt, lrs.critic);

    for (double& z : noise) z = noise_rng.normal();
    const ActorLossResult a_loss = actor_loss(policy, critic, replay, batch, noise);
    adam_step(policy.actor, a_loss.grads, policy.actor_opt, lrs.actor);

    double alpha_loss = 0.0;
    if (policy.auto_alpha) {
        const double gap = a_loss.mean_log_prob + policy.target_entropy;
        alpha_loss = -policy.log_alpha * gap;
        adam_scalar_step(policy.log_alpha, -gap, policy.alpha_opt, lrs.alpha);
    }

    critic.polyak_update();

    SacReport report;
    report.critic_loss = c_loss.loss;
    report.actor_loss = a_loss.loss;
    report.alpha_loss = alpha_loss;
    report.alpha = policy.alpha();
    report.mean_log_prob = a_loss.mean_log_prob;
    if (!std::isfinite(report.critic_loss) || !std::isfinite(report.actor_loss) ||
        !std::isfinite(report.alpha)) {
        throw Error("sac_update: non-finite loss");
    }
    return report;
}

TrajectoryDistribution soft_update_exact(const TrajectoryDistribution& base,
                                         const std::function<double(const Trajectory&)>& R,
                                         double alpha) {
    if (alpha <= 0.0) throw Error("soft_update_exact: alpha must be positive");
    if (base.size() == 0) throw Error("soft_update_exact: empty trajectory distribution");

    TrajectoryDistribution result;
    result.trajectories = base.trajectories;
    result.probabilities.resize(base.size());

    std::vector<double> log_weights(base.size());
    double max_log = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < base.size(); ++i) {
        log_weights[i] = R(base.trajectories[i]) / alpha;
        if (base.probabilities[i] > 0.0) max_log = std::max(max_log, log_weights[i]);
    }
    if (!std::isfinite(max_log)) throw Error("soft_update_exact: distribution has no support");

    double z = 0.0;
    for (std::size_t i = 0; i < base.size(); ++i) {
        result.probabilities[i] = base.probabilities[i] * std::exp(log_weights[i] - max_log);
        z += result.probabilities[i];
    }
    for (double& p : result.probabilities) p /= z;
    return result;
}

TrajectoryDistribution soft_update_exact(const GridChain& env, const ExactPolicy& policy,
                                         const std::function<double(const Trajectory&)>& R,
                                         double alpha) {
    return soft_update_exact(enumerate_trajectories(env, policy), R, alpha);
}

WarmupResult warmup(Env& env, std::size_t steps, Rng& rng,
                    const std::function<double(std::span<const double>,
                                               std::span<const double>)>& reward,
                    std::uint64_t& next_trajectory_id, Rng& reset_rng) {
    WarmupResult result;
    const std::vector<double> low = env.action_low();
    const std::vector<double> high = env.action_high();
    std::vector<double> state = env.reset(reset_rng.next_u64());
    std::vector<Transition> episode;
    std::vector<double> action(low.size());
    // Uniform actions held over random segments: i.i.d. noise barely moves an
    // integrator, while held actions cover the workspace at every energy
    // level, which is the diversity the warm-up is for.
    std::size_t hold_remaining = 0;
    for (std::size_t step = 0; step < steps; ++step) {
        if (hold_remaining == 0) {
            for (std::size_t i = 0; i < action.size(); ++i) {
                action[i] = rng.uniform(low[i], high[i]);
            }
            hold_remaining = static_cast<std::size_t>(rng.uniform_int(5, 40));
        }
        --hold_remaining;
        auto [next_state, done] = env.step(action);
        ReplayItem item;
        item.state = state;
        item.action = action;
        item.next_state = next_state;
        item.reward = reward ? reward(state, action) : 0.0;
        item.done = done;
        result.transitions.push_back(item);
        episode.push_back({state, action, next_state, done});
        state = std::move(next_state);
        if (done) {
            result.trajectories.emplace_back(next_trajectory_id++, std::move(episode));
            episode.clear();
            state = env.reset(reset_rng.next_u64());
            hold_remaining = 0;
        }
    }
    return result;
}

} // namespace tdrl
