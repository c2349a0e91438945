#include "tdrl/train.hpp"

#include "tdrl/checkpoint.hpp"
#include "tdrl/error.hpp"

#include <cmath>
#include <fstream>

namespace tdrl {

namespace {

template <typename T>
T override_or(const nlohmann::json& overrides, const char* key, T fallback) {
    if (!overrides.contains(key)) return fallback;
    try {
        return overrides.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(std::string("config: env override '") + key + "' has the wrong type");
    }
}

} // namespace

std::unique_ptr<Env> make_env_from_config(const RunConfig& config) {
    const nlohmann::json& o = config.env_overrides;
    if (config.env_name == "pointmass_reach") {
        PointMassReach::Params params;
        params.dt = override_or(o, "dt", params.dt);
        params.horizon = override_or(o, "horizon", params.horizon);
        params.v_cap = override_or(o, "v_cap", params.v_cap);
        params.goal[0] = override_or(o, "goal_x", params.goal[0]);
        params.goal[1] = override_or(o, "goal_y", params.goal[1]);
        params.start[0] = override_or(o, "start_x", params.start[0]);
        params.start[1] = override_or(o, "start_y", params.start[1]);
        params.goal_radius = override_or(o, "goal_radius", params.goal_radius);
        params.speed_fraction = override_or(o, "speed_fraction", params.speed_fraction);
        params.energy_budget = override_or(o, "energy_budget", params.energy_budget);
        return std::make_unique<PointMassReach>(params);
    }
    if (config.env_name == "grid_chain") {
        const GridChain standard = GridChain::standard();
        return std::make_unique<GridChain>(
            override_or(o, "state_count", standard.state_count()),
            override_or(o, "action_count", standard.action_count()),
            override_or<int>(o, "horizon", static_cast<int>(standard.horizon())),
            override_or(o, "move_probability", 0.8));
    }
    throw Error("make_env_from_config: unknown environment '" + config.env_name + "'");
}

nlohmann::json EvalReport::to_json() const {
    nlohmann::json j;
    j["episodes"] = episodes;
    j["all_pass_episodes"] = all_pass_episodes;
    j["all_pass_fraction"] = all_pass_fraction;
    nlohmann::json rates = nlohmann::json::object();
    for (std::size_t i = 0; i < passfail_names.size(); ++i) {
        rates[passfail_names[i]] = passfail_rates[i];
    }
    j["passfail_rates"] = rates;
    nlohmann::json means = nlohmann::json::object();
    for (std::size_t i = 0; i < indicative_names.size(); ++i) {
        means[indicative_names[i]] = indicative_means[i];
    }
    j["indicative_means"] = means;
    return j;
}

EvalReport evaluate_policy(Env& env, const GaussianPolicy& policy, std::size_t episodes,
                           Rng& rng) {
    TestSuite suite = builtin_suite(env);
    EvalReport report;
    report.episodes = episodes;
    for (std::size_t i = 0; i < suite.passfail_count(); ++i) {
        report.passfail_names.push_back(suite.passfail_name(i));
    }
    for (std::size_t j = 0; j < suite.indicative_count(); ++j) {
        report.indicative_names.push_back(suite.indicative_name(j));
    }

    const int all = static_cast<int>(suite.passfail_count());
    for (std::size_t e = 0; e < episodes; ++e) {
        std::vector<double> state = env.reset(rng.next_u64());
        std::vector<Transition> transitions;
        transitions.reserve(env.horizon());
        bool done = false;
        while (!done) {
            const std::vector<double> action = policy.act(state, true, rng);
            auto [next_state, finished] = env.step(action);
            transitions.push_back({state, action, next_state, finished});
            state = std::move(next_state);
            done = finished;
        }
        const TestOutcome& outcome = suite.evaluate(Trajectory(e, std::move(transitions)));
        if (pass_count(outcome) == all) ++report.all_pass_episodes;
    }
    report.all_pass_fraction =
        static_cast<double>(report.all_pass_episodes) / static_cast<double>(episodes);
    for (std::size_t i = 0; i < suite.passfail_count(); ++i) {
        report.passfail_rates.push_back(suite.stats().pass_rate(i));
    }
    for (std::size_t j = 0; j < suite.indicative_count(); ++j) {
        report.indicative_means.push_back(suite.stats().history_mean(j));
    }
    return report;
}

Trainer::Trainer(RunConfig config, std::filesystem::path out_dir)
    : config_(std::move(config)),
      out_dir_(std::move(out_dir)),
      replay_(config_.replay_capacity),
      trajectory_buffer_(config_.trajectory_max_num) {
    config_.validate();
    env_ = make_env_from_config(config_);
    suite_ = std::make_unique<TestSuite>(builtin_suite(*env_, config_.history_capacity));

    for (const char* name : {"init", "env", "warmup", "policy", "pairs", "reward", "update",
                             "eval"}) {
        streams_.emplace(name, Rng::stream(config_.seed, name));
    }
    Rng& init = stream("init");
    policy_ = std::make_unique<GaussianPolicy>(env_->state_dim(), env_->action_dim(),
                                               config_.actor_hidden, config_.actor_depth,
                                               env_->action_low(), env_->action_high(), init);
    policy_->log_alpha = std::log(config_.init_alpha);
    policy_->auto_alpha = config_.auto_alpha;
    if (!std::isnan(config_.target_entropy)) policy_->target_entropy = config_.target_entropy;
    critic_ = std::make_unique<SoftCritic>(env_->state_dim(), env_->action_dim(),
                                           config_.critic_hidden, config_.critic_depth, init);
    critic_->polyak = config_.critic_polyak;
    critic_->gamma = config_.discount;
    return_ensemble_ =
        std::make_unique<ReturnEnsemble>(suite_->indicative_count(), config_.ret_hidden,
                                         config_.ret_depth, config_.ret_ensemble, init);
    reward_ensemble_ = std::make_unique<RewardEnsemble>(env_->state_dim(), env_->action_dim(),
                                                        config_.rew_hidden, config_.rew_depth,
                                                        config_.rew_ensemble, init);

    std::filesystem::create_directories(out_dir_);
    std::filesystem::create_directories(out_dir_ / "checkpoints");
    save_config(config_, out_dir_ / "config.json");

    std::vector<std::string> columns = {"iteration", "episodes"};
    for (std::size_t i = 0; i < suite_->passfail_count(); ++i) {
        columns.push_back("pass_rate_" + suite_->passfail_name(i));
    }
    for (std::size_t j = 0; j < suite_->indicative_count(); ++j) {
        columns.push_back("ind_mean_" + suite_->indicative_name(j));
    }
    for (const char* c : {"loss_dis", "loss_penalty", "loss_reward", "actor_loss", "critic_loss",
                          "alpha", "grad_norm_dis", "grad_norm_pen", "es_stopped"}) {
        columns.emplace_back(c);
    }
    logger_ = std::make_unique<CsvLogger>(out_dir_ / "metrics.csv", std::move(columns));
}

Rng& Trainer::stream(const std::string& name) {
    auto it = streams_.find(name);
    if (it == streams_.end()) throw Error("Trainer: unknown rng stream '" + name + "'");
    return it->second;
}

double Trainer::reward_value(std::span<const double> state, std::span<const double> action) const {
    return reward_ensemble_->value(state, action);
}

void Trainer::warmup_phase() {
    if (warmed_up_) throw Error("Trainer: warmup already ran");
    WarmupResult result = warmup(
        *env_, config_.unsupervised_steps, stream("warmup"),
        [this](std::span<const double> s, std::span<const double> a) {
            return reward_value(s, a);
        },
        next_trajectory_id_, stream("env"));
    for (ReplayItem& item : result.transitions) replay_.push(std::move(item));
    for (Trajectory& trajectory : result.trajectories) {
        suite_->evaluate(trajectory);
        if (auto evicted = trajectory_buffer_.push(std::move(trajectory))) {
            suite_->forget(*evicted);
        }
        ++episode_count_;
    }
    state_ = env_->reset(stream("env").next_u64());
    episode_.clear();
    warmed_up_ = true;
}

void Trainer::finish_episode() {
    Trajectory trajectory(next_trajectory_id_++, std::move(episode_));
    episode_ = {};
    suite_->evaluate(trajectory);
    if (auto evicted = trajectory_buffer_.push(std::move(trajectory))) {
        suite_->forget(*evicted);
    }
    ++episode_count_;
    state_ = env_->reset(stream("env").next_u64());
}

void Trainer::step() {
    if (!warmed_up_) throw Error("Trainer: run warmup_phase() before step()");

    const std::vector<double> action = policy_->act(state_, true, stream("policy"));
    auto [next_state, done] = env_->step(action);
    ReplayItem item;
    item.state = state_;
    item.action = action;
    item.next_state = next_state;
    item.reward = reward_value(state_, action);
    item.done = done;
    replay_.push(std::move(item));
    episode_.push_back({state_, action, next_state, done});
    state_ = std::move(next_state);
    if (done) finish_episode();

    ++iteration_;

    if (iteration_ % config_.ret_update_interval == 0 && trajectory_buffer_.size() >= 2) {
        ReturnUpdateConfig ret;
        ret.batch_size = config_.ret_batch_size;
        ret.update_num = config_.ret_update_num;
        ret.lr = config_.ret_lr;
        ret.change_penalty = config_.ret_change_penalty;
        ret.es_multiple = config_.es_multiple;
        last_return_report_ = update_round(*return_ensemble_, trajectory_buffer_, *suite_,
                                           config_.balance_strategy(), ret, stream("pairs"));
    }
    if (iteration_ % config_.rew_update_interval == 0 && !trajectory_buffer_.empty()) {
        RewardUpdateConfig rew;
        rew.batch_size = config_.rew_batch_size;
        rew.update_num = config_.rew_update_num;
        rew.lr = config_.rew_lr;
        last_reward_report_ = update_round(
            *reward_ensemble_, trajectory_buffer_,
            [this](const Trajectory& t) { return return_ensemble_->value(suite_->evaluate(t)); },
            rew, stream("reward"));
        relabel(replay_, *reward_ensemble_);
    }

    SacLearningRates lrs;
    lrs.actor = config_.actor_lr;
    lrs.critic = config_.critic_lr;
    lrs.alpha = config_.alpha_lr;
    for (std::size_t k = 0; k < config_.policy_steps_per_iter; ++k) {
        if (replay_.size() < config_.batch_size) break;
        const auto batch = replay_.sample_indices(config_.batch_size, stream("update"));
        last_sac_report_ = sac_update(*policy_, *critic_, replay_, batch, lrs, stream("update"));
    }

    if (iteration_ % config_.log_interval == 0) log_row();
    if (config_.checkpoint_interval != 0 && iteration_ % config_.checkpoint_interval == 0) {
        save_checkpoint("iter" + std::to_string(iteration_));
    }
}

void Trainer::log_row() {
    std::vector<double> row;
    row.push_back(static_cast<double>(iteration_));
    row.push_back(static_cast<double>(episode_count_));
    for (std::size_t i = 0; i < suite_->passfail_count(); ++i) {
        row.push_back(suite_->stats().pass_rate(i));
    }
    for (std::size_t j = 0; j < suite_->indicative_count(); ++j) {
        row.push_back(suite_->stats().history_mean(j));
    }
    row.push_back(last_return_report_.loss_dis);
    row.push_back(last_return_report_.loss_penalty);
    row.push_back(last_reward_report_.loss);
    row.push_back(last_sac_report_.actor_loss);
    row.push_back(last_sac_report_.critic_loss);
    row.push_back(policy_->alpha());
    row.push_back(last_return_report_.grad_norm_dis);
    row.push_back(last_return_report_.grad_norm_pen);
    row.push_back(last_return_report_.es_stopped ? 1.0 : 0.0);
    logger_->row(row);
}

EvalReport Trainer::evaluate(std::size_t episodes) {
    return evaluate_policy(*env_, *policy_, episodes, stream("eval"));
}

EvalReport Trainer::run() {
    warmup_phase();
    while (iteration_ < config_.total_iterations) step();
    logger_->flush();
    save_checkpoint("final");
    EvalReport report = evaluate(config_.eval_episodes);
    std::ofstream out(out_dir_ / "eval.json");
    out << report.to_json().dump(2) << '\n';
    return report;
}

void Trainer::save_checkpoint(const std::string& tag) {
    write_checkpoint(*this, out_dir_ / "checkpoints" / tag);
}

void Trainer::restore_checkpoint(const std::filesystem::path& checkpoint_dir) {
    read_checkpoint(*this, checkpoint_dir);
}

} // namespace tdrl
