#pragma once

#include "tdrl/return_learner.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>

namespace tdrl {

/// Full run configuration. Defaults follow the reference hyperparameter
/// table; every key can be overridden from JSON. Unknown keys and
/// out-of-range values are rejected with a diagnostic naming the key.
struct RunConfig {
    std::string env_name = "pointmass_reach";
    nlohmann::json env_overrides = nlohmann::json::object();

    std::uint64_t seed = 0;
    std::uint64_t total_iterations = 100000;
    std::string strategy = "ES"; // "GN" or "ES"

    double discount = 0.99;
    std::size_t actor_hidden = 1024;
    std::size_t actor_depth = 2;
    std::size_t critic_hidden = 1024;
    std::size_t critic_depth = 2;
    double actor_lr = 0.0005;
    double critic_lr = 0.0005;
    double alpha_lr = 0.0001;
    std::size_t batch_size = 1024;
    double critic_polyak = 0.005;
    std::size_t unsupervised_steps = 9000;
    std::size_t trajectory_max_num = 100;
    std::size_t segment_size = 50; // honored only by segment-compatible suites
    double ret_lr = 0.0003;
    double rew_lr = 0.0003;
    std::size_t ret_ensemble = 3;
    std::size_t rew_ensemble = 3;
    std::size_t ret_batch_size = 128;
    std::size_t rew_batch_size = 128;
    std::size_t ret_update_num = 50;
    std::size_t rew_update_num = 50;
    double ret_change_penalty = 0.1;
    std::size_t ret_update_interval = 5000;
    std::size_t rew_update_interval = 5000;
    double es_multiple = 10.0;

    std::size_t ret_hidden = 256;
    std::size_t ret_depth = 3;
    std::size_t rew_hidden = 256;
    std::size_t rew_depth = 3;

    std::size_t replay_capacity = 1000000;
    std::size_t policy_steps_per_iter = 1;
    double init_alpha = 0.1;
    bool auto_alpha = true;
    /// NaN selects the default target entropy -action_dim.
    double target_entropy = std::numeric_limits<double>::quiet_NaN();
    std::size_t history_capacity = 10000;
    std::size_t log_interval = 100;
    std::size_t eval_episodes = 50;
    std::size_t checkpoint_interval = 0; // 0: final checkpoint only

    BalanceStrategy balance_strategy() const;
    void validate() const;
};

RunConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config(const std::filesystem::path& path);
void save_config(const RunConfig& config, const std::filesystem::path& path);

} // namespace tdrl
