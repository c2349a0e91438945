#include "tdrl/config.hpp"

#include "tdrl/error.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace tdrl {

namespace {

const std::set<std::string> kKnownKeys = {
    "env_name",          "env_overrides",     "seed",
    "total_iterations",  "strategy",          "discount",
    "actor_hidden",      "actor_depth",       "critic_hidden",
    "critic_depth",      "actor_lr",          "critic_lr",
    "alpha_lr",          "batch_size",        "critic_polyak",
    "unsupervised_steps", "trajectory_max_num", "segment_size",
    "ret_lr",            "rew_lr",            "ret_ensemble",
    "rew_ensemble",      "ret_batch_size",    "rew_batch_size",
    "ret_update_num",    "rew_update_num",    "ret_change_penalty",
    "ret_update_interval", "rew_update_interval", "es_multiple",
    "ret_hidden",        "ret_depth",         "rew_hidden",
    "rew_depth",         "replay_capacity",   "policy_steps_per_iter",
    "init_alpha",        "auto_alpha",        "target_entropy",
    "history_capacity",  "log_interval",      "eval_episodes",
    "checkpoint_interval",
};

template <typename T>
void read(const nlohmann::json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(std::string("config: key '") + key + "' has the wrong type");
    }
}

void require_positive(double value, const char* key) {
    if (!(value > 0.0)) throw Error(std::string("config: key '") + key + "' must be positive");
}

void require_positive(std::size_t value, const char* key) {
    if (value == 0) throw Error(std::string("config: key '") + key + "' must be positive");
}

} // namespace

BalanceStrategy RunConfig::balance_strategy() const {
    if (strategy == "GN") return BalanceStrategy::gradient_norm;
    if (strategy == "ES") return BalanceStrategy::early_stop;
    throw Error("config: key 'strategy' must be \"GN\" or \"ES\", got \"" + strategy + "\"");
}

void RunConfig::validate() const {
    balance_strategy();
    if (total_iterations == 0) throw Error("config: key 'total_iterations' must be positive");
    if (!(discount >= 0.0 && discount <= 1.0)) {
        throw Error("config: key 'discount' must lie in [0, 1]");
    }
    require_positive(actor_hidden, "actor_hidden");
    require_positive(actor_depth, "actor_depth");
    require_positive(critic_hidden, "critic_hidden");
    require_positive(critic_depth, "critic_depth");
    require_positive(actor_lr, "actor_lr");
    require_positive(critic_lr, "critic_lr");
    require_positive(alpha_lr, "alpha_lr");
    require_positive(batch_size, "batch_size");
    require_positive(critic_polyak, "critic_polyak");
    if (critic_polyak > 1.0) throw Error("config: key 'critic_polyak' must lie in (0, 1]");
    require_positive(trajectory_max_num, "trajectory_max_num");
    require_positive(segment_size, "segment_size");
    require_positive(ret_lr, "ret_lr");
    require_positive(rew_lr, "rew_lr");
    require_positive(ret_ensemble, "ret_ensemble");
    require_positive(rew_ensemble, "rew_ensemble");
    require_positive(ret_batch_size, "ret_batch_size");
    require_positive(rew_batch_size, "rew_batch_size");
    require_positive(ret_update_num, "ret_update_num");
    require_positive(rew_update_num, "rew_update_num");
    if (ret_change_penalty < 0.0) {
        throw Error("config: key 'ret_change_penalty' must be non-negative");
    }
    require_positive(ret_update_interval, "ret_update_interval");
    require_positive(rew_update_interval, "rew_update_interval");
    require_positive(es_multiple, "es_multiple");
    require_positive(ret_hidden, "ret_hidden");
    require_positive(ret_depth, "ret_depth");
    require_positive(rew_hidden, "rew_hidden");
    require_positive(rew_depth, "rew_depth");
    require_positive(replay_capacity, "replay_capacity");
    require_positive(policy_steps_per_iter, "policy_steps_per_iter");
    require_positive(init_alpha, "init_alpha");
    require_positive(history_capacity, "history_capacity");
    require_positive(log_interval, "log_interval");
    require_positive(eval_episodes, "eval_episodes");
}

RunConfig config_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw Error("config: top-level JSON value must be an object");
    for (const auto& [key, value] : j.items()) {
        if (!kKnownKeys.contains(key)) throw Error("config: unknown key '" + key + "'");
    }
    RunConfig c;
    read(j, "env_name", c.env_name);
    if (j.contains("env_overrides")) {
        if (!j.at("env_overrides").is_object()) {
            throw Error("config: key 'env_overrides' must be an object");
        }
        c.env_overrides = j.at("env_overrides");
    }
    read(j, "seed", c.seed);
    read(j, "total_iterations", c.total_iterations);
    read(j, "strategy", c.strategy);
    read(j, "discount", c.discount);
    read(j, "actor_hidden", c.actor_hidden);
    read(j, "actor_depth", c.actor_depth);
    read(j, "critic_hidden", c.critic_hidden);
    read(j, "critic_depth", c.critic_depth);
    read(j, "actor_lr", c.actor_lr);
    read(j, "critic_lr", c.critic_lr);
    read(j, "alpha_lr", c.alpha_lr);
    read(j, "batch_size", c.batch_size);
    read(j, "critic_polyak", c.critic_polyak);
    read(j, "unsupervised_steps", c.unsupervised_steps);
    read(j, "trajectory_max_num", c.trajectory_max_num);
    read(j, "segment_size", c.segment_size);
    read(j, "ret_lr", c.ret_lr);
    read(j, "rew_lr", c.rew_lr);
    read(j, "ret_ensemble", c.ret_ensemble);
    read(j, "rew_ensemble", c.rew_ensemble);
    read(j, "ret_batch_size", c.ret_batch_size);
    read(j, "rew_batch_size", c.rew_batch_size);
    read(j, "ret_update_num", c.ret_update_num);
    read(j, "rew_update_num", c.rew_update_num);
    read(j, "ret_change_penalty", c.ret_change_penalty);
    read(j, "ret_update_interval", c.ret_update_interval);
    read(j, "rew_update_interval", c.rew_update_interval);
    read(j, "es_multiple", c.es_multiple);
    read(j, "ret_hidden", c.ret_hidden);
    read(j, "ret_depth", c.ret_depth);
    read(j, "rew_hidden", c.rew_hidden);
    read(j, "rew_depth", c.rew_depth);
    read(j, "replay_capacity", c.replay_capacity);
    read(j, "policy_steps_per_iter", c.policy_steps_per_iter);
    read(j, "init_alpha", c.init_alpha);
    read(j, "auto_alpha", c.auto_alpha);
    if (j.contains("target_entropy") && !j.at("target_entropy").is_null()) {
        read(j, "target_entropy", c.target_entropy);
    }
    read(j, "history_capacity", c.history_capacity);
    read(j, "log_interval", c.log_interval);
    read(j, "eval_episodes", c.eval_episodes);
    read(j, "checkpoint_interval", c.checkpoint_interval);
    c.validate();
    return c;
}

nlohmann::json config_to_json(const RunConfig& c) {
    nlohmann::json j;
    j["env_name"] = c.env_name;
    j["env_overrides"] = c.env_overrides;
    j["seed"] = c.seed;
    j["total_iterations"] = c.total_iterations;
    j["strategy"] = c.strategy;
    j["discount"] = c.discount;
    j["actor_hidden"] = c.actor_hidden;
    j["actor_depth"] = c.actor_depth;
    j["critic_hidden"] = c.critic_hidden;
    j["critic_depth"] = c.critic_depth;
    j["actor_lr"] = c.actor_lr;
    j["critic_lr"] = c.critic_lr;
    j["alpha_lr"] = c.alpha_lr;
    j["batch_size"] = c.batch_size;
    j["critic_polyak"] = c.critic_polyak;
    j["unsupervised_steps"] = c.unsupervised_steps;
    j["trajectory_max_num"] = c.trajectory_max_num;
    j["segment_size"] = c.segment_size;
    j["ret_lr"] = c.ret_lr;
    j["rew_lr"] = c.rew_lr;
    j["ret_ensemble"] = c.ret_ensemble;
    j["rew_ensemble"] = c.rew_ensemble;
    j["ret_batch_size"] = c.ret_batch_size;
    j["rew_batch_size"] = c.rew_batch_size;
    j["ret_update_num"] = c.ret_update_num;
    j["rew_update_num"] = c.rew_update_num;
    j["ret_change_penalty"] = c.ret_change_penalty;
    j["ret_update_interval"] = c.ret_update_interval;
    j["rew_update_interval"] = c.rew_update_interval;
    j["es_multiple"] = c.es_multiple;
    j["ret_hidden"] = c.ret_hidden;
    j["ret_depth"] = c.ret_depth;
    j["rew_hidden"] = c.rew_hidden;
    j["rew_depth"] = c.rew_depth;
    j["replay_capacity"] = c.replay_capacity;
    j["policy_steps_per_iter"] = c.policy_steps_per_iter;
    j["init_alpha"] = c.init_alpha;
    j["auto_alpha"] = c.auto_alpha;
    if (std::isnan(c.target_entropy)) {
        j["target_entropy"] = nullptr;
    } else {
        j["target_entropy"] = c.target_entropy;
    }
    j["history_capacity"] = c.history_capacity;
    j["log_interval"] = c.log_interval;
    j["eval_episodes"] = c.eval_episodes;
    j["checkpoint_interval"] = c.checkpoint_interval;
    return j;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("config: cannot open file " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error("config: failed to parse " + path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

void save_config(const RunConfig& config, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) throw Error("config: cannot write file " + path.string());
    out << config_to_json(config).dump(2) << '\n';
}

} // namespace tdrl
