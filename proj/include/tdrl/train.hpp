#pragma once

#include "tdrl/config.hpp"
#include "tdrl/envs.hpp"
#include "tdrl/logging.hpp"
#include "tdrl/replay.hpp"
#include "tdrl/return_learner.hpp"
#include "tdrl/reward_learner.hpp"
#include "tdrl/sac.hpp"

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>

namespace tdrl {

/// Environment factory honoring the config's env_overrides block.
std::unique_ptr<Env> make_env_from_config(const RunConfig& config);

struct EvalReport {
    std::size_t episodes = 0;
    std::size_t all_pass_episodes = 0;
    double all_pass_fraction = 0.0;
    std::vector<std::string> passfail_names;
    std::vector<double> passfail_rates;
    std::vector<std::string> indicative_names;
    std::vector<double> indicative_means;

    nlohmann::json to_json() const;
};

/// Rolls out `episodes` stochastic episodes and scores them on a fresh
/// built-in suite (training statistics stay untouched).
EvalReport evaluate_policy(Env& env, const GaussianPolicy& policy, std::size_t episodes,
                           Rng& rng);

/// The full training loop: environment interaction, trajectory collection,
/// periodic return/reward learning with replay relabeling, and soft
/// actor-critic policy updates. Deterministic for a fixed config and seed.
class Trainer {
public:
    Trainer(RunConfig config, std::filesystem::path out_dir);

    /// Runs warmup, all remaining iterations, the final checkpoint, and the
    /// evaluation pass. Returns the final evaluation report.
    EvalReport run();

    /// One main-loop iteration (warmup must have run first).
    void step();
    void warmup_phase();
    EvalReport evaluate(std::size_t episodes);

    void save_checkpoint(const std::string& tag);
    void restore_checkpoint(const std::filesystem::path& checkpoint_dir);

    std::uint64_t iteration() const { return iteration_; }
    std::uint64_t episode_count() const { return episode_count_; }
    const RunConfig& config() const { return config_; }
    const std::filesystem::path& out_dir() const { return out_dir_; }
    const GaussianPolicy& policy() const { return *policy_; }
    const SoftCritic& critic() const { return *critic_; }
    const ReplayBuffer& replay() const { return replay_; }
    const TrajectoryBuffer& trajectories() const { return trajectory_buffer_; }
    TestSuite& suite() { return *suite_; }
    Env& env() { return *env_; }

private:
    friend void write_checkpoint(const Trainer& trainer, const std::filesystem::path& dir);
    friend void read_checkpoint(Trainer& trainer, const std::filesystem::path& dir);

    void log_row();
    double reward_value(std::span<const double> state, std::span<const double> action) const;
    void finish_episode();

    RunConfig config_;
    std::filesystem::path out_dir_;

    std::unique_ptr<Env> env_;
    std::unique_ptr<TestSuite> suite_;
    std::unique_ptr<GaussianPolicy> policy_;
    std::unique_ptr<SoftCritic> critic_;
    std::unique_ptr<ReturnEnsemble> return_ensemble_;
    std::unique_ptr<RewardEnsemble> reward_ensemble_;
    ReplayBuffer replay_;
    TrajectoryBuffer trajectory_buffer_;

    std::map<std::string, Rng> streams_;
    Rng& stream(const std::string& name);

    std::uint64_t iteration_ = 0;
    std::uint64_t episode_count_ = 0;
    std::uint64_t next_trajectory_id_ = 0;
    bool warmed_up_ = false;

    std::vector<double> state_;
    std::vector<Transition> episode_;

    std::unique_ptr<CsvLogger> logger_;
    RoundReport last_return_report_;
    RewardRoundReport last_reward_report_;
    SacReport last_sac_report_;
};

} // namespace tdrl
