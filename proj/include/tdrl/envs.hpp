#pragma once

#include "tdrl/rng.hpp"
#include "tdrl/testkit.hpp"
#include "tdrl/trajectory.hpp"

#include <array>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace tdrl {

/// Environment contract: fixed-horizon episodic task with a box action space.
class Env {
public:
    virtual ~Env() = default;
    virtual std::string name() const = 0;
    virtual std::size_t state_dim() const = 0;
    virtual std::size_t action_dim() const = 0;
    virtual std::vector<double> action_low() const = 0;
    virtual std::vector<double> action_high() const = 0;
    virtual std::size_t horizon() const = 0;
    virtual std::vector<double> reset(std::uint64_t seed) = 0;
    /// Returns (next_state, done); done is true only at the horizon.
    virtual std::pair<std::vector<double>, bool> step(std::span<const double> action) = 0;
    /// Serialized runtime state for bit-exact checkpoint resume.
    virtual std::string serialize_state() const = 0;
    virtual void restore_state(const std::string& text) = 0;
};

/// Planar double integrator steering toward a fixed goal.
/// State (x, y, vx, vy); action is an acceleration in [-1, 1]^2;
/// x <- x + v dt, v <- clip(v + a dt, +-v_cap). Deterministic.
class PointMassReach final : public Env {
public:
    struct Params {
        double dt = 0.05;
        std::size_t horizon = 200;
        double v_cap = 2.0;
        std::array<double, 2> goal{3.0, 3.0};
        std::array<double, 2> start{0.0, 0.0};
        double goal_radius = 0.1;
        double speed_fraction = 0.9;
        double energy_budget = 40.0;
    };

    PointMassReach();
    explicit PointMassReach(Params params);

    std::string name() const override { return "pointmass_reach"; }
    std::size_t state_dim() const override { return 4; }
    std::size_t action_dim() const override { return 2; }
    std::vector<double> action_low() const override { return {-1.0, -1.0}; }
    std::vector<double> action_high() const override { return {1.0, 1.0}; }
    std::size_t horizon() const override { return params_.horizon; }
    std::vector<double> reset(std::uint64_t seed) override;
    std::pair<std::vector<double>, bool> step(std::span<const double> action) override;
    std::string serialize_state() const override;
    void restore_state(const std::string& text) override;

    const Params& params() const { return params_; }

private:
    Params params_;
    std::array<double, 4> state_{};
    std::size_t steps_ = 0;
};

/// Tabular line MDP, small enough to enumerate its whole trajectory space.
/// Action 0 moves left, action 1 moves right (each succeeding with the move
/// probability, staying put otherwise); action 2, when present, stays.
class GridChain final : public Env {
public:
    struct Branch {
        int next = 0;
        double probability = 0.0;
    };

    GridChain(int state_count, int action_count, int horizon, double move_probability);

    std::string name() const override { return "grid_chain"; }
    std::size_t state_dim() const override { return 1; }
    std::size_t action_dim() const override { return 1; }
    std::vector<double> action_low() const override { return {0.0}; }
    std::vector<double> action_high() const override { return {static_cast<double>(action_count_ - 1)}; }
    std::size_t horizon() const override { return static_cast<std::size_t>(horizon_); }
    std::vector<double> reset(std::uint64_t seed) override;
    std::pair<std::vector<double>, bool> step(std::span<const double> action) override;
    std::string serialize_state() const override;
    void restore_state(const std::string& text) override;

    int state_count() const { return state_count_; }
    int action_count() const { return action_count_; }
    int start_state() const { return 0; }
    int goal_state() const { return state_count_ - 1; }
    std::span<const Branch> branches(int state, int action) const;

    /// Default instance: 5 states, 2 actions, horizon 4, move probability 0.8.
    static GridChain standard();
    /// Random instance whose optimal trajectory set is provably non-empty
    /// (horizon equals state_count - 1 so the all-right path exists).
    static GridChain randomized(Rng& rng);

private:
    int state_count_;
    int action_count_;
    int horizon_;
    double move_probability_;
    std::vector<std::vector<std::vector<Branch>>> table_; // [state][action] -> branches
    int state_ = 0;
    int steps_ = 0;
    Rng step_rng_{0};
};

std::unique_ptr<Env> make_env(const std::string& name);

/// Built-in test suite for an environment, reading thresholds from its
/// parameters.
TestSuite builtin_suite(const PointMassReach& env, std::size_t history_capacity = 10000);
TestSuite builtin_suite(const GridChain& env, std::size_t history_capacity = 10000);
TestSuite builtin_suite(const Env& env, std::size_t history_capacity = 10000);

/// Tabular policy: action distribution per (timestep, state).
struct ExactPolicy {
    std::vector<std::vector<std::vector<double>>> probabilities; // [t][state][action]

    static ExactPolicy uniform(const GridChain& env);
    static ExactPolicy random(const GridChain& env, Rng& rng);
    /// Every conditional distribution must sum to 1 within 1e-12.
    void validate() const;
};

/// Exhaustive trajectory space of a policy on an enumerable environment.
/// Trajectories are listed in depth-first (action, branch) order with ids
/// equal to their enumeration index; probabilities sum to 1 within 1e-12.
struct TrajectoryDistribution {
    std::vector<Trajectory> trajectories;
    std::vector<double> probabilities;

    std::size_t size() const { return trajectories.size(); }
};

TrajectoryDistribution enumerate_trajectories(const GridChain& env, const ExactPolicy& policy);

} // namespace tdrl
