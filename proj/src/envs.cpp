#include "tdrl/envs.hpp"

#include "tdrl/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_set>

namespace tdrl {

namespace {

double norm2(double x, double y) {
    return std::sqrt(x * x + y * y);
}

} // namespace

PointMassReach::PointMassReach() : PointMassReach(Params{}) {}

PointMassReach::PointMassReach(Params params) : params_(params) {
    if (params_.dt <= 0.0 || params_.horizon == 0 || params_.v_cap <= 0.0 ||
        params_.goal_radius <= 0.0 || params_.speed_fraction <= 0.0 ||
        params_.energy_budget <= 0.0) {
        throw Error("PointMassReach: parameters must be positive");
    }
}

std::vector<double> PointMassReach::reset(std::uint64_t) {
    state_ = {params_.start[0], params_.start[1], 0.0, 0.0};
    steps_ = 0;
    return {state_.begin(), state_.end()};
}

std::pair<std::vector<double>, bool> PointMassReach::step(std::span<const double> action) {
    if (action.size() != 2) throw Error("PointMassReach::step: action must be 2-dimensional");
    if (steps_ >= params_.horizon) throw Error("PointMassReach::step: episode already finished");
    const double ax = std::clamp(action[0], -1.0, 1.0);
    const double ay = std::clamp(action[1], -1.0, 1.0);
    state_[0] += state_[2] * params_.dt;
    state_[1] += state_[3] * params_.dt;
    double vx = state_[2] + ax * params_.dt;
    double vy = state_[3] + ay * params_.dt;
    const double speed = norm2(vx, vy);
    if (speed > params_.v_cap) {
        const double factor = params_.v_cap / speed;
        vx *= factor;
        vy *= factor;
    }
    state_[2] = vx;
    state_[3] = vy;
    ++steps_;
    return {{state_.begin(), state_.end()}, steps_ == params_.horizon};
}

std::string PointMassReach::serialize_state() const {
    std::ostringstream out;
    out.precision(17);
    out << state_[0] << ' ' << state_[1] << ' ' << state_[2] << ' ' << state_[3] << ' ' << steps_;
    return out.str();
}

void PointMassReach::restore_state(const std::string& text) {
    std::istringstream in(text);
    in >> state_[0] >> state_[1] >> state_[2] >> state_[3] >> steps_;
    if (!in) throw Error("PointMassReach::restore_state: malformed state text");
}

GridChain::GridChain(int state_count, int action_count, int horizon, double move_probability)
    : state_count_(state_count),
      action_count_(action_count),
      horizon_(horizon),
      move_probability_(move_probability) {
    if (state_count < 2 || state_count > 8) throw Error("GridChain: state count must be in [2, 8]");
    if (action_count < 2 || action_count > 3) throw Error("GridChain: action count must be 2 or 3");
    if (horizon < 1 || horizon > 6) throw Error("GridChain: horizon must be in [1, 6]");
    if (move_probability <= 0.0 || move_probability > 1.0) {
        throw Error("GridChain: move probability must be in (0, 1]");
    }
    table_.resize(state_count_);
    for (int s = 0; s < state_count_; ++s) {
        table_[s].resize(action_count_);
        for (int a = 0; a < action_count_; ++a) {
            auto& branches = table_[s][a];
            int target = s;
            if (a == 0) target = std::max(s - 1, 0);
            if (a == 1) target = std::min(s + 1, state_count_ - 1);
            if (target == s || move_probability_ == 1.0) {
                branches.push_back({target, 1.0});
            } else {
                branches.push_back({target, move_probability_});
                branches.push_back({s, 1.0 - move_probability_});
            }
        }
    }
}

std::vector<double> GridChain::reset(std::uint64_t seed) {
    state_ = 0;
    steps_ = 0;
    step_rng_ = Rng(seed);
    return {static_cast<double>(state_)};
}

std::pair<std::vector<double>, bool> GridChain::step(std::span<const double> action) {
    if (action.size() != 1) throw Error("GridChain::step: action must be 1-dimensional");
    if (steps_ >= horizon_) throw Error("GridChain::step: episode already finished");
    const int a = std::clamp(static_cast<int>(std::lround(action[0])), 0, action_count_ - 1);
    const auto& branches = table_[state_][a];
    double draw = step_rng_.uniform();
    int next = branches.back().next;
    for (const Branch& branch : branches) {
        if (draw < branch.probability) {
            next = branch.next;
            break;
        }
        draw -= branch.probability;
    }
    state_ = next;
    ++steps_;
    return {{static_cast<double>(state_)}, steps_ == horizon_};
}

std::string GridChain::serialize_state() const {
    std::ostringstream out;
    out << state_ << ' ' << steps_ << ' ' << step_rng_.serialize();
    return out.str();
}

void GridChain::restore_state(const std::string& text) {
    std::istringstream in(text);
    in >> state_ >> steps_;
    if (!in) throw Error("GridChain::restore_state: malformed state text");
    std::string rest;
    std::getline(in, rest);
    step_rng_ = Rng::deserialize(rest);
}

std::span<const GridChain::Branch> GridChain::branches(int state, int action) const {
    return table_.at(state).at(action);
}

GridChain GridChain::standard() {
    return GridChain(5, 2, 4, 0.8);
}

GridChain GridChain::randomized(Rng& rng) {
    const int states = static_cast<int>(rng.uniform_int(4, 6));
    const int actions = static_cast<int>(rng.uniform_int(2, 3));
    // horizon = states - 1 keeps the all-right path inside the suite's
    // optimal set, so it is never empty.
    const int horizon = states - 1;
    static constexpr double kMoveProbs[] = {0.6, 0.7, 0.8, 0.9, 1.0};
    const double p = kMoveProbs[rng.uniform_int(0, 4)];
    return GridChain(states, actions, horizon, p);
}

std::unique_ptr<Env> make_env(const std::string& name) {
    if (name == "pointmass_reach") return std::make_unique<PointMassReach>();
    if (name == "grid_chain") return std::make_unique<GridChain>(GridChain::standard());
    throw Error("make_env: unknown environment '" + name + "'");
}

TestSuite builtin_suite(const PointMassReach& env, std::size_t history_capacity) {
    const auto params = env.params();
    const double speed_limit = params.speed_fraction * params.v_cap;
    const auto goal = params.goal;

    auto final_goal_distance = [goal](const Trajectory& trajectory) {
        const auto& last = trajectory.transitions().back().next_state;
        return norm2(last[0] - goal[0], last[1] - goal[1]);
    };
    auto max_speed = [](const Trajectory& trajectory) {
        const auto& first = trajectory.transitions().front().state;
        double top = norm2(first[2], first[3]);
        for (const Transition& tr : trajectory.transitions()) {
            top = std::max(top, norm2(tr.next_state[2], tr.next_state[3]));
        }
        return top;
    };
    auto total_energy = [](const Trajectory& trajectory) {
        double energy = 0.0;
        for (const Transition& tr : trajectory.transitions()) {
            energy += tr.action[0] * tr.action[0] + tr.action[1] * tr.action[1];
        }
        return energy;
    };

    std::vector<PassFailTest> passfail;
    passfail.push_back({"pf-reach", [final_goal_distance, params](const Trajectory& t) {
                            return final_goal_distance(t) < params.goal_radius;
                        }});
    passfail.push_back({"pf-speed-limit", [max_speed, speed_limit](const Trajectory& t) {
                            return max_speed(t) <= speed_limit;
                        }});
    passfail.push_back({"pf-energy", [total_energy, params](const Trajectory& t) {
                            return total_energy(t) <= params.energy_budget;
                        }});

    std::vector<IndicativeTest> indicative;
    indicative.push_back({"ind-progress", [goal](const Trajectory& t) {
                              double sum = 0.0;
                              for (const Transition& tr : t.transitions()) {
                                  sum += norm2(tr.next_state[0] - goal[0],
                                               tr.next_state[1] - goal[1]);
                              }
                              return -sum / static_cast<double>(t.length());
                          }});
    indicative.push_back({"ind-speed-margin", [max_speed, speed_limit](const Trajectory& t) {
                              return speed_limit - max_speed(t);
                          }});
    indicative.push_back({"ind-energy-margin", [total_energy, params](const Trajectory& t) {
                              return params.energy_budget - total_energy(t);
                          }});
    return TestSuite(std::move(passfail), std::move(indicative), history_capacity);
}

TestSuite builtin_suite(const GridChain& env, std::size_t history_capacity) {
    const int goal = env.goal_state();

    std::vector<PassFailTest> passfail;
    passfail.push_back({"pf-goal", [goal](const Trajectory& t) {
                            return static_cast<int>(std::lround(
                                       t.transitions().back().next_state[0])) == goal;
                        }});
    passfail.push_back({"pf-no-revisit", [](const Trajectory& t) {
                            std::unordered_set<int> seen;
                            const auto states = t.state_sequence();
                            for (const auto& s : states) {
                                if (!seen.insert(static_cast<int>(std::lround(s[0]))).second) {
                                    return false;
                                }
                            }
                            return true;
                        }});

    std::vector<IndicativeTest> indicative;
    indicative.push_back({"ind-rightmost", [](const Trajectory& t) {
                              double top = t.transitions().front().state[0];
                              for (const Transition& tr : t.transitions()) {
                                  top = std::max(top, tr.next_state[0]);
                              }
                              return top;
                          }});
    indicative.push_back({"ind-steps-right", [](const Trajectory& t) {
                              int count = 0;
                              for (const Transition& tr : t.transitions()) {
                                  if (static_cast<int>(std::lround(tr.action[0])) == 1) ++count;
                              }
                              return static_cast<double>(count);
                          }});
    return TestSuite(std::move(passfail), std::move(indicative), history_capacity);
}

TestSuite builtin_suite(const Env& env, std::size_t history_capacity) {
    if (const auto* pm = dynamic_cast<const PointMassReach*>(&env)) {
        return builtin_suite(*pm, history_capacity);
    }
    if (const auto* gc = dynamic_cast<const GridChain*>(&env)) {
        return builtin_suite(*gc, history_capacity);
    }
    throw Error("builtin_suite: no built-in suite for environment '" + env.name() + "'");
}

ExactPolicy ExactPolicy::uniform(const GridChain& env) {
    ExactPolicy policy;
    policy.probabilities.assign(
        env.horizon(),
        std::vector<std::vector<double>>(
            env.state_count(),
            std::vector<double>(env.action_count(),
                                1.0 / static_cast<double>(env.action_count()))));
    return policy;
}

ExactPolicy ExactPolicy::random(const GridChain& env, Rng& rng) {
    ExactPolicy policy;
    policy.probabilities.resize(env.horizon());
    for (auto& per_state : policy.probabilities) {
        per_state.resize(env.state_count());
        for (auto& probs : per_state) {
            probs.resize(env.action_count());
            double total = 0.0;
            for (double& p : probs) {
                p = rng.uniform(0.05, 1.0);
                total += p;
            }
            for (double& p : probs) p /= total;
        }
    }
    return policy;
}

void ExactPolicy::validate() const {
    for (const auto& per_state : probabilities) {
        for (const auto& probs : per_state) {
            double total = 0.0;
            for (double p : probs) {
                if (p < 0.0) throw Error("ExactPolicy: negative action probability");
                total += p;
            }
            if (std::abs(total - 1.0) > 1e-12) {
                throw Error("ExactPolicy: action distribution does not sum to 1");
            }
        }
    }
}

TrajectoryDistribution enumerate_trajectories(const GridChain& env, const ExactPolicy& policy) {
    if (policy.probabilities.size() != env.horizon()) {
        throw Error("enumerate_trajectories: policy horizon does not match the environment");
    }
    policy.validate();

    // upper bound on the trajectory count: (actions * branches)^horizon
    double bound = 1.0;
    for (std::size_t t = 0; t < env.horizon(); ++t) {
        bound *= static_cast<double>(env.action_count()) * 2.0;
    }
    if (bound > 1e6) throw Error("enumerate_trajectories: trajectory space exceeds the guard");

    TrajectoryDistribution result;
    std::vector<Transition> path;
    path.reserve(env.horizon());

    const auto horizon = static_cast<int>(env.horizon());
    auto expand = [&](auto&& self, int state, int t, double probability) -> void {
        if (t == horizon) {
            result.trajectories.emplace_back(result.trajectories.size(), path);
            result.probabilities.push_back(probability);
            return;
        }
        for (int a = 0; a < env.action_count(); ++a) {
            const double action_prob = policy.probabilities[t][state][a];
            for (const GridChain::Branch& branch : env.branches(state, a)) {
                Transition tr;
                tr.state = {static_cast<double>(state)};
                tr.action = {static_cast<double>(a)};
                tr.next_state = {static_cast<double>(branch.next)};
                tr.done = (t + 1 == horizon);
                path.push_back(std::move(tr));
                self(self, branch.next, t + 1, probability * action_prob * branch.probability);
                path.pop_back();
            }
        }
    };
    expand(expand, env.start_state(), 0, 1.0);
    return result;
}

} // namespace tdrl
