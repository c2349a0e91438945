#include "tdrl/checkpoint.hpp"

#include "tdrl/error.hpp"
#include "tdrl/train.hpp"

#include <json.hpp>

#include <fstream>

namespace tdrl {

namespace {

using nlohmann::json;

json transition_to_json(const Transition& t) {
    return json{{"s", t.state}, {"a", t.action}, {"ns", t.next_state}, {"d", t.done}};
}

Transition transition_from_json(const json& j) {
    Transition t;
    t.state = j.at("s").get<std::vector<double>>();
    t.action = j.at("a").get<std::vector<double>>();
    t.next_state = j.at("ns").get<std::vector<double>>();
    t.done = j.at("d").get<bool>();
    return t;
}

json adam_to_json(const AdamState& s) {
    return json{{"mw", s.m_weights}, {"vw", s.v_weights}, {"mb", s.m_biases},
                {"vb", s.v_biases}, {"step", s.step}};
}

void adam_from_json(const json& j, AdamState& s) {
    s.m_weights = j.at("mw").get<std::vector<std::vector<double>>>();
    s.v_weights = j.at("vw").get<std::vector<std::vector<double>>>();
    s.m_biases = j.at("mb").get<std::vector<std::vector<double>>>();
    s.v_biases = j.at("vb").get<std::vector<std::vector<double>>>();
    s.step = j.at("step").get<std::uint64_t>();
}

json outcome_to_json(const TestOutcome& o) {
    return json{{"id", o.trajectory_id}, {"pf", o.passfail_bits}, {"ind", o.indicative_values}};
}

TestOutcome outcome_from_json(const json& j) {
    TestOutcome o;
    o.trajectory_id = j.at("id").get<std::uint64_t>();
    o.passfail_bits = j.at("pf").get<std::vector<std::uint8_t>>();
    o.indicative_values = j.at("ind").get<std::vector<double>>();
    return o;
}

void save_net(const std::filesystem::path& path, const Mlp& net) {
    std::ofstream out(path);
    if (!out) throw Error("checkpoint: cannot write " + path.string());
    save_mlp(out, net);
}

Mlp load_net(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("checkpoint: missing network file " + path.string());
    return load_mlp(in);
}

void check_same_shape(const Mlp& restored, const Mlp& expected, const std::string& name) {
    if (restored.widths != expected.widths) {
        throw Error("checkpoint: network '" + name + "' has mismatched architecture");
    }
}

} // namespace

void write_checkpoint(const Trainer& trainer, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    save_net(dir / "actor.net", trainer.policy_->actor);
    save_net(dir / "q1.net", trainer.critic_->q1);
    save_net(dir / "q2.net", trainer.critic_->q2);
    save_net(dir / "q1_target.net", trainer.critic_->q1_target);
    save_net(dir / "q2_target.net", trainer.critic_->q2_target);
    for (std::size_t e = 0; e < trainer.return_ensemble_->member_count(); ++e) {
        save_net(dir / ("ret_" + std::to_string(e) + ".net"),
                 trainer.return_ensemble_->members()[e]);
    }
    for (std::size_t e = 0; e < trainer.reward_ensemble_->member_count(); ++e) {
        save_net(dir / ("rew_" + std::to_string(e) + ".net"),
                 trainer.reward_ensemble_->members()[e]);
    }

    json j;
    j["version"] = 1;
    j["iteration"] = trainer.iteration_;
    j["episode_count"] = trainer.episode_count_;
    j["next_trajectory_id"] = trainer.next_trajectory_id_;
    j["warmed_up"] = trainer.warmed_up_;
    j["state"] = trainer.state_;
    j["env_state"] = trainer.env_->serialize_state();

    json episode = json::array();
    for (const Transition& t : trainer.episode_) episode.push_back(transition_to_json(t));
    j["episode"] = std::move(episode);

    json streams = json::object();
    for (const auto& [name, rng] : trainer.streams_) streams[name] = rng.serialize();
    j["streams"] = std::move(streams);

    json replay = json::array();
    for (std::size_t i = 0; i < trainer.replay_.size(); ++i) {
        const ReplayItem& item = trainer.replay_[i];
        replay.push_back(json{{"s", item.state},
                              {"a", item.action},
                              {"ns", item.next_state},
                              {"r", item.reward},
                              {"d", item.done}});
    }
    j["replay"] = std::move(replay);

    json buffer = json::array();
    for (std::size_t i = 0; i < trainer.trajectory_buffer_.size(); ++i) {
        const Trajectory& trajectory = trainer.trajectory_buffer_[i];
        json transitions = json::array();
        for (const Transition& t : trajectory.transitions()) {
            transitions.push_back(transition_to_json(t));
        }
        buffer.push_back(json{{"id", trajectory.id()}, {"transitions", std::move(transitions)}});
    }
    j["trajectories"] = std::move(buffer);

    const TestStats& stats = trainer.suite_->stats();
    json stats_json;
    std::vector<std::uint64_t> evals, passes;
    for (std::size_t i = 0; i < stats.passfail_count(); ++i) {
        evals.push_back(stats.evaluations(i));
        passes.push_back(stats.passes(i));
    }
    std::vector<std::vector<double>> histories;
    std::vector<std::size_t> cursors;
    for (std::size_t jdx = 0; jdx < stats.indicative_count(); ++jdx) {
        const auto span = stats.history(jdx);
        histories.emplace_back(span.begin(), span.end());
        cursors.push_back(stats.history_cursor(jdx));
    }
    stats_json["evaluations"] = evals;
    stats_json["passes"] = passes;
    stats_json["histories"] = histories;
    stats_json["cursors"] = cursors;
    stats_json["capacity"] = stats.history_capacity();
    j["stats"] = std::move(stats_json);

    json outcomes = json::array();
    for (const TestOutcome& o : trainer.suite_->cached_outcomes()) {
        outcomes.push_back(outcome_to_json(o));
    }
    j["outcomes"] = std::move(outcomes);

    j["actor_opt"] = adam_to_json(trainer.policy_->actor_opt);
    j["q1_opt"] = adam_to_json(trainer.critic_->q1_opt);
    j["q2_opt"] = adam_to_json(trainer.critic_->q2_opt);
    json ret_opts = json::array();
    for (const AdamState& s : trainer.return_ensemble_->optimizer_states()) {
        ret_opts.push_back(adam_to_json(s));
    }
    j["ret_opts"] = std::move(ret_opts);
    json rew_opts = json::array();
    for (const AdamState& s : trainer.reward_ensemble_->optimizer_states()) {
        rew_opts.push_back(adam_to_json(s));
    }
    j["rew_opts"] = std::move(rew_opts);

    j["log_alpha"] = trainer.policy_->log_alpha;
    j["alpha_opt"] = json{{"m", trainer.policy_->alpha_opt.m},
                          {"v", trainer.policy_->alpha_opt.v},
                          {"step", trainer.policy_->alpha_opt.step}};

    j["last_return_report"] = json{{"steps", trainer.last_return_report_.steps},
                                   {"es_stopped", trainer.last_return_report_.es_stopped},
                                   {"loss_dis", trainer.last_return_report_.loss_dis},
                                   {"loss_penalty", trainer.last_return_report_.loss_penalty},
                                   {"grad_norm_dis", trainer.last_return_report_.grad_norm_dis},
                                   {"grad_norm_pen", trainer.last_return_report_.grad_norm_pen}};
    j["last_reward_report"] = json{{"steps", trainer.last_reward_report_.steps},
                                   {"loss", trainer.last_reward_report_.loss},
                                   {"grad_norm", trainer.last_reward_report_.grad_norm}};
    j["last_sac_report"] = json{{"critic_loss", trainer.last_sac_report_.critic_loss},
                                {"actor_loss", trainer.last_sac_report_.actor_loss},
                                {"alpha_loss", trainer.last_sac_report_.alpha_loss},
                                {"alpha", trainer.last_sac_report_.alpha},
                                {"mean_log_prob", trainer.last_sac_report_.mean_log_prob}};

    std::ofstream out(dir / "state.json");
    if (!out) throw Error("checkpoint: cannot write " + (dir / "state.json").string());
    out << j.dump() << '\n';
}

void read_checkpoint(Trainer& trainer, const std::filesystem::path& dir) {
    std::ifstream in(dir / "state.json");
    if (!in) throw Error("checkpoint: missing state file " + (dir / "state.json").string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error("checkpoint: malformed state file: " + std::string(e.what()));
    }
    if (j.at("version").get<int>() != 1) throw Error("checkpoint: unsupported version");

    Mlp actor = load_net(dir / "actor.net");
    check_same_shape(actor, trainer.policy_->actor, "actor");
    trainer.policy_->actor = std::move(actor);

    auto load_into = [&](const char* file, Mlp& target, const std::string& name) {
        Mlp net = load_net(dir / file);
        check_same_shape(net, target, name);
        target = std::move(net);
    };
    load_into("q1.net", trainer.critic_->q1, "q1");
    load_into("q2.net", trainer.critic_->q2, "q2");
    load_into("q1_target.net", trainer.critic_->q1_target, "q1_target");
    load_into("q2_target.net", trainer.critic_->q2_target, "q2_target");
    for (std::size_t e = 0; e < trainer.return_ensemble_->member_count(); ++e) {
        load_into(("ret_" + std::to_string(e) + ".net").c_str(),
                  trainer.return_ensemble_->members()[e], "ret_" + std::to_string(e));
    }
    for (std::size_t e = 0; e < trainer.reward_ensemble_->member_count(); ++e) {
        load_into(("rew_" + std::to_string(e) + ".net").c_str(),
                  trainer.reward_ensemble_->members()[e], "rew_" + std::to_string(e));
    }

    trainer.iteration_ = j.at("iteration").get<std::uint64_t>();
    trainer.episode_count_ = j.at("episode_count").get<std::uint64_t>();
    trainer.next_trajectory_id_ = j.at("next_trajectory_id").get<std::uint64_t>();
    trainer.warmed_up_ = j.at("warmed_up").get<bool>();
    trainer.state_ = j.at("state").get<std::vector<double>>();
    trainer.env_->restore_state(j.at("env_state").get<std::string>());

    trainer.episode_.clear();
    for (const json& t : j.at("episode")) trainer.episode_.push_back(transition_from_json(t));

    for (auto& [name, rng] : trainer.streams_) {
        rng = Rng::deserialize(j.at("streams").at(name).get<std::string>());
    }

    trainer.replay_ = ReplayBuffer(trainer.config_.replay_capacity);
    for (const json& item : j.at("replay")) {
        ReplayItem r;
        r.state = item.at("s").get<std::vector<double>>();
        r.action = item.at("a").get<std::vector<double>>();
        r.next_state = item.at("ns").get<std::vector<double>>();
        r.reward = item.at("r").get<double>();
        r.done = item.at("d").get<bool>();
        trainer.replay_.push(std::move(r));
    }

    trainer.trajectory_buffer_ = TrajectoryBuffer(trainer.config_.trajectory_max_num);
    for (const json& t : j.at("trajectories")) {
        std::vector<Transition> transitions;
        for (const json& tr : t.at("transitions")) {
            transitions.push_back(transition_from_json(tr));
        }
        trainer.trajectory_buffer_.push(
            Trajectory(t.at("id").get<std::uint64_t>(), std::move(transitions)));
    }

    const json& stats_json = j.at("stats");
    TestStats stats(stats_json.at("evaluations").get<std::vector<std::uint64_t>>(),
                    stats_json.at("passes").get<std::vector<std::uint64_t>>(),
                    stats_json.at("histories").get<std::vector<std::vector<double>>>(),
                    stats_json.at("cursors").get<std::vector<std::size_t>>(),
                    stats_json.at("capacity").get<std::size_t>());
    std::vector<TestOutcome> outcomes;
    for (const json& o : j.at("outcomes")) outcomes.push_back(outcome_from_json(o));
    trainer.suite_->restore(std::move(stats), std::move(outcomes));

    adam_from_json(j.at("actor_opt"), trainer.policy_->actor_opt);
    adam_from_json(j.at("q1_opt"), trainer.critic_->q1_opt);
    adam_from_json(j.at("q2_opt"), trainer.critic_->q2_opt);
    for (std::size_t e = 0; e < trainer.return_ensemble_->member_count(); ++e) {
        adam_from_json(j.at("ret_opts").at(e), trainer.return_ensemble_->optimizer_states()[e]);
    }
    for (std::size_t e = 0; e < trainer.reward_ensemble_->member_count(); ++e) {
        adam_from_json(j.at("rew_opts").at(e), trainer.reward_ensemble_->optimizer_states()[e]);
    }

    trainer.policy_->log_alpha = j.at("log_alpha").get<double>();
    trainer.policy_->alpha_opt.m = j.at("alpha_opt").at("m").get<double>();
    trainer.policy_->alpha_opt.v = j.at("alpha_opt").at("v").get<double>();
    trainer.policy_->alpha_opt.step = j.at("alpha_opt").at("step").get<std::uint64_t>();

    const json& ret_report = j.at("last_return_report");
    trainer.last_return_report_.steps = ret_report.at("steps").get<std::size_t>();
    trainer.last_return_report_.es_stopped = ret_report.at("es_stopped").get<bool>();
    trainer.last_return_report_.loss_dis = ret_report.at("loss_dis").get<double>();
    trainer.last_return_report_.loss_penalty = ret_report.at("loss_penalty").get<double>();
    trainer.last_return_report_.grad_norm_dis = ret_report.at("grad_norm_dis").get<double>();
    trainer.last_return_report_.grad_norm_pen = ret_report.at("grad_norm_pen").get<double>();
    const json& rew_report = j.at("last_reward_report");
    trainer.last_reward_report_.steps = rew_report.at("steps").get<std::size_t>();
    trainer.last_reward_report_.loss = rew_report.at("loss").get<double>();
    trainer.last_reward_report_.grad_norm = rew_report.at("grad_norm").get<double>();
    const json& sac_report = j.at("last_sac_report");
    trainer.last_sac_report_.critic_loss = sac_report.at("critic_loss").get<double>();
    trainer.last_sac_report_.actor_loss = sac_report.at("actor_loss").get<double>();
    trainer.last_sac_report_.alpha_loss = sac_report.at("alpha_loss").get<double>();
    trainer.last_sac_report_.alpha = sac_report.at("alpha").get<double>();
    trainer.last_sac_report_.mean_log_prob = sac_report.at("mean_log_prob").get<double>();
}

} // namespace tdrl
