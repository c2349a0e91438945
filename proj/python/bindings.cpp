#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "tdrl/config.hpp"
#include "tdrl/error.hpp"
#include "tdrl/envs.hpp"
#include "tdrl/lexicomp.hpp"
#include "tdrl/oracle.hpp"
#include "tdrl/return_learner.hpp"
#include "tdrl/sac.hpp"
#include "tdrl/testkit.hpp"
#include "tdrl/train.hpp"
#include "tdrl/verify.hpp"

#include <memory>
#include <string>

namespace py = pybind11;
using namespace tdrl;

namespace {

Trajectory make_trajectory(std::uint64_t id,
                           const std::vector<std::tuple<std::vector<double>, std::vector<double>,
                                                        std::vector<double>, bool>>& steps) {
    std::vector<Transition> transitions;
    transitions.reserve(steps.size());
    for (const auto& [state, action, next_state, done] : steps) {
        transitions.push_back({state, action, next_state, done});
    }
    return Trajectory(id, std::move(transitions));
}

py::dict outcome_to_dict(const TestOutcome& outcome) {
    py::dict d;
    d["trajectory_id"] = outcome.trajectory_id;
    d["passfail"] = outcome.passfail_bits;
    d["indicative"] = outcome.indicative_values;
    return d;
}

// Owns an environment together with its built-in suite so evaluations share
// one statistics stream.
struct SuiteHandle {
    explicit SuiteHandle(const Env& env, std::size_t history_capacity)
        : suite(builtin_suite(env, history_capacity)) {}
    TestSuite suite;
};

py::dict json_to_py(const nlohmann::json& j) {
    py::object obj = py::module_::import("json").attr("loads")(j.dump());
    return obj.cast<py::dict>();
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "test-driven reinforcement learning core";

    py::register_exception<Error>(m, "TdrlError");

    py::class_<Trajectory>(m, "Trajectory")
        .def(py::init(&make_trajectory), py::arg("id"), py::arg("steps"))
        .def_property_readonly("id", &Trajectory::id)
        .def_property_readonly("length", &Trajectory::length)
        .def("states", &Trajectory::state_sequence);

    py::class_<Env, std::unique_ptr<Env>>(m, "Env")
        .def_property_readonly("name", &Env::name)
        .def_property_readonly("state_dim", &Env::state_dim)
        .def_property_readonly("action_dim", &Env::action_dim)
        .def_property_readonly("horizon", &Env::horizon)
        .def_property_readonly("action_low", &Env::action_low)
        .def_property_readonly("action_high", &Env::action_high)
        .def("reset", [](Env& env, std::uint64_t seed) { return env.reset(seed); },
             py::arg("seed") = 0)
        .def("step", [](Env& env, const std::vector<double>& action) {
            return env.step(action);
        });

    m.def("make_env", &make_env, py::arg("name"));

    py::class_<GridChain>(m, "GridChain")
        .def(py::init<int, int, int, double>(), py::arg("state_count"), py::arg("action_count"),
             py::arg("horizon"), py::arg("move_probability"))
        .def_static("standard", &GridChain::standard)
        .def_property_readonly("state_count", &GridChain::state_count)
        .def_property_readonly("action_count", &GridChain::action_count)
        .def_property_readonly("horizon", &GridChain::horizon)
        .def_property_readonly("goal_state", &GridChain::goal_state);

    py::class_<SuiteHandle>(m, "BuiltinSuite")
        .def(py::init([](const Env& env, std::size_t history_capacity) {
                 return std::make_unique<SuiteHandle>(env, history_capacity);
             }),
             py::arg("env"), py::arg("history_capacity") = 10000)
        .def(py::init([](const GridChain& env, std::size_t history_capacity) {
                 return std::make_unique<SuiteHandle>(env, history_capacity);
             }),
             py::arg("env"), py::arg("history_capacity") = 10000)
        .def_property_readonly("passfail_names",
                               [](const SuiteHandle& h) {
                                   std::vector<std::string> names;
                                   for (std::size_t i = 0; i < h.suite.passfail_count(); ++i) {
                                       names.push_back(h.suite.passfail_name(i));
                                   }
                                   return names;
                               })
        .def_property_readonly("indicative_names",
                               [](const SuiteHandle& h) {
                                   std::vector<std::string> names;
                                   for (std::size_t i = 0; i < h.suite.indicative_count(); ++i) {
                                       names.push_back(h.suite.indicative_name(i));
                                   }
                                   return names;
                               })
        .def("evaluate",
             [](SuiteHandle& h, const Trajectory& t) { return outcome_to_dict(h.suite.evaluate(t)); })
        .def("pass_rate",
             [](const SuiteHandle& h, std::size_t index) { return h.suite.stats().pass_rate(index); })
        .def("compare", [](SuiteHandle& h, const Trajectory& a, const Trajectory& b) {
            const TestOutcome oa = h.suite.evaluate(a);
            const TestOutcome ob = h.suite.evaluate(b);
            return compare(oa, ob, h.suite.stats());
        });

    m.def("pass_count", [](const std::vector<std::uint8_t>& bits) {
        TestOutcome o;
        o.passfail_bits = bits;
        return pass_count(o);
    });
    m.def("skewness",
          [](const std::vector<double>& values) { return skewness(values); });
    m.def("p_hat", &p_hat, py::arg("r1"), py::arg("r2"));

    py::class_<ExactPolicy>(m, "ExactPolicy")
        .def_static("uniform", &ExactPolicy::uniform)
        .def_readwrite("probabilities", &ExactPolicy::probabilities);

    py::class_<TrajectoryDistribution>(m, "TrajectoryDistribution")
        .def_property_readonly("trajectories",
                               [](const TrajectoryDistribution& d) { return d.trajectories; })
        .def_property_readonly("probabilities",
                               [](const TrajectoryDistribution& d) { return d.probabilities; })
        .def("__len__", &TrajectoryDistribution::size);

    m.def("enumerate_trajectories", &enumerate_trajectories, py::arg("env"), py::arg("policy"));
    m.def(
        "soft_update_exact",
        [](const TrajectoryDistribution& base, const std::function<double(const Trajectory&)>& R,
           double alpha) { return soft_update_exact(base, R, alpha); },
        py::arg("base"), py::arg("returns"), py::arg("alpha"));

    py::enum_<MetricKind>(m, "Metric")
        .value("hamming_states", MetricKind::hamming_states)
        .value("mean_state_distance", MetricKind::mean_state_distance);

    py::class_<OptimalSet>(m, "OptimalSet")
        .def("__len__", &OptimalSet::size)
        .def_property_readonly("members", [](const OptimalSet& s) { return s.members; });

    m.def("optimal_set", [](const TrajectoryDistribution& space, const GridChain& env) {
        TestSuite suite = builtin_suite(env);
        return optimal_set(space, suite);
    });
    m.def("distance_to_set", &distance_to_set, py::arg("trajectory"), py::arg("set"),
          py::arg("metric") = MetricKind::hamming_states);
    m.def("wasserstein_to_dirac", &wasserstein_to_dirac, py::arg("dist"), py::arg("set"),
          py::arg("metric") = MetricKind::hamming_states, py::arg("p") = 1.0);
    m.def("mu_reference", &mu_reference, py::arg("a"), py::arg("b"), py::arg("set"),
          py::arg("metric") = MetricKind::hamming_states);

    m.def(
        "verify_theory",
        [](int instances, std::uint64_t seed) {
            return json_to_py(verify_theory(instances, seed).to_json());
        },
        py::arg("instances") = 100, py::arg("seed") = 0);

    m.def(
        "train",
        [](const std::string& config_path, const std::string& out_dir) {
            Trainer trainer(load_config(config_path), out_dir);
            return json_to_py(trainer.run().to_json());
        },
        py::arg("config_path"), py::arg("out_dir"));
}
