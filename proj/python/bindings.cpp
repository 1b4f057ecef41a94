#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>
#include <string>
#include <vector>

#include "gmc/analysis.hpp"
#include "gmc/config.hpp"
#include "gmc/errors.hpp"
#include "gmc/experiment.hpp"
#include "gmc/gmc_stats.hpp"
#include "gmc/gridworld.hpp"
#include "gmc/rl_agents.hpp"
#include "gmc/signals.hpp"

namespace py = pybind11;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw gmc::DimensionError("expected a one-dimensional array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> to_array(std::span<const double> xs) {
  return py::array_t<double>(py::array::ShapeContainer{static_cast<py::ssize_t>(xs.size())}, xs.data());
}

py::array_t<double> to_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  py::array_t<double> out({rows.size(), cols});
  auto view = out.mutable_unchecked<2>();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < cols; ++j) view(i, j) = rows[i][j];
  }
  return out;
}

py::array_t<double> observation_array(const gmc::Observation& obs) {
  py::array_t<double> out({obs.size, obs.size, gmc::kObsChannels});
  std::copy(obs.channels.begin(), obs.channels.end(), out.mutable_data());
  return out;
}

py::dict run_metrics_dict(const gmc::RunMetrics& m) {
  py::dict d;
  d["method"] = m.method;
  d["seed"] = m.seed;
  d["test_loss"] = to_matrix(m.test_loss);
  d["visits"] = to_matrix(m.visits);
  d["auc"] = gmc::auc(m.mean_test_loss());
  return d;
}

}  // namespace

PYBIND11_MODULE(_gmc, m) {
  m.doc() = "Gradient-momentum coupling experiments";

  py::register_exception<gmc::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<gmc::DimensionError>(m, "DimensionError", PyExc_ValueError);
  py::register_exception<gmc::NumericalError>(m, "NumericalError", PyExc_ArithmeticError);

  py::class_<gmc::GmcConfig>(m, "GmcConfig")
      .def(py::init<>())
      .def_readwrite("beta0", &gmc::GmcConfig::beta0)
      .def_readwrite("beta1", &gmc::GmcConfig::beta1)
      .def_readwrite("epsilon", &gmc::GmcConfig::epsilon)
      .def_readwrite("bias_correction", &gmc::GmcConfig::bias_correction);

  py::class_<gmc::GmcState>(m, "GmcState")
      .def(py::init<std::size_t, gmc::GmcConfig>(), py::arg("dim"), py::arg("config") = gmc::GmcConfig{})
      .def("update", [](gmc::GmcState& s, const Array& g) { s.update(to_vector(g)); })
      .def("update_batch",
           [](gmc::GmcState& s, const Array& mean_g, const Array& mean_sq) {
             s.update(to_vector(mean_g), to_vector(mean_sq));
           })
      .def_property_readonly("dim", &gmc::GmcState::dim)
      .def_property_readonly("step_count", &gmc::GmcState::step_count)
      .def_property_readonly("m", [](const gmc::GmcState& s) { return to_array(s.m()); })
      .def_property_readonly("v", [](const gmc::GmcState& s) { return to_array(s.v()); })
      .def("coupling_weights", [](const gmc::GmcState& s) { return to_array(s.coupling_weights()); });

  m.def("gmc",
        [](const Array& g, const gmc::GmcState& s, bool normalize_dim) {
          return gmc::gmc(to_vector(g), s, normalize_dim);
        },
        py::arg("grads"), py::arg("state"), py::arg("normalize_dim") = true);
  m.def("gmc_dot_product",
        [](const Array& g, const gmc::GmcState& s) { return gmc::gmc_dot_product(to_vector(g), s); });
  m.def("gmc_cosine",
        [](const Array& g, const gmc::GmcState& s) { return gmc::gmc_cosine(to_vector(g), s); });

  m.def("auc", [](const Array& c) { return gmc::auc(to_vector(c)); });
  m.def("confidence_interval",
        [](const Array& xs, double level) {
          const gmc::Interval i = gmc::confidence_interval(to_vector(xs), level);
          return py::make_tuple(i.mean, i.half_width);
        },
        py::arg("samples"), py::arg("level") = 0.95);
  m.def("welch_t_test", [](const Array& a, const Array& b) {
    const gmc::WelchResult w = gmc::welch_t_test(to_vector(a), to_vector(b));
    return py::make_tuple(w.t_stat, w.dof, w.p_value);
  });
  m.def("student_t_quantile", &gmc::student_t_quantile, py::arg("p"), py::arg("dof"));
  m.def("peak_epoch",
        [](const Array& c, std::size_t window) { return gmc::peak_epoch(to_vector(c), window); },
        py::arg("curve"), py::arg("window") = 5);

  py::class_<gmc::StepResult>(m, "StepResult")
      .def_property_readonly("observation",
                             [](const gmc::StepResult& r) { return observation_array(r.observation); })
      .def_readonly("reward", &gmc::StepResult::reward)
      .def_readonly("done", &gmc::StepResult::done)
      .def_readonly("reached_goal", &gmc::StepResult::reached_goal)
      .def_readonly("steps", &gmc::StepResult::steps);

  py::class_<gmc::DoorKeyEnv>(m, "DoorKeyEnv")
      .def(py::init([](int size, int max_steps, bool door_noise, double noise_std) {
             return gmc::DoorKeyEnv(gmc::DoorKeyConfig{size, max_steps, door_noise, noise_std});
           }),
           py::arg("size") = 8, py::arg("max_steps") = 0, py::arg("door_noise") = false,
           py::arg("noise_std") = 1.0)
      .def("reset", [](gmc::DoorKeyEnv& e, std::uint64_t seed) { return observation_array(e.reset(seed)); })
      .def("step", &gmc::DoorKeyEnv::step)
      .def_property_readonly("agent_pos",
                             [](const gmc::DoorKeyEnv& e) { return py::make_tuple(e.agent_pos().x, e.agent_pos().y); })
      .def_property_readonly("agent_dir", &gmc::DoorKeyEnv::agent_dir)
      .def_property_readonly("door_pos",
                             [](const gmc::DoorKeyEnv& e) { return py::make_tuple(e.door_pos().x, e.door_pos().y); })
      .def("plan_to_goal", [](const gmc::DoorKeyEnv& e) { return gmc::plan_to_goal(e); });

  m.def("validate_config", [](const std::string& text) {
    gmc::ExperimentConfig c = gmc::parse_config(text);
    c.validate();
    return gmc::dump_config(c);
  });
  m.def("run_bandit",
        [](const std::string& config_text, const std::string& method, std::uint64_t seed) {
          gmc::ExperimentConfig c = gmc::parse_config(config_text);
          c.validate();
          const gmc::LabeledSet data = gmc::load_dataset(c);
          gmc::RunMetrics run;
          {
            py::gil_scoped_release release;
            run = gmc::run_bandit(c.bandit_for(method), data, seed);
          }
          run.method = method;
          return run_metrics_dict(run);
        },
        py::arg("config_text"), py::arg("method"), py::arg("seed") = 0);
  m.def("run_rl",
        [](const std::string& config_text, const std::string& method, std::uint64_t seed) {
          gmc::ExperimentConfig c = gmc::parse_config(config_text);
          c.validate();
          gmc::RlRunResult r;
          {
            py::gil_scoped_release release;
            r = gmc::run_rl(c.rl_for(method), seed);
          }
          std::vector<double> reward, intrinsic;
          for (const auto& ro : r.rollouts) {
            reward.push_back(ro.mean_episode_reward);
            intrinsic.push_back(ro.mean_intrinsic);
          }
          py::dict d;
          d["mean_episode_reward"] = to_array(reward);
          d["mean_intrinsic"] = to_array(intrinsic);
          d["episode_rewards"] = to_array(r.episode_rewards);
          d["stopped_early"] = r.stopped_early;
          return d;
        },
        py::arg("config_text"), py::arg("method"), py::arg("seed") = 0);
  m.def("run_experiment", [](const std::string& config_path, const std::string& out_dir) {
    gmc::ExperimentConfig c = gmc::load_config(config_path);
    if (!out_dir.empty()) c.output_dir = out_dir;
    c.validate();
    py::gil_scoped_release release;
    gmc::run_experiment(c);
  }, py::arg("config_path"), py::arg("out_dir") = "");
}
