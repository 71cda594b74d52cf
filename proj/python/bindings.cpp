#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "swarmtraj/activations.hpp"
#include "swarmtraj/errors.hpp"
#include "swarmtraj/icdab.hpp"
#include "swarmtraj/lm_trainer.hpp"
#include "swarmtraj/metrics.hpp"
#include "swarmtraj/network.hpp"
#include "swarmtraj/swarm_gen.hpp"

namespace py = pybind11;
using namespace swarmtraj;

namespace {

ActivationSpec spec_from(const std::string& kind) { return ActivationSpec::of(activation_kind_from_string(kind)); }

// One row per waypoint: x, y, z, t.
Eigen::MatrixXd waypoint_matrix(const Trajectory& t) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(t.waypoints.size()), 4);
  for (std::size_t k = 0; k < t.waypoints.size(); ++k) {
    const auto& w = t.waypoints[k];
    m.row(static_cast<Eigen::Index>(k)) << w.x, w.y, w.z, w.t;
  }
  return m;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "UAV swarm trajectory prediction and deconfliction";

  static py::exception<Error> base(m, "Error", PyExc_RuntimeError);
  py::register_exception<UsageError>(m, "UsageError", PyExc_ValueError);
  py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
  py::register_exception<ShapeError>(m, "ShapeError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<IoError>(m, "IoError", PyExc_OSError);

  m.attr("ACTIVATIONS") = [] {
    std::vector<std::string> names;
    for (ActivationKind k : kAllActivationKinds) names.emplace_back(to_string(k));
    return names;
  }();

  py::class_<ActivationSpec>(m, "ActivationSpec")
      .def(py::init(&spec_from), py::arg("kind"))
      .def_property_readonly("kind", [](const ActivationSpec& s) { return std::string(to_string(s.kind)); })
      .def_readwrite("leaky_alpha", &ActivationSpec::leaky_alpha)
      .def_readwrite("swish_beta", &ActivationSpec::swish_beta)
      .def_readwrite("asg_alpha", &ActivationSpec::asg_alpha)
      .def_readwrite("asg_scale", &ActivationSpec::asg_scale)
      .def_readwrite("asg_shift", &ActivationSpec::asg_shift)
      .def("evaluate", [](const ActivationSpec& s, double x) { return evaluate(s, x); })
      .def("derivative", [](const ActivationSpec& s, double x) { return derivative(s, x); })
      .def("batch_evaluate",
           [](const ActivationSpec& s, const std::vector<double>& xs) { return batch_evaluate(s, xs); })
      .def("to_json", [](const ActivationSpec& s) { return nlohmann::json(s).dump(); });

  m.def("compute_metrics",
        [](const std::vector<double>& actual, const std::vector<double>& predicted) {
          return nlohmann::json(compute_all(actual, predicted)).dump();
        },
        py::arg("actual"), py::arg("predicted"));

  py::class_<GenConfig>(m, "GenConfig")
      .def(py::init<>())
      .def_readwrite("n_uavs", &GenConfig::n_uavs)
      .def_readwrite("cruise_speed", &GenConfig::cruise_speed)
      .def_readwrite("seed", &GenConfig::seed)
      .def("to_json", [](const GenConfig& c) { return nlohmann::json(c).dump(); });

  py::class_<SwarmDataset>(m, "SwarmDataset")
      .def_static("from_json", [](const std::string& s) { return nlohmann::json::parse(s).get<SwarmDataset>(); })
      .def("to_json", [](const SwarmDataset& d) { return nlohmann::json(d).dump(); })
      .def("__len__", [](const SwarmDataset& d) { return d.trajectories.size(); })
      .def_property_readonly("seed", [](const SwarmDataset& d) { return d.gen_config.seed; })
      .def("waypoints", [](const SwarmDataset& d, std::size_t i) { return waypoint_matrix(d.trajectories.at(i)); },
           py::arg("uav_id"));

  m.def("generate", &generate, py::arg("config"));
  m.def("validate_dataset", [](const SwarmDataset& d) {
    std::vector<std::tuple<int, std::string, std::string>> out;
    for (const auto& v : validate(d)) out.emplace_back(v.uav_id, v.field, v.message);
    return out;
  });

  py::class_<NetworkParams>(m, "NetworkParams")
      .def_static(
          "init",
          [](const std::string& kind, std::uint64_t seed, std::size_t n_inputs, std::size_t n_hidden,
             std::size_t n_outputs) {
            return init_params(NetworkShape{n_inputs, n_hidden, n_outputs}, spec_from(kind), seed);
          },
          py::arg("activation"), py::arg("seed"), py::arg("n_inputs") = 9, py::arg("n_hidden") = 15,
          py::arg("n_outputs") = 201)
      .def_property_readonly("parameter_count", [](const NetworkParams& p) { return p.shape.parameter_count(); })
      .def("flatten", &NetworkParams::flatten)
      .def("forward", [](const NetworkParams& p, const Eigen::VectorXd& x) { return forward(p, x); })
      .def("jacobian", [](const NetworkParams& p, const Eigen::VectorXd& x) { return jacobian(p, x); });

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("max_epochs", &TrainConfig::max_epochs)
      .def_readwrite("val_patience", &TrainConfig::val_patience)
      .def_readwrite("lambda_init", &TrainConfig::lambda_init)
      .def_readwrite("seed", &TrainConfig::seed)
      .def_readwrite("calibrate_activation", &TrainConfig::calibrate_activation)
      .def("to_json", [](const TrainConfig& c) { return nlohmann::json(c).dump(); });

  m.def(
      "train",
      [](const SwarmDataset& ds, const std::string& axis, const std::string& activation, const TrainConfig& c) {
        TrainResult r;
        {
          py::gil_scoped_release release;
          r = train(ds, axis_from_string(axis), spec_from(activation), c);
        }
        return std::make_pair(nlohmann::json(r.model).dump(), nlohmann::json(r.report).dump());
      },
      py::arg("dataset"), py::arg("axis"), py::arg("activation"), py::arg("config"));

  m.def(
      "predict",
      [](const std::string& model_json, const SwarmDataset& ds, std::size_t uav_id) {
        const TrainedModel model = nlohmann::json::parse(model_json).get<TrainedModel>();
        return Eigen::VectorXd(model.predict(ds.trajectories.at(uav_id)));
      },
      py::arg("model_json"), py::arg("dataset"), py::arg("uav_id"));

  py::class_<IcdabConfig>(m, "IcdabConfig")
      .def(py::init<>())
      .def_readwrite("radius_r", &IcdabConfig::radius_r)
      .def_readwrite("safe_distance", &IcdabConfig::safe_distance)
      .def_readwrite("time_threshold", &IcdabConfig::time_threshold)
      .def_readwrite("manipulation_limit", &IcdabConfig::manipulation_limit)
      .def_readwrite("padding_halfwidth", &IcdabConfig::padding_halfwidth)
      .def("to_json", [](const IcdabConfig& c) { return nlohmann::json(c).dump(); });

  m.def("detect_all", [](const SwarmDataset& ds, const IcdabConfig& c) {
    return nlohmann::json(detect_all(ds, c)).dump();
  });
  m.def("run_pipeline", [](const SwarmDataset& ds, const IcdabConfig& c) {
    DeconflictionReport r;
    {
      py::gil_scoped_release release;
      r = run_pipeline(ds, c);
    }
    return nlohmann::json(r).dump();
  });
  m.def("sweep_safe_distance", [](const SwarmDataset& ds, const IcdabConfig& c, const std::vector<double>& radii) {
    std::vector<std::tuple<double, std::size_t, std::size_t, std::size_t>> out;
    for (const auto& row : sweep_safe_distance(ds, c, radii)) {
      out.emplace_back(row.safe_radius, row.residual_collisions, row.n_batches, row.max_batch_size);
    }
    return out;
  });
}
