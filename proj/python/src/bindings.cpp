#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <nlohmann/json.hpp>

#include "temporalot/agent.hpp"
#include "temporalot/error.hpp"
#include "temporalot/harness.hpp"
#include "temporalot/reward.hpp"

namespace py = pybind11;
using namespace temporalot;

namespace {

Trajectory make_trajectory(const Matrix& features, std::optional<std::vector<std::string>> actions) {
  return Trajectory(features, std::move(actions));
}

std::vector<Trajectory> to_trajectories(const std::vector<Matrix>& demos) {
  std::vector<Trajectory> out;
  out.reserve(demos.size());
  for (const Matrix& d : demos) out.emplace_back(d);
  return out;
}

py::dict trace_dict(const RewardTrace& t) {
  py::dict d;
  d["rewards"] = t.rewards;
  d["selected_demo"] = t.selected_demo;
  d["total"] = t.total;
  d["demo_totals"] = t.demo_totals;
  py::list diag;
  for (const SolveDiagnostics& s : t.diagnostics) {
    py::dict e;
    e["iterations_used"] = s.iterations_used;
    e["marginal_violation"] = s.marginal_violation;
    e["converged"] = s.converged;
    diag.append(e);
  }
  d["diagnostics"] = diag;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Masked optimal-transport imitation rewards";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());
  py::register_exception<FeasibilityError>(m, "FeasibilityError", base.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base.ptr());

  py::enum_<MaskKind>(m, "MaskKind")
      .value("ones", MaskKind::ones)
      .value("causal", MaskKind::causal)
      .value("band", MaskKind::band)
      .value("dynamic", MaskKind::dynamic);

  py::enum_<EnvId>(m, "EnvId")
      .value("grid_reach", EnvId::grid_reach)
      .value("grid_pause_then_move", EnvId::grid_pause_then_move)
      .value("pointmass_reach", EnvId::pointmass_reach);

  py::class_<Trajectory>(m, "Trajectory")
      .def(py::init(&make_trajectory), py::arg("features"), py::arg("actions") = std::nullopt)
      .def_property_readonly("features", &Trajectory::features)
      .def_property_readonly("actions", &Trajectory::actions)
      .def("__len__", [](const Trajectory& t) { return static_cast<std::size_t>(t.length()); })
      .def("__eq__", [](const Trajectory& a, const Trajectory& b) { return a == b; });

  m.def("load_trajectory", &load_trajectory, py::arg("path"));
  m.def("save_trajectory", &save_trajectory, py::arg("trajectory"), py::arg("path"));
  m.def("subsample_demo", &subsample_demo, py::arg("trajectory"), py::arg("stride"));

  m.def("cosine_cost", [](const Vector& a, const Vector& b) {
    return cosine_cost({a.data(), static_cast<std::size_t>(a.size())},
                       {b.data(), static_cast<std::size_t>(b.size())});
  });
  m.def(
      "context_cost_matrix",
      [](const Matrix& agent, const Matrix& demo, int k_c) {
        return context_cost_matrix(Trajectory(agent), Trajectory(demo), k_c).entries;
      },
      py::arg("agent"), py::arg("demo"), py::arg("k_c") = 1);

  m.def(
      "make_mask",
      [](MaskKind kind, const Matrix& cost, int k_m) {
        return make_mask(kind, CostMatrix{cost, 1}, k_m).entries;
      },
      py::arg("kind"), py::arg("cost"), py::arg("k_m") = 0);

  py::class_<SinkhornConfig>(m, "SinkhornConfig")
      .def(py::init<>())
      .def_readwrite("epsilon", &SinkhornConfig::epsilon)
      .def_readwrite("max_iterations", &SinkhornConfig::max_iterations)
      .def_readwrite("tolerance", &SinkhornConfig::tolerance)
      .def_readwrite("log_domain", &SinkhornConfig::log_domain)
      .def_readwrite("epsilon_scaling", &SinkhornConfig::epsilon_scaling)
      .def_readwrite("newton_steps", &SinkhornConfig::newton_steps);

  m.def(
      "solve",
      [](const Matrix& cost, const BinaryMatrix& mask, const SinkhornConfig& config) {
        Mask mk{mask, MaskKind::ones, 0};
        const TransportPlan p =
            solve(CostMatrix{cost, 1}, mk, Marginals::uniform(cost.rows(), cost.cols()), config);
        py::dict d;
        d["plan"] = p.plan;
        d["iterations_used"] = p.iterations_used;
        d["marginal_violation"] = p.marginal_violation;
        d["converged"] = p.converged;
        return d;
      },
      py::arg("cost"), py::arg("mask"), py::arg("config") = SinkhornConfig{});

  py::class_<RewardConfig>(m, "RewardConfig")
      .def(py::init<>())
      .def_static("vanilla", &RewardConfig::vanilla)
      .def_readwrite("k_c", &RewardConfig::context_length)
      .def_readwrite("mask_kind", &RewardConfig::mask_kind)
      .def_readwrite("k_m", &RewardConfig::window)
      .def_readwrite("sinkhorn", &RewardConfig::sinkhorn);

  m.def(
      "ot_rewards",
      [](const Matrix& agent, const Matrix& demo, const RewardConfig& config) {
        return ot_rewards(Trajectory(agent), Trajectory(demo), config);
      },
      py::arg("agent"), py::arg("demo"), py::arg("config") = RewardConfig{});
  m.def(
      "label_rollout",
      [](const Matrix& agent, const std::vector<Matrix>& demos, const RewardConfig& config) {
        return trace_dict(label_rollout(Trajectory(agent), DemoSet(to_trajectories(demos)), config));
      },
      py::arg("agent"), py::arg("demos"), py::arg("config") = RewardConfig{});

  m.def(
      "scripted_expert",
      [](EnvId env, std::uint64_t seed) { return scripted_expert(EnvConfig::defaults(env), seed); },
      py::arg("env"), py::arg("seed"));

  m.def(
      "default_experiment",
      [](EnvId env) { return to_json(default_experiment(env)).dump(); }, py::arg("env"),
      "Default experiment configuration as a JSON string.");
  m.def(
      "run_experiment",
      [](const std::string& config_json) {
        ExperimentResults r;
        {
          py::gil_scoped_release release;
          r = run_experiment(experiment_from_json(nlohmann::json::parse(config_json)));
        }
        py::dict d;
        d["results_csv"] = format_results_csv(r.rows);
        d["aggregate_csv"] = format_aggregate_csv(r.aggregates);
        py::list failures;
        for (const CellFailure& f : r.failures) {
          failures.append(py::make_tuple(f.config_hash, f.seed, f.message));
        }
        d["failures"] = failures;
        return d;
      },
      py::arg("config_json"),
      "Runs a sweep from a JSON configuration and returns the CSV tables.");
}
