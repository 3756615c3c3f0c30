#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "slicesim/config.hpp"
#include "slicesim/error.hpp"
#include "slicesim/exact.hpp"
#include "slicesim/experiment.hpp"
#include "slicesim/greedy.hpp"
#include "slicesim/ppo.hpp"
#include "slicesim/sim.hpp"
#include "slicesim/slicing.hpp"

namespace py = pybind11;
using namespace slicesim;

namespace {

py::dict summary_dict(const RunSummary& s) {
  py::dict d;
  d["slots"] = s.slots;
  d["generated"] = s.generated;
  d["served"] = s.served;
  d["evicted"] = s.evicted;
  d["pending_at_horizon"] = s.pending_at_horizon;
  d["total_cost"] = s.total_cost;
  d["avg_cost_per_request"] = s.avg_cost_per_request;
  d["sla_violation_rate"] = s.sla_violation_rate;
  d["mean_fairness"] = s.mean_fairness;
  return d;
}

// Runs one solver over a graph; `spec` supplies demand, horizon and solver settings.
py::dict simulate(const NetworkGraph& graph, const ExperimentSpec& spec, const std::string& solver,
                  const std::optional<std::string>& checkpoint, bool record_events) {
  std::optional<PolicyState> policy;
  if (solver == "ppo") {
    if (!checkpoint) throw Error(ErrorKind::missing_checkpoint, "ppo needs a checkpoint path");
    policy = load_checkpoint(*checkpoint, spec.ppo,
                             observation_size(graph.node_count(), graph.link_count(), spec.ppo.observation),
                             spec.ppo.observation.max_requests);
  }
  auto s = make_solver(spec, solver, policy ? &*policy : nullptr, spec.seed);
  SimConfig cfg = spec.sim;
  cfg.record_events = record_events;
  ArrivalSource arrivals = spec.trace_file ? experiment_arrivals(spec, graph, spec.demand.lambda, spec.demand.seed)
                                           : poisson_source(ArrivalProcess(spec.demand, graph.node_count()));
  RunResult result;
  std::vector<std::string> events;
  {
    py::gil_scoped_release release;
    Simulation sim(graph, cfg, std::move(arrivals));
    result = run_simulation(sim, *s);
    events = sim.events();
  }
  py::dict out = summary_dict(result.summary);
  py::list slots;
  for (const auto& r : result.reports) {
    py::dict d;
    d["slot"] = r.slot;
    d["arrivals"] = r.arrivals;
    d["served"] = r.served;
    d["evicted"] = r.evicted;
    d["queue_length"] = r.queue_length;
    d["slot_cost"] = r.slot_cost;
    d["fairness"] = r.fairness;
    slots.append(d);
  }
  out["per_slot"] = slots;
  out["events"] = events;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Time-slotted network slice provisioning simulator";

  py::register_exception<Error>(m, "SliceSimError", PyExc_RuntimeError);

  py::class_<LinkAttr>(m, "Link")
      .def(py::init([](NodeId a, NodeId b, double c, double d, double p) { return LinkAttr{a, b, c, d, p}; }),
           py::arg("a"), py::arg("b"), py::arg("capacity"), py::arg("delay"), py::arg("cost"))
      .def_readonly("a", &LinkAttr::endpoint_a)
      .def_readonly("b", &LinkAttr::endpoint_b)
      .def_readonly("capacity", &LinkAttr::capacity)
      .def_readonly("delay", &LinkAttr::delay)
      .def_readonly("cost", &LinkAttr::cost);

  py::class_<NetworkGraph>(m, "NetworkGraph")
      .def(py::init<std::size_t, std::vector<LinkAttr>>(), py::arg("nodes"), py::arg("links"))
      .def_property_readonly("node_count", &NetworkGraph::node_count)
      .def_property_readonly("link_count", &NetworkGraph::link_count)
      .def_property_readonly("links", [](const NetworkGraph& g) {
        return std::vector<LinkAttr>(g.links().begin(), g.links().end());
      })
      .def("serialize", &NetworkGraph::serialize)
      .def_static("parse", [](const std::string& text) { return NetworkGraph::parse(text); })
      .def_static("load", &NetworkGraph::load);

  m.def("generate_random_graph",
        [](std::size_t nodes, std::size_t links, std::uint64_t seed) {
          RandomGraphSpec spec;
          spec.node_count = nodes;
          spec.link_count = links;
          return generate_random_graph(spec, seed);
        },
        py::arg("nodes") = 8, py::arg("links") = 12, py::arg("seed") = 1);

  m.def("simple_paths",
        [](const NetworkGraph& g, NodeId s, NodeId d) {
          std::vector<std::vector<NodeId>> out;
          for (const auto& p : enumerate_simple_paths(g, s, d)) out.push_back(p.nodes);
          return out;
        },
        py::arg("graph"), py::arg("source"), py::arg("destination"));

  m.def("jain_index", [](const std::vector<double>& v) { return jain_index(v); }, py::arg("values"));

  py::class_<ExperimentSpec>(m, "ExperimentSpec")
      .def_static("from_text", [](const std::string& text) { return parse_config_text(text); }, py::arg("text") = "")
      .def_static("from_file", &parse_config, py::arg("path"))
      .def_readwrite("lambdas", &ExperimentSpec::lambda_sweep)
      .def_readwrite("replications", &ExperimentSpec::replications)
      .def_readwrite("solvers", &ExperimentSpec::solvers)
      .def_readwrite("seed", &ExperimentSpec::seed)
      .def_readwrite("threads", &ExperimentSpec::threads)
      .def_property(
          "horizon", [](const ExperimentSpec& s) { return s.sim.horizon; },
          [](ExperimentSpec& s, Slot h) { s.sim.horizon = h; })
      .def_property(
          "arrival_rate", [](const ExperimentSpec& s) { return s.demand.lambda; },
          [](ExperimentSpec& s, double l) { s.demand.lambda = l; });

  m.def("config_reference", &config_reference);

  m.def("simulate", &simulate, py::arg("graph"), py::arg("spec"), py::arg("solver") = "greedy",
        py::arg("checkpoint") = std::nullopt, py::arg("record_events") = false);

  m.def("run_experiment",
        [](const ExperimentSpec& spec) {
          std::vector<ResultRow> rows;
          {
            py::gil_scoped_release release;
            rows = run_experiment(spec);
          }
          return write_csv(rows);
        },
        py::arg("spec"), "Runs the sweep and returns the CSV text.");

  m.def("strip_wall_time", [](const std::string& csv) { return strip_wall_time(csv); });

  m.def("train",
        [](const ExperimentSpec& spec, double lambda, std::size_t iterations, const std::string& checkpoint) {
          std::vector<double> curve;
          {
            py::gil_scoped_release release;
            const PolicyState p = train_policy(spec, lambda, iterations,
                                               [&](std::size_t, double r, const UpdateDiagnostics&) {
                                                 curve.push_back(r);
                                               });
            save_checkpoint(p, checkpoint);
          }
          return curve;
        },
        py::arg("spec"), py::arg("arrival_rate"), py::arg("iterations"), py::arg("checkpoint"),
        "Trains a policy, writes the checkpoint and returns the per-iteration mean reward.");
}
