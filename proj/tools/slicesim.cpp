#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "slicesim/config.hpp"
#include "slicesim/error.hpp"
#include "slicesim/experiment.hpp"
#include "slicesim/ppo.hpp"
#include "slicesim/sim.hpp"

using namespace slicesim;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

void write_text(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::fwrite(text.data(), 1, text.size(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::config, fmt::format("cannot write {}", path));
  out << text;
  if (!out) throw Error(ErrorKind::config, fmt::format("failed writing {}", path));
}

ExperimentSpec load_spec(const std::string& path) {
  return path.empty() ? ExperimentSpec{} : parse_config(path);
}

struct CommonOverrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<double> lambda;
  std::optional<long long> horizon;
  std::string graph;
};

void add_common(CLI::App* cmd, CommonOverrides& o) {
  cmd->add_option("--config", o.config, "structured key-value config file");
  cmd->add_option("--seed", o.seed, "seed override");
  cmd->add_option("--lambda", o.lambda, "arrival rate override");
  cmd->add_option("--horizon", o.horizon, "number of slots");
  cmd->add_option("--graph", o.graph, "graph file (overrides topology.file)");
}

ExperimentSpec apply_common(const CommonOverrides& o) {
  ExperimentSpec spec = load_spec(o.config);
  if (o.seed) spec.seed = spec.demand.seed = *o.seed;
  if (o.lambda) spec.demand.lambda = *o.lambda;
  if (o.horizon) {
    if (*o.horizon < 1) throw Error(ErrorKind::config, "--horizon must be >= 1");
    spec.sim.horizon = *o.horizon;
  }
  if (!o.graph.empty()) spec.graph_file = o.graph;
  return spec;
}

int classify(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::config:
    case ErrorKind::parse:
    case ErrorKind::missing_checkpoint:
      return kConfigError;
    default:
      return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-slotted network slice provisioning simulator"};
  app.require_subcommand(1);
  app.footer("Configuration keys (section / key = default):\n" + config_reference());

  // gen-topology
  auto* gen = app.add_subcommand("gen-topology", "generate a random connected graph");
  std::string gen_config, gen_out;
  std::uint64_t gen_seed = 1;
  std::optional<std::size_t> gen_nodes, gen_links;
  gen->add_option("--config", gen_config, "config file ([topology] section is used)");
  gen->add_option("--nodes", gen_nodes, "node count");
  gen->add_option("--links", gen_links, "link count");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--out", gen_out, "output graph file (default stdout)");

  // run
  auto* run = app.add_subcommand("run", "simulate one solver over one arrival stream");
  CommonOverrides run_common;
  std::string run_solver, run_ckpt, run_trace, run_events, run_slots;
  add_common(run, run_common);
  run->add_option("--solver", run_solver, "greedy|ip|ppo")->check(CLI::IsMember({"greedy", "ip", "ppo"}));
  run->add_option("--ckpt", run_ckpt, "policy checkpoint (ppo)");
  run->add_option("--trace", run_trace, "request trace file instead of Poisson arrivals");
  run->add_option("--events", run_events, "write the event log to this file");
  run->add_option("--slots", run_slots, "write per-slot metrics CSV to this file");

  // train
  auto* tr = app.add_subcommand("train", "train a PPO policy and save a checkpoint");
  CommonOverrides tr_common;
  std::optional<std::size_t> tr_iters, tr_rollout;
  std::string tr_ckpt, tr_curve;
  add_common(tr, tr_common);
  tr->add_option("--iters", tr_iters, "training iterations");
  tr->add_option("--rollout", tr_rollout, "slots per iteration");
  tr->add_option("--ckpt", tr_ckpt, "checkpoint output path")->required();
  tr->add_option("--curve", tr_curve, "write the per-iteration mean reward to this file");

  // experiment
  auto* ex = app.add_subcommand("experiment", "run a solver x lambda x replication sweep");
  std::string ex_config, ex_out;
  std::optional<std::size_t> ex_threads;
  ex->add_option("--config", ex_config, "experiment config file")->required();
  ex->add_option("--out", ex_out, "CSV output path (overrides experiment.out)");
  ex->add_option("--threads", ex_threads, "worker threads");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kConfigError;
  }

  try {
    if (*gen) {
      ExperimentSpec spec = load_spec(gen_config);
      if (gen_nodes) spec.topology.node_count = *gen_nodes;
      if (gen_links) spec.topology.link_count = *gen_links;
      const NetworkGraph g = generate_random_graph(spec.topology, gen_seed);
      write_text(gen_out, g.serialize());
    } else if (*run) {
      ExperimentSpec spec = apply_common(run_common);
      if (!run_solver.empty()) spec.solver = run_solver;
      if (!run_ckpt.empty()) spec.ppo_checkpoint = run_ckpt;
      if (!run_trace.empty()) spec.trace_file = run_trace;
      validate(spec);
      NetworkGraph graph = experiment_graph(spec, spec.seed);
      std::optional<PolicyState> policy;
      if (spec.solver == "ppo") {
        if (!spec.ppo_checkpoint) throw Error(ErrorKind::missing_checkpoint, "run --solver ppo requires --ckpt");
        policy = load_checkpoint(*spec.ppo_checkpoint, spec.ppo,
                                 observation_size(graph.node_count(), graph.link_count(), spec.ppo.observation),
                                 spec.ppo.observation.max_requests);
      }
      ArrivalSource arrivals;
      if (spec.trace_file) {
        arrivals = experiment_arrivals(spec, graph, spec.demand.lambda, spec.demand.seed);
      } else {
        DemandConfig demand = spec.demand;
        arrivals = poisson_source(ArrivalProcess(demand, graph.node_count()));
      }
      auto solver = make_solver(spec, spec.solver, policy ? &*policy : nullptr, spec.seed);
      SimConfig sim = spec.sim;
      sim.record_events = !run_events.empty();
      Simulation simulation(std::move(graph), sim, std::move(arrivals));
      const RunResult result = run_simulation(simulation, *solver);
      if (!run_events.empty()) {
        std::string text;
        for (const auto& line : simulation.events()) text += line + "\n";
        write_text(run_events, text);
      }
      if (!run_slots.empty()) {
        std::string text = "slot,arrivals,served,evicted,queue_length,slot_cost,fairness,sla_violation_rate\n";
        for (const auto& r : result.reports)
          text += fmt::format("{},{},{},{},{},{},{},{}\n", r.slot, r.arrivals, r.served, r.evicted, r.queue_length,
                              r.slot_cost, r.fairness, r.sla_violation_rate);
        write_text(run_slots, text);
      }
      const RunSummary& s = result.summary;
      fmt::print(
          "solver={} slots={} generated={} served={} evicted={} pending={} avg_cost_per_request={} "
          "sla_violation_rate={} mean_fairness={}\n",
          solver->name(), s.slots, s.generated, s.served, s.evicted, s.pending_at_horizon, s.avg_cost_per_request,
          s.sla_violation_rate, s.mean_fairness);
    } else if (*tr) {
      ExperimentSpec spec = apply_common(tr_common);
      if (tr_iters) spec.ppo.iterations = *tr_iters;
      if (tr_rollout) spec.ppo.rollout = *tr_rollout;
      if (tr_common.seed) spec.ppo.seed = *tr_common.seed;
      validate(spec);
      const double lambda = tr_common.lambda ? *tr_common.lambda
                            : spec.ppo_train_lambda > 0.0 ? spec.ppo_train_lambda
                                                          : spec.demand.lambda;
      std::string curve;
      const PolicyState policy = train_policy(spec, lambda, spec.ppo.iterations,
                                              [&](std::size_t it, double reward, const UpdateDiagnostics& d) {
                                                curve += fmt::format("{} {} {} {}\n", it, reward, d.mean_ratio,
                                                                     d.clip_fraction);
                                              });
      save_checkpoint(policy, tr_ckpt);
      if (!tr_curve.empty()) write_text(tr_curve, "iteration mean_reward mean_ratio clip_fraction\n" + curve);
      fmt::print("trained {} iterations, checkpoint written to {}\n", spec.ppo.iterations, tr_ckpt);
    } else if (*ex) {
      ExperimentSpec spec = parse_config(ex_config);
      if (!ex_out.empty()) spec.output = ex_out;
      if (ex_threads) spec.threads = *ex_threads;
      if (spec.output.empty()) throw Error(ErrorKind::config, "no output path: pass --out or set experiment.out");
      const auto rows = run_experiment(spec);
      write_text(spec.output, write_csv(rows));
    }
  } catch (const Error& e) {
    fmt::print(stderr, "slicesim: {} error: {}\n", to_string(e.kind()), e.what());
    return classify(e);
  } catch (const std::exception& e) {
    fmt::print(stderr, "slicesim: error: {}\n", e.what());
    return kRuntimeError;
  }
  return kOk;
}
