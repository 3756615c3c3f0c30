#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slicesim/config.hpp"
#include "slicesim/ppo.hpp"
#include "slicesim/sim.hpp"

namespace slicesim {

struct ResultRow {
  std::string kind;  // "run" or "summary"
  std::string solver;
  double lambda = 0.0;
  std::size_t replication = 0;  // summary rows: number of replications averaged
  std::uint64_t seed = 0;       // summary rows: 0
  std::size_t generated = 0;
  std::size_t served = 0;
  std::size_t evicted = 0;
  double avg_cost_per_request = 0.0;
  double avg_cost_se = 0.0;
  double sla_violation_rate = 0.0;
  double sla_se = 0.0;
  double mean_fairness = 0.0;
  double fairness_se = 0.0;
  double wall_time_ms = 0.0;

  bool operator==(const ResultRow&) const = default;
};

/// Graph used by replication seed `seed`: the configured file or a random graph.
NetworkGraph experiment_graph(const ExperimentSpec& spec, std::uint64_t seed);

/// Arrival stream for one run: the configured trace, or Poisson arrivals at `lambda`.
ArrivalSource experiment_arrivals(const ExperimentSpec& spec, const NetworkGraph& graph, double lambda,
                                  std::uint64_t seed);

std::uint64_t replication_seed(const ExperimentSpec& spec, std::size_t replication);

/// Trains a policy on randomly drawn default-size graphs at `lambda`.
PolicyState train_policy(const ExperimentSpec& spec, double lambda, std::size_t iterations,
                         const IterationCallback& on_iteration = {});

/// Policy for the `ppo` solver: the checkpoint when configured, otherwise
/// inline training with ppo.iters iterations at ppo.train_lambda.
PolicyState experiment_policy(const ExperimentSpec& spec);

std::unique_ptr<Solver> make_solver(const ExperimentSpec& spec, std::string_view name,
                                    const PolicyState* policy = nullptr, std::uint64_t seed = 0);

/// solver-major, then lambda, then replication; summary rows follow all data
/// rows in (solver, lambda) order.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec,
                                      const std::optional<PolicyState>& policy = std::nullopt);

std::string csv_header();
std::string write_csv(const std::vector<ResultRow>& rows);
std::vector<ResultRow> parse_csv(std::string_view text);
/// CSV text with the wall_time_ms column removed.
std::string strip_wall_time(std::string_view csv);

}  // namespace slicesim
