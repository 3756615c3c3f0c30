#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <vector>

#include "slicesim/demand.hpp"
#include "slicesim/topology.hpp"

namespace slicesim::testing {

using NodeSeq = std::vector<NodeId>;

/// Recursive depth-first enumeration of every simple path, as node sequences.
std::set<NodeSeq> dfs_simple_paths(const NetworkGraph& graph, NodeId source, NodeId destination);

/// dfs_simple_paths filtered by per-link residual bandwidth and total delay.
std::set<NodeSeq> dfs_feasible_paths(const NetworkGraph& graph, std::span<const double> occupied,
                                     const Request& request);

struct OracleOptimum {
  std::size_t served = 0;
  double cost = 0.0;
  double fairness = 1.0;
  std::uint64_t combinations = 0;
};

/// Exhaustive cartesian product over each request's feasible paths plus
/// rejection. Lexicographic order: most served, then least cost, then highest
/// fairness (utilization Jain index over all links).
OracleOptimum exhaustive_lexicographic(const NetworkGraph& graph, std::span<const double> occupied,
                                       std::span<const Request> requests);

/// Product of (feasible path count + 1) over the requests.
std::uint64_t combination_count(const NetworkGraph& graph, std::span<const double> occupied,
                                std::span<const Request> requests);

}  // namespace slicesim::testing
