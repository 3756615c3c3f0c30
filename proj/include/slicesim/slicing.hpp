#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "slicesim/demand.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

struct Path {
  std::vector<LinkId> links;
  std::vector<NodeId> nodes;  // links.size() + 1 entries

  std::size_t hops() const noexcept { return links.size(); }
  bool operator==(const Path&) const = default;
};

/// True when `path` is a loop-free walk in `graph` whose consecutive links
/// share the listed nodes.
bool is_valid_path(const Path& path, const NetworkGraph& graph);

struct PathSearchLimits {
  std::size_t max_paths = 1000;
  std::optional<std::size_t> max_hops;  // defaults to |V| - 1
};

/// Simple paths source -> destination in breadth-first order (hop count, then
/// lexicographic node sequence), without any resource filtering.
std::vector<Path> enumerate_simple_paths(const NetworkGraph& graph, NodeId source, NodeId destination,
                                         const PathSearchLimits& limits = {});

/// Simple paths that satisfy both the bandwidth and the latency constraint
/// of `request` against `state`, in the same order. Prefixes that already
/// violate either constraint are pruned during the search.
std::vector<Path> enumerate_feasible_paths(const NetworkGraph& graph, const ResidualState& state,
                                           const Request& request, const PathSearchLimits& limits = {});

bool check_bandwidth(const Path& path, const ResidualState& state, double rate);
bool check_latency(const Path& path, const NetworkGraph& graph, double delay_bound);
double path_delay(const Path& path, const NetworkGraph& graph);
double slice_cost(const Path& path, const NetworkGraph& graph);

enum class FairnessDenominator { links, slices };

/// Jain index (sum u)^2 / (m * sum u^2) over the given values; 1 when all are zero.
double jain_index(std::span<const double> values);

/// Jain index of per-link utilization occupied/capacity. With
/// FairnessDenominator::slices the normalizing count is `active_slice_count`
/// instead of the number of links.
double jain_fairness(std::span<const double> occupied, std::span<const double> capacity,
                     std::size_t active_slice_count = 0,
                     FairnessDenominator denominator = FairnessDenominator::links);
double jain_fairness(const ResidualState& state, std::size_t active_slice_count = 0,
                     FairnessDenominator denominator = FairnessDenominator::links);

struct SliceInstance {
  SliceId slice_id = 0;
  RequestId request_id = 0;
  Path path;
  double load = 0.0;
  std::uint32_t slice_type = 0;
  Slot expiry = 0;
  double cost = 0.0;
};

/// Throws infeasible_path if the request is no longer alive at current_slot
/// or the path violates the connectivity, bandwidth or latency constraint.
SliceInstance build_slice(const NetworkGraph& graph, const ResidualState& state, const Request& request,
                          Path path, Slot current_slot, SliceId slice_id);

/// Admitted requests and their slices, in commit order.
class Assignment {
 public:
  void admit(SliceInstance slice);
  bool admits(RequestId id) const { return index_.contains(id); }
  const SliceInstance* find(RequestId id) const;
  std::span<const SliceInstance> slices() const noexcept { return slices_; }
  std::size_t size() const noexcept { return slices_.size(); }
  bool empty() const noexcept { return slices_.empty(); }
  std::vector<RequestId> served_ids() const;
  double total_cost() const;

 private:
  std::vector<SliceInstance> slices_;
  std::map<RequestId, std::size_t> index_;
};

struct ObjectiveValues {
  double cost = 0.0;      // f1
  double fairness = 1.0;  // f2
};

/// f1 = sum of admitted slice costs; f2 = fairness of `state` with the
/// assignment's reservations added (the assignment must not yet be committed).
ObjectiveValues evaluate_assignment(const Assignment& assignment, const NetworkGraph& graph,
                                    const ResidualState& state,
                                    FairnessDenominator denominator = FairnessDenominator::links);

/// Commits every slice of the assignment into `state` in order.
void commit_assignment(const Assignment& assignment, ResidualState& state);

}  // namespace slicesim
