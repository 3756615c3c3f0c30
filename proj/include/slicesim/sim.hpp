#pragma once

#include <string>
#include <vector>

#include "slicesim/demand.hpp"
#include "slicesim/slicing.hpp"
#include "slicesim/solver.hpp"
#include "slicesim/topology.hpp"

namespace slicesim {

struct SimConfig {
  Slot horizon = 1000;
  PathSearchLimits limits{};
  FairnessDenominator denominator = FairnessDenominator::links;
  bool record_events = false;
};

struct SlotReport {
  Slot slot = 0;
  std::size_t arrivals = 0;
  std::size_t served = 0;
  std::size_t evicted = 0;
  std::size_t queue_length = 0;
  double slot_cost = 0.0;
  double fairness = 1.0;
  double sla_violation_rate = 0.0;  // cumulative: evicted / (served + evicted)

  bool operator==(const SlotReport&) const = default;
};

struct RunSummary {
  std::size_t slots = 0;
  std::size_t generated = 0;
  std::size_t served = 0;
  std::size_t evicted = 0;
  std::size_t pending_at_horizon = 0;
  double total_cost = 0.0;
  double avg_cost_per_request = 0.0;  // 0 when nothing was served
  bool any_served = false;
  double sla_violation_rate = 0.0;  // evicted / (served + evicted); pending excluded
  double mean_fairness = 1.0;

  bool operator==(const RunSummary&) const = default;
};

struct SlotStart {
  Slot slot = 0;
  std::size_t arrivals = 0;
  std::size_t released = 0;
  std::vector<Request> evicted;
};

/// Slot loop. Within a slot: release expired reservations, enqueue arrivals,
/// evict expired requests, let the solver provision over the pending queue,
/// commit its slices, drop served requests from the queue, record metrics.
class Simulation {
 public:
  Simulation(NetworkGraph graph, SimConfig config, ArrivalSource arrivals);

  const NetworkGraph& graph() const noexcept { return graph_; }
  const ResidualState& state() const noexcept { return state_; }
  const RequestQueue& queue() const noexcept { return queue_; }
  const SimConfig& config() const noexcept { return config_; }
  Slot current_slot() const noexcept { return slot_; }
  bool finished() const noexcept { return slot_ >= config_.horizon; }

  /// Steps 1-3 of the current slot. Must be followed by commit().
  const SlotStart& begin_slot();
  ProvisionContext context() const;
  /// Steps 5-6; throws if any slice is infeasible (nothing is committed then).
  SlotReport commit(const Assignment& assignment);
  SlotReport step(Solver& solver);

  RunSummary summary() const;
  const std::vector<SlotReport>& reports() const noexcept { return reports_; }
  /// `evt <slot> <kind> <request-id> [path] [cost]` lines, when enabled.
  const std::vector<std::string>& events() const noexcept { return events_; }
  /// Every request generated so far, in arrival order.
  const std::vector<Request>& generated() const noexcept { return generated_; }

 private:
  NetworkGraph graph_;
  SimConfig config_;
  ArrivalSource arrivals_;
  ResidualState state_;
  RequestQueue queue_;
  Slot slot_ = 0;
  bool in_slot_ = false;
  SlotStart start_;
  SliceId next_slice_id_ = 1;
  std::map<SliceId, RequestId> slice_owner_;
  std::vector<Request> generated_;
  std::vector<SlotReport> reports_;
  std::vector<std::string> events_;
  std::size_t served_total_ = 0;
  std::size_t evicted_total_ = 0;
  double cost_total_ = 0.0;
  double fairness_total_ = 0.0;
};

struct RunResult {
  std::vector<SlotReport> reports;
  RunSummary summary;
};

RunResult run_simulation(Simulation& sim, Solver& solver);

ArrivalSource poisson_source(const ArrivalProcess& process);
ArrivalSource trace_source(RequestTrace trace);

std::string format_path(const Path& path);

}  // namespace slicesim
