#include "slicesim/sim.hpp"

#include <stdexcept>

#include <fmt/format.h>

#include "slicesim/error.hpp"

namespace slicesim {

std::string format_path(const Path& path) {
  std::string out;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (i) out += '-';
    out += std::to_string(path.nodes[i]);
  }
  return out;
}

Simulation::Simulation(NetworkGraph graph, SimConfig config, ArrivalSource arrivals)
    : graph_(std::move(graph)), config_(config), arrivals_(std::move(arrivals)), state_(graph_) {
  if (config_.horizon < 1) throw Error(ErrorKind::config, "horizon must be at least one slot");
  if (!arrivals_) throw Error(ErrorKind::config, "simulation needs an arrival source");
}

const SlotStart& Simulation::begin_slot() {
  if (finished()) throw std::logic_error("simulation is past its horizon");
  if (in_slot_) throw std::logic_error("begin_slot called twice without commit");
  in_slot_ = true;
  start_ = SlotStart{};
  start_.slot = slot_;

  for (SliceId id : state_.release_expired(slot_)) {
    if (config_.record_events) events_.push_back(fmt::format("evt {} release {}", slot_, slice_owner_.at(id)));
    slice_owner_.erase(id);
    ++start_.released;
  }
  state_.check_invariants();

  auto arrivals = arrivals_(slot_);
  for (const auto& r : arrivals) {
    validate_request(r, graph_.node_count());
    if (r.arrival_slot != slot_)
      throw Error(ErrorKind::infeasible, fmt::format("request {} delivered at slot {} but arrives at {}", r.id,
                                                     slot_, r.arrival_slot));
    if (config_.record_events) events_.push_back(fmt::format("evt {} arrive {}", slot_, r.id));
  }
  start_.arrivals = arrivals.size();
  generated_.insert(generated_.end(), arrivals.begin(), arrivals.end());

  auto result = queue_.enqueue_and_evict(std::move(arrivals), slot_);
  for (const auto& r : result.evicted) {
    if (config_.record_events) events_.push_back(fmt::format("evt {} evict {}", slot_, r.id));
  }
  evicted_total_ += result.evicted.size();
  start_.evicted = std::move(result.evicted);
  return start_;
}

ProvisionContext Simulation::context() const {
  return ProvisionContext{graph_, state_, queue_, slot_, next_slice_id_, config_.limits, config_.denominator};
}

SlotReport Simulation::commit(const Assignment& assignment) {
  if (!in_slot_) throw std::logic_error("commit called before begin_slot");

  ResidualState working = state_;
  SliceId max_id = next_slice_id_;
  for (const auto& s : assignment.slices()) {
    const Request* r = queue_.find(s.request_id);
    if (!r) throw Error(ErrorKind::unknown_id, fmt::format("request {} is not pending", s.request_id));
    if (s.slice_id < next_slice_id_ || s.slice_id < max_id)
      throw Error(ErrorKind::infeasible, fmt::format("slice id {} is not fresh", s.slice_id));
    // Re-derive the slice from the request so solver-supplied fields cannot drift.
    SliceInstance checked = build_slice(graph_, working, *r, s.path, slot_, s.slice_id);
    working.reserve(checked.slice_id, checked.path.links, checked.load, checked.expiry);
    max_id = s.slice_id + 1;
  }
  state_ = std::move(working);
  state_.check_invariants();
  next_slice_id_ = max_id;

  SlotReport rep;
  rep.slot = slot_;
  rep.arrivals = start_.arrivals;
  rep.evicted = start_.evicted.size();
  for (const auto& s : assignment.slices()) {
    slice_owner_.emplace(s.slice_id, s.request_id);
    const double cost = slice_cost(s.path, graph_);
    rep.slot_cost += cost;
    if (config_.record_events)
      events_.push_back(fmt::format("evt {} serve {} {} {:.17g}", slot_, s.request_id, format_path(s.path), cost));
  }
  rep.served = assignment.size();
  const auto served_ids = assignment.served_ids();
  queue_.remove_served(served_ids);
  rep.queue_length = queue_.size();
  rep.fairness = jain_fairness(state_, state_.active_count(), config_.denominator);

  served_total_ += rep.served;
  cost_total_ += rep.slot_cost;
  fairness_total_ += rep.fairness;
  const std::size_t settled = served_total_ + evicted_total_;
  rep.sla_violation_rate = settled ? static_cast<double>(evicted_total_) / static_cast<double>(settled) : 0.0;

  reports_.push_back(rep);
  in_slot_ = false;
  ++slot_;
  return rep;
}

SlotReport Simulation::step(Solver& solver) {
  begin_slot();
  return commit(solver.provision(context()));
}

RunSummary Simulation::summary() const {
  RunSummary s;
  s.slots = reports_.size();
  s.generated = generated_.size();
  s.served = served_total_;
  s.evicted = evicted_total_;
  s.pending_at_horizon = queue_.size();
  s.total_cost = cost_total_;
  s.any_served = served_total_ > 0;
  s.avg_cost_per_request = s.any_served ? cost_total_ / static_cast<double>(served_total_) : 0.0;
  const std::size_t settled = served_total_ + evicted_total_;
  s.sla_violation_rate = settled ? static_cast<double>(evicted_total_) / static_cast<double>(settled) : 0.0;
  s.mean_fairness = reports_.empty() ? 1.0 : fairness_total_ / static_cast<double>(reports_.size());
  return s;
}

RunResult run_simulation(Simulation& sim, Solver& solver) {
  while (!sim.finished()) sim.step(solver);
  return {sim.reports(), sim.summary()};
}

ArrivalSource poisson_source(const ArrivalProcess& process) {
  return [process](Slot slot) { return process.sample_arrivals(slot); };
}

ArrivalSource trace_source(RequestTrace trace) {
  return [trace = std::move(trace)](Slot slot) { return trace.arrivals_at(slot); };
}

}  // namespace slicesim
