#include "slicesim/slicing.hpp"

#include <algorithm>
#include <deque>

#include <fmt/format.h>

#include "slicesim/error.hpp"

namespace slicesim {

bool is_valid_path(const Path& path, const NetworkGraph& graph) {
  if (path.nodes.size() != path.links.size() + 1) return false;
  for (std::size_t i = 0; i < path.nodes.size(); ++i) {
    if (path.nodes[i] >= graph.node_count()) return false;
    for (std::size_t j = 0; j < i; ++j)
      if (path.nodes[j] == path.nodes[i]) return false;
  }
  for (std::size_t i = 0; i < path.links.size(); ++i) {
    if (path.links[i] >= graph.link_count()) return false;
    const auto& l = graph.link(path.links[i]);
    const NodeId u = path.nodes[i], v = path.nodes[i + 1];
    if (!((l.endpoint_a == u && l.endpoint_b == v) || (l.endpoint_a == v && l.endpoint_b == u))) return false;
  }
  return true;
}

namespace {

struct Partial {
  std::vector<NodeId> nodes;
  std::vector<LinkId> links;
  double delay = 0.0;
};

template <typename LinkOk>
std::vector<Path> breadth_first_paths(const NetworkGraph& graph, NodeId source, NodeId destination,
                                      const PathSearchLimits& limits, LinkOk link_ok) {
  std::vector<Path> out;
  if (source >= graph.node_count() || destination >= graph.node_count() || source == destination) return out;
  const std::size_t max_hops = limits.max_hops.value_or(graph.node_count() - 1);
  if (limits.max_paths == 0 || max_hops == 0) return out;

  // FIFO over partial paths; children are pushed in ascending neighbour order,
  // so each hop level comes out in lexicographic node order.
  std::deque<Partial> frontier;
  frontier.push_back(Partial{{source}, {}, 0.0});
  while (!frontier.empty()) {
    Partial p = std::move(frontier.front());
    frontier.pop_front();
    const NodeId tail = p.nodes.back();
    for (LinkId lid : graph.incident(tail)) {
      const NodeId next = graph.link(lid).other_end(tail);
      if (std::find(p.nodes.begin(), p.nodes.end(), next) != p.nodes.end()) continue;
      const double delay = p.delay + graph.link(lid).delay;
      if (!link_ok(lid, delay)) continue;
      if (next == destination) {
        Path path{p.links, p.nodes};
        path.links.push_back(lid);
        path.nodes.push_back(next);
        out.push_back(std::move(path));
        if (out.size() >= limits.max_paths) return out;
      } else if (p.links.size() + 1 < max_hops) {
        Partial child = p;
        child.nodes.push_back(next);
        child.links.push_back(lid);
        child.delay = delay;
        frontier.push_back(std::move(child));
      }
    }
  }
  return out;
}

}  // namespace

std::vector<Path> enumerate_simple_paths(const NetworkGraph& graph, NodeId source, NodeId destination,
                                         const PathSearchLimits& limits) {
  return breadth_first_paths(graph, source, destination, limits, [](LinkId, double) { return true; });
}

std::vector<Path> enumerate_feasible_paths(const NetworkGraph& graph, const ResidualState& state,
                                           const Request& request, const PathSearchLimits& limits) {
  return breadth_first_paths(graph, request.source, request.destination, limits,
                             [&](LinkId lid, double delay_so_far) {
                               return state.fits(lid, request.rate) && delay_so_far <= request.delay_bound;
                             });
}

bool check_bandwidth(const Path& path, const ResidualState& state, double rate) {
  return std::all_of(path.links.begin(), path.links.end(), [&](LinkId l) { return state.fits(l, rate); });
}

double path_delay(const Path& path, const NetworkGraph& graph) {
  double sum = 0.0;
  for (LinkId l : path.links) sum += graph.link(l).delay;
  return sum;
}

bool check_latency(const Path& path, const NetworkGraph& graph, double delay_bound) {
  return path_delay(path, graph) <= delay_bound;
}

double slice_cost(const Path& path, const NetworkGraph& graph) {
  double sum = 0.0;
  for (LinkId l : path.links) sum += graph.link(l).cost;
  return sum;
}

double jain_index(std::span<const double> values) {
  if (values.empty()) return 1.0;
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double v : values) {
    sum += v;
    sum_sq += v * v;
  }
  if (sum_sq == 0.0) return 1.0;
  return (sum * sum) / (static_cast<double>(values.size()) * sum_sq);
}

double jain_fairness(std::span<const double> occupied, std::span<const double> capacity,
                     std::size_t active_slice_count, FairnessDenominator denominator) {
  double sum = 0.0;
  double sum_sq = 0.0;
  for (std::size_t l = 0; l < occupied.size(); ++l) {
    const double u = capacity[l] > 0.0 ? occupied[l] / capacity[l] : 0.0;
    sum += u;
    sum_sq += u * u;
  }
  if (sum_sq == 0.0) return 1.0;
  const double m = denominator == FairnessDenominator::links ? static_cast<double>(occupied.size())
                                                             : static_cast<double>(active_slice_count);
  if (m == 0.0) return 1.0;
  return (sum * sum) / (m * sum_sq);
}

double jain_fairness(const ResidualState& state, std::size_t active_slice_count,
                     FairnessDenominator denominator) {
  return jain_fairness(state.occupied_vector(), state.capacity_vector(), active_slice_count, denominator);
}

SliceInstance build_slice(const NetworkGraph& graph, const ResidualState& state, const Request& request,
                          Path path, Slot current_slot, SliceId slice_id) {
  auto reject = [&](const char* why) {
    return Error(ErrorKind::infeasible_path, fmt::format("request {}: {}", request.id, why));
  };
  if (!request.alive_at(current_slot)) throw reject("lifetime expired or not yet arrived");
  if (!is_valid_path(path, graph) || path.nodes.front() != request.source ||
      path.nodes.back() != request.destination)
    throw reject("path does not connect source to destination");
  if (!check_bandwidth(path, state, request.rate)) throw reject("insufficient residual bandwidth");
  if (!check_latency(path, graph, request.delay_bound)) throw reject("path delay exceeds bound");
  SliceInstance s;
  s.slice_id = slice_id;
  s.request_id = request.id;
  s.cost = slice_cost(path, graph);
  s.path = std::move(path);
  s.load = request.rate;
  s.slice_type = request.demand_type;
  s.expiry = request.expiry();
  return s;
}

void Assignment::admit(SliceInstance slice) {
  if (index_.contains(slice.request_id))
    throw Error(ErrorKind::infeasible, fmt::format("request {} already has a slice", slice.request_id));
  index_.emplace(slice.request_id, slices_.size());
  slices_.push_back(std::move(slice));
}

const SliceInstance* Assignment::find(RequestId id) const {
  auto it = index_.find(id);
  return it == index_.end() ? nullptr : &slices_[it->second];
}

std::vector<RequestId> Assignment::served_ids() const {
  std::vector<RequestId> ids;
  ids.reserve(slices_.size());
  for (const auto& s : slices_) ids.push_back(s.request_id);
  return ids;
}

double Assignment::total_cost() const {
  double sum = 0.0;
  for (const auto& s : slices_) sum += s.cost;
  return sum;
}

ObjectiveValues evaluate_assignment(const Assignment& assignment, const NetworkGraph& graph,
                                    const ResidualState& state, FairnessDenominator denominator) {
  std::vector<double> occupied(state.occupied_vector().begin(), state.occupied_vector().end());
  ObjectiveValues v;
  for (const auto& s : assignment.slices()) {
    v.cost += slice_cost(s.path, graph);
    for (LinkId l : s.path.links) occupied[l] += s.load;
  }
  v.fairness = jain_fairness(occupied, state.capacity_vector(), state.active_count() + assignment.size(),
                             denominator);
  return v;
}

void commit_assignment(const Assignment& assignment, ResidualState& state) {
  for (const auto& s : assignment.slices()) state.reserve(s.slice_id, s.path.links, s.load, s.expiry);
}

}  // namespace slicesim
