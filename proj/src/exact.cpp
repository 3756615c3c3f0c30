#include "slicesim/exact.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "slicesim/error.hpp"

namespace slicesim {

IpMode parse_ip_mode(std::string_view text) {
  if (text == "lex" || text == "lexicographic") return IpMode::lexicographic;
  if (text == "weighted") return IpMode::weighted;
  throw Error(ErrorKind::config, fmt::format("unknown ip mode `{}` (lex|weighted)", text));
}

std::string_view to_string(IpMode mode) { return mode == IpMode::lexicographic ? "lex" : "weighted"; }

IpInstance build_instance(const NetworkGraph& graph, const ResidualState& state, const RequestQueue& queue,
                          const IpConfig& config, Slot slot, PathSearchLimits limits,
                          FairnessDenominator denominator) {
  limits.max_paths = std::min(limits.max_paths, config.max_paths);
  IpInstance inst;
  inst.capacity.assign(state.capacity_vector().begin(), state.capacity_vector().end());
  inst.occupied.assign(state.occupied_vector().begin(), state.occupied_vector().end());
  for (const auto& l : graph.links()) {
    inst.delay.push_back(l.delay);
    inst.link_cost.push_back(l.cost);
  }
  inst.active_slices = state.active_count();
  inst.mode = config.mode;
  inst.w1 = config.w1;
  inst.w2 = config.w2;
  inst.cost_scale = graph.max_cost() * static_cast<double>(graph.link_count());
  inst.node_limit = config.node_limit;
  inst.denominator = denominator;

  for (const Request& r : queue.pending()) {
    if (!r.alive_at(slot)) continue;
    IpRequest ir{r, enumerate_feasible_paths(graph, state, r, limits), {}};
    std::vector<double> costs;
    for (const auto& p : ir.paths) costs.push_back(slice_cost(p, graph));
    std::vector<std::size_t> order(ir.paths.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return costs[a] < costs[b]; });
    std::vector<Path> sorted;
    for (std::size_t i : order) {
      sorted.push_back(std::move(ir.paths[i]));
      ir.costs.push_back(costs[i]);
    }
    ir.paths = std::move(sorted);
    inst.requests.push_back(std::move(ir));
  }
  return inst;
}

double scalarize(const IpInstance& instance, const ObjectiveValues& values) {
  if (instance.mode == IpMode::lexicographic) return values.cost;
  return instance.w1 * values.cost - instance.w2 * instance.cost_scale * values.fairness;
}

namespace {

class BranchAndBound {
 public:
  explicit BranchAndBound(const IpInstance& inst)
      : inst_(inst), occupied_(inst.occupied), choice_(inst.requests.size(), kReject) {}

  IpSolution run() {
    best_.choice.assign(inst_.requests.size(), kReject);
    best_.served = 0;
    best_.values = {0.0, fairness(0)};
    best_.objective = scalarize(inst_, best_.values);
    have_incumbent_ = false;
    search(0, 0, 0.0);
    best_.nodes_explored = nodes_;
    best_.optimal = !aborted_;
    return best_;
  }

 private:
  double fairness(std::size_t served) const {
    return jain_fairness(occupied_, inst_.capacity, inst_.active_slices + served, inst_.denominator);
  }

  bool path_fits(const Path& p, double rate) const {
    for (LinkId l : p.links)
      if (!(occupied_[l] + rate <= inst_.capacity[l])) return false;
    return true;
  }

  static bool slack_greater(double value, double reference) {
    return value > reference + 1e-9 * std::max(1.0, std::abs(reference));
  }

  // True when no completion of the current partial assignment can beat the incumbent.
  bool prunable(std::size_t depth, std::size_t served, double cost) const {
    if (!have_incumbent_) return false;
    std::size_t served_ub = served;
    double cost_lb = cost;
    for (std::size_t j = depth; j < inst_.requests.size(); ++j) {
      const auto& req = inst_.requests[j];
      for (std::size_t k = 0; k < req.paths.size(); ++k) {
        if (path_fits(req.paths[k], req.request.rate)) {
          ++served_ub;
          cost_lb += req.costs[k];
          break;
        }
      }
    }
    if (served_ub != best_.served) return served_ub < best_.served;
    // Any completion matching the incumbent's served count serves every
    // still-servable request, each at least at its cheapest fitting path.
    if (inst_.mode == IpMode::lexicographic) return slack_greater(cost_lb, best_.values.cost);
    const double bound = inst_.w1 * cost_lb - inst_.w2 * inst_.cost_scale * 1.0;
    return slack_greater(bound, best_.objective);
  }

  bool better_than_incumbent(std::size_t served, const ObjectiveValues& v, double objective) const {
    if (!have_incumbent_) return true;
    if (served != best_.served) return served > best_.served;
    if (inst_.mode == IpMode::lexicographic) {
      if (v.cost != best_.values.cost) return v.cost < best_.values.cost;
      return v.fairness > best_.values.fairness;
    }
    return objective < best_.objective;
  }

  void search(std::size_t depth, std::size_t served, double cost) {
    if (aborted_) return;
    if (++nodes_ > inst_.node_limit) {
      aborted_ = true;
      return;
    }
    if (depth == inst_.requests.size()) {
      ObjectiveValues v{cost, fairness(served)};
      const double objective = scalarize(inst_, v);
      if (better_than_incumbent(served, v, objective)) {
        best_.choice = choice_;
        best_.served = served;
        best_.values = v;
        best_.objective = objective;
        have_incumbent_ = true;
      }
      return;
    }
    if (prunable(depth, served, cost)) return;

    const auto& req = inst_.requests[depth];
    const double rate = req.request.rate;
    std::vector<double> saved;
    for (std::size_t k = 0; k < req.paths.size(); ++k) {
      const Path& p = req.paths[k];
      if (!path_fits(p, rate)) continue;
      saved.clear();
      for (LinkId l : p.links) {
        saved.push_back(occupied_[l]);
        occupied_[l] += rate;
      }
      choice_[depth] = k;
      search(depth + 1, served + 1, cost + req.costs[k]);
      for (std::size_t i = 0; i < p.links.size(); ++i) occupied_[p.links[i]] = saved[i];
      if (aborted_) return;
    }
    choice_[depth] = kReject;
    search(depth + 1, served, cost);
  }

  const IpInstance& inst_;
  std::vector<double> occupied_;
  std::vector<std::size_t> choice_;
  IpSolution best_;
  bool have_incumbent_ = false;
  bool aborted_ = false;
  std::uint64_t nodes_ = 0;
};

}  // namespace

IpSolution solve_exact(const IpInstance& instance) { return BranchAndBound(instance).run(); }

Assignment to_assignment(const IpInstance& instance, const IpSolution& solution, const NetworkGraph& graph,
                         const ResidualState& state, Slot slot, SliceId first_slice_id) {
  Assignment out;
  ResidualState working = state;
  SliceId next_id = first_slice_id;
  for (std::size_t i = 0; i < instance.requests.size(); ++i) {
    if (solution.choice[i] == kReject) continue;
    const auto& req = instance.requests[i];
    SliceInstance s = build_slice(graph, working, req.request, req.paths[solution.choice[i]], slot, next_id++);
    working.reserve(s.slice_id, s.path.links, s.load, s.expiry);
    out.admit(std::move(s));
  }
  return out;
}

Assignment ExactSolver::provision(const ProvisionContext& ctx) {
  IpInstance inst = build_instance(ctx.graph, ctx.state, ctx.queue, config_, ctx.slot, ctx.limits, ctx.denominator);
  last_ = solve_exact(inst);
  if (!last_.optimal) ++non_optimal_;
  return to_assignment(inst, last_, ctx.graph, ctx.state, ctx.slot, ctx.first_slice_id);
}

}  // namespace slicesim
